"""Command surface: exit codes, report shape, rendering.

All invocations go through main(argv) in-process, so exit codes are
return values and output is captured by capsys.  Hand-checked anchors:
the h4 presentation prints four bracket rows (three defined pairs plus
the central one) and four coproducts; the sigma-twisted conformal
realization prints six operators, among them
cK = -1/2*sigma*m*Tx^-1 + sigma^-1*t - sigma^-1*t*Tx - m*x*Tx^-1,
which is -t(Tx - 1)/sigma - m x Tx^-1 - (m sigma/2) Tx^-1 written in
canonical order.  A single nudged multiplier in the sym_gg table must
surface as erratum-suspected (and flip the exit code under
--allow-errata), while a broken bracket is a plain failure.
"""

import copy
import json
from dataclasses import replace as entry_replace
from importlib import resources

import jsonschema
import pytest

from twistcheck.catalog import Catalog, load_catalog, serialize_catalog
from twistcheck.cli import SuiteConfig, main, show
from twistcheck.errors import ConfigError

pytestmark = pytest.mark.filterwarnings("ignore::pytest.PytestUnraisableExceptionWarning")


@pytest.fixture(scope="module")
def cat():
    return load_catalog()


@pytest.fixture(scope="module")
def schema():
    text = resources.files("twistcheck").joinpath("report_schema.json").read_text()
    return json.loads(text)


def mutated_dir(cat, entry_id, fn, tmp_path):
    """Write a catalog with one edited entry to a directory main can load."""
    entries = []
    for e in cat:
        if e.id == entry_id:
            d = copy.deepcopy(e.definition)
            fn(d)
            e = entry_replace(e, definition=d)
        entries.append(e)
    root = tmp_path / "catalog"
    root.mkdir()
    (root / "entries.toml").write_text(serialize_catalog(Catalog(entries)))
    return str(root)


def report_of(tmp_path, argv):
    dest = tmp_path / "report.json"
    rc = main(argv + ["--report", str(dest)])
    return rc, json.loads(dest.read_text())


# -- config ---------------------------------------------------------------------------


def test_config_defaults_validate():
    SuiteConfig().validate()


@pytest.mark.parametrize(
    "field,value",
    [("order", 0), ("degree", 0), ("tolerance", 0.0), ("m", 0), ("suite", "nope")],
)
def test_config_rejects_bad_values(field, value):
    cfg = SuiteConfig()
    setattr(cfg, field, value)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_config_file_sets_values(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('order = 2\nsigma = "1/5"\nallow_errata = true\n')
    rc, doc = report_of(
        tmp_path, ["verify", "lattice", "--config", str(cfg)]
    )
    assert rc == 0
    assert doc["config"]["order"] == 2
    assert doc["config"]["sigma"] == "1/5"
    assert doc["config"]["allow_errata"] is True


def test_flag_overrides_config_file(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('sigma = "1/5"\n')
    rc, doc = report_of(
        tmp_path,
        ["verify", "lattice", "--config", str(cfg), "--sigma", "1/10"],
    )
    assert rc == 0
    assert doc["config"]["sigma"] == "1/10"


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("orderx = 2\n")
    assert main(["verify", "lattice", "--config", str(cfg)]) == 2
    assert "orderx" in capsys.readouterr().err


def test_bad_toml_reports_line(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("order = = 2\n")
    assert main(["verify", "lattice", "--config", str(cfg)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_config_type_errors(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('order = "four"\n')
    assert main(["verify", "lattice", "--config", str(cfg)]) == 2
    cfg.write_text('sigma = "no/thanks"\n')
    assert main(["verify", "lattice", "--config", str(cfg)]) == 2
    capsys.readouterr()


# -- verify ---------------------------------------------------------------------------


def test_verify_single_twist_passes(tmp_path, capsys):
    rc, doc = report_of(tmp_path, ["verify", "twist", "map_bh", "--order", "2"])
    assert rc == 0
    assert doc["summary"]["fail"] == 0
    assert doc["summary"]["total"] == 4
    assert {c["entry"] for c in doc["checks"]} == {"map_bh"}
    out = capsys.readouterr().out
    assert "4 pass" in out


def test_verify_algebra_subset(tmp_path):
    rc, doc = report_of(
        tmp_path, ["verify", "algebra", "uz_sl2_ba", "--order", "2"]
    )
    assert rc == 0
    names = [c["check"] for c in doc["checks"]]
    assert "uz_sl2_ba:jacobi" in names
    assert all(c["suite"] == "algebra" for c in doc["checks"])


def test_verify_lattice_report_validates(tmp_path, schema):
    rc, doc = report_of(tmp_path, ["verify", "lattice"])
    assert rc == 0
    jsonschema.validate(doc, schema)
    assert doc["schema_version"] == 1
    assert doc["summary"]["total"] == 13
    assert doc["summary"]["total"] == doc["summary"]["pass"]


def test_report_is_deterministic_modulo_timing(tmp_path):
    docs = []
    for i in (1, 2):
        _, doc = report_of(tmp_path, ["verify", "symmetry", "sym_gg"])
        for c in doc["checks"]:
            c.pop("seconds")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_lattice_params_reach_the_grid(tmp_path):
    rc, doc = report_of(
        tmp_path,
        ["verify", "lattice", "--sigma", "1/5", "--tau", "1/20", "--m", "1/3"],
    )
    assert rc == 0
    assert doc["config"]["sigma"] == "1/5"
    assert doc["config"]["tau"] == "1/20"
    assert doc["config"]["m"] == "1/3"


def test_lattice_rejects_zero_steps(capsys):
    assert main(["verify", "lattice", "--sigma", "0"]) == 2
    assert "positive" in capsys.readouterr().err


def test_unknown_entry_is_usage_error(capsys):
    assert main(["verify", "twist", "nonexistent"]) == 2
    assert "nonexistent" in capsys.readouterr().err


def test_entry_outside_suite_is_usage_error(capsys):
    assert main(["verify", "twist", "real_gd"]) == 2
    assert "real_gd" in capsys.readouterr().err


def test_missing_catalog_is_usage_error(capsys):
    assert main(["verify", "lattice", "--catalog", "/no/such/dir"]) == 2
    capsys.readouterr()


def test_corrupted_bracket_fails_with_check_id(cat, tmp_path, capsys):
    def brk(d):
        d["brackets"]["H,X"] = "3*sinh(z*X)/z"

    root = mutated_dir(cat, "uz_sl2_ba", brk, tmp_path)
    rc = main(
        ["verify", "algebra", "uz_sl2_ba", "--order", "2", "--catalog", root]
    )
    assert rc == 1
    out = capsys.readouterr().out
    assert "uz_sl2_ba:jacobi" in out
    assert "FAIL" in out


def test_nudged_multiplier_is_erratum_and_allow_errata_downgrades(
    cat, tmp_path, capsys
):
    def nudge(d):
        d["table"]["D"] = "3"

    root = mutated_dir(cat, "sym_gg", nudge, tmp_path)
    argv = ["verify", "symmetry", "sym_gg", "--catalog", root]
    rc, doc = report_of(tmp_path, argv)
    assert rc == 1
    statuses = {c["check"]: c["status"] for c in doc["checks"]}
    assert statuses["sym_gg:table"] == "erratum-suspected"
    assert statuses["sym_gg:monomial-actions"] == "pass"
    assert doc["summary"]["erratum_suspected"] == 1
    bad = [c for c in doc["checks"] if c["status"] != "pass"]
    assert len(bad) == 1 and "3 -> 2" in bad[0]["erratum"]
    capsys.readouterr()
    assert main(argv + ["--allow-errata"]) == 0
    capsys.readouterr()


def test_unparseable_catalog_is_caught_at_load(cat, tmp_path, capsys):
    def brk(d):
        d["operators"]["cP"] = "dx +"

    root = mutated_dir(cat, "real_ib", brk, tmp_path)
    rc = main(["verify", "realization", "real_ib", "--catalog", root])
    assert rc == 2
    assert "real_ib" in capsys.readouterr().err


def test_engine_exception_becomes_aborted_check(cat, tmp_path, capsys):
    # parses and loads, but exp of dt has no shift realization; the unit
    # must degrade to a failing check id, not a crash
    def brk(d):
        d["element"] = "((exp(sigma*H) - 1)/sigma)^2 - 2*M*H"

    root = mutated_dir(cat, "cas_ge", brk, tmp_path)
    rc = main(
        ["verify", "realization", "cas_ge", "--order", "2", "--catalog", root]
    )
    assert rc == 1
    assert "cas_ge:aborted" in capsys.readouterr().out


def test_internal_error_is_exit_3(monkeypatch, capsys):
    import twistcheck.cli as cli

    def boom(*a, **k):
        raise RuntimeError("wires crossed")

    monkeypatch.setattr(cli, "check_embedding", boom)
    assert main(["verify", "embedding", "--order", "2"]) == 3
    capsys.readouterr()


# -- show and list --------------------------------------------------------------------


def test_show_h4_presentation(capsys):
    assert main(["show", "uz_h4_fb"]) == 0
    out = capsys.readouterr().out
    brackets = [l for l in out.splitlines() if l.strip().startswith("[")]
    assert len(brackets) == 4
    assert out.count("Delta(") == 4
    assert "[M, .] = 0" in out


def test_show_conformal_realization(capsys):
    assert main(["show", "real_ib"]) == 0
    out = capsys.readouterr().out
    ops = [l for l in out.splitlines() if " = " in l]
    assert len(ops) == 6
    assert (
        "cK = -1/2*sigma*m*Tx^-1 + sigma^-1*t - sigma^-1*t*Tx - m*x*Tx^-1"
        in out
    )


def test_show_unknown_entry(capsys):
    assert main(["show", "nope"]) == 2
    assert "nope" in capsys.readouterr().err


def test_show_every_entry_in_every_format(cat):
    for e in cat:
        for fmt in ("text", "latex-ish", "json"):
            assert show(cat, e.id, fmt=fmt, order=2).strip()


def test_show_json_roundtrips(cat):
    doc = json.loads(show(cat, "screen_gf", fmt="json"))
    assert doc["id"] == "screen_gf"
    assert doc["kind"] == "screen"
    assert "equation" in doc["sections"]


def test_show_latexish_marks_up_operators(capsys):
    assert main(["show", "real_ib", "--format", "latex-ish"]) == 0
    out = capsys.readouterr().out
    assert r"\partial_t" in out
    assert "T_x^{-1}" in out
    assert r"\sigma" in out


def test_show_twist_inverse_renders(capsys):
    assert main(["show", "map_bd"]) == 0
    out = capsys.readouterr().out
    assert "-- inverse" in out
    assert "Jm -> (1)*cJm + (1/2*z)*cJ3*cJ3" in out


def test_list_all_and_filtered(cat, capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert len(out.splitlines()) == sum(1 for _ in cat)
    assert main(["list", "screen"]) == 0
    out = capsys.readouterr().out
    assert len(out.splitlines()) == 5
    assert all("screen" in l for l in out.splitlines())

"""Verification driver: load the catalog, run suites, report.

The command surface is small: `verify` runs any or all of the suites and
emits a summary plus an optional JSON report, `show` prints one catalog
entry in canonical (fully expanded) form, and `list` inventories the
catalog.  Exit codes are a contract: 0 all checks pass, 1 at least one
verification failure, 2 bad usage or configuration, 3 internal error.

An erratum-suspected check is a failure by default: the engine found a
single-coefficient repair consistent with the whole table, but the
catalog text as printed does not hold, and silently blessing it would
defeat the point.  --allow-errata downgrades exactly that status, and
nothing else, to a warning.

Independent units of work (one catalog entry per suite, roughly) are
dispatched to a small thread pool; the engines are pure functions of the
catalog, so scheduling cannot change any verdict, and the report is
assembled single-threaded in a fixed order.  Reports are therefore
bit-identical across runs except for the timing fields.
"""

import argparse
import json
import os
import sys
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .catalog import KINDS, load_catalog
from .errors import (
    ConfigError,
    ParseError,
    TwistcheckError,
    UnknownEntry,
    ValidationFailed,
)
from .exprs import evaluate, parse
from .hopf import (
    Check,
    check_algebra,
    check_classical_limit,
    check_contraction,
    check_embedding,
    check_hopf,
    check_quotients,
    check_rmatrix,
    check_twist,
    model,
)
from .lattice import GridSpec, lattice_suite
from .ncalg import NCDomain
from .opalg import (
    casimir,
    check_continuum_limit,
    operator_of,
    verify_casimir,
    verify_realization,
    verify_symmetry_table,
)

F = Fraction

SUITES = (
    "algebra",
    "hopf",
    "rmatrix",
    "twist",
    "contraction",
    "embedding",
    "realization",
    "symmetry",
    "lattice",
)


@dataclass
class SuiteConfig:
    suite: str = "all"
    entries: tuple = ()
    order: int = 4
    degree: int = 12
    sigma: Fraction = F(1, 10)
    tau: Fraction = F(1, 10)
    m: Fraction = F(1, 2)
    tolerance: float = 1e-10
    report: str = ""
    allow_errata: bool = False
    catalog: str = ""

    def validate(self):
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.order < 1:
            raise ConfigError("order must be at least 1")
        if self.degree < 1:
            raise ConfigError("degree cap must be at least 1")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.sigma < 0 or self.tau < 0:
            raise ConfigError("lattice steps must be nonnegative")
        if self.m == 0:
            raise ConfigError("m must be nonzero")

    def echo(self):
        return {
            "suite": self.suite,
            "entries": list(self.entries),
            "order": self.order,
            "degree": self.degree,
            "sigma": str(self.sigma),
            "tau": str(self.tau),
            "m": str(self.m),
            "tolerance": self.tolerance,
            "allow_errata": self.allow_errata,
        }


def _rational(value, what):
    try:
        return F(str(value))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{what} must be a rational like 1/10, got {value!r}") from None


_CONFIG_KEYS = (
    "suite",
    "entries",
    "order",
    "degree",
    "sigma",
    "tau",
    "m",
    "tolerance",
    "report",
    "allow_errata",
    "catalog",
)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        # tomllib messages carry line and column
        raise ConfigError(f"bad config {path}: {exc}") from None
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def _coerce(values):
    cfg = SuiteConfig()
    for key, v in values.items():
        if key == "entries":
            if not isinstance(v, (list, tuple)) or not all(
                isinstance(s, str) for s in v
            ):
                raise ConfigError("entries must be a list of catalog ids")
            cfg.entries = tuple(v)
        elif key in ("order", "degree"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{key} must be an integer")
            setattr(cfg, key, v)
        elif key in ("sigma", "tau", "m"):
            setattr(cfg, key, _rational(v, key))
        elif key == "tolerance":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError("tolerance must be a number")
            cfg.tolerance = float(v)
        elif key == "allow_errata":
            if not isinstance(v, bool):
                raise ConfigError("allow_errata must be true or false")
            cfg.allow_errata = v
        else:
            if not isinstance(v, str):
                raise ConfigError(f"{key} must be a string")
            setattr(cfg, key, v)
    cfg.validate()
    return cfg


def make_config(args):
    """Config file first, command line on top."""
    values = {}
    if args.config:
        values.update(load_config(args.config))
    overrides = {
        "suite": args.suite,
        "entries": tuple(args.entries) or None,
        "order": args.order,
        "degree": args.degree,
        "sigma": args.sigma,
        "tau": args.tau,
        "m": args.m,
        "tolerance": args.tolerance,
        "report": args.report,
        "allow_errata": args.allow_errata,
        "catalog": args.catalog,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return _coerce(values)


def _load(catalog_dir):
    if not catalog_dir:
        return load_catalog()
    try:
        return load_catalog(Path(catalog_dir))
    except OSError as exc:
        raise ConfigError(f"cannot read catalog {catalog_dir}: {exc}") from None


# -- suite execution -----------------------------------------------------------------


def _suite_units(cat, cfg):
    """(suite, entry, thunk) triples in their fixed reporting order."""
    for eid in cfg.entries:
        cat.get(eid)
    chosen = set(cfg.entries)
    seen = set()

    def pick(kind):
        ids = sorted(cat.ids(kind))
        if chosen:
            ids = [i for i in ids if i in chosen]
            seen.update(ids)
        return ids

    def on(suite):
        return cfg.suite in ("all", suite)

    opts = {"degree_cap": cfg.degree}
    n = cfg.order
    units = []
    if on("algebra"):
        for pid in pick("presentation"):
            units.append(
                (
                    "algebra",
                    pid,
                    lambda p=pid: check_algebra(cat, p, n, **opts)
                    + check_classical_limit(cat, p, n, **opts),
                )
            )
    if on("hopf"):
        for pid in pick("presentation"):
            units.append(("hopf", pid, lambda p=pid: check_hopf(cat, p, n, **opts)))
    if on("rmatrix"):
        for pid in pick("presentation"):
            if "rmatrix" in cat.get(pid).definition:
                units.append(
                    ("rmatrix", pid, lambda p=pid: check_rmatrix(cat, p, n, **opts))
                )
    if on("twist"):
        for tid in pick("twist"):
            units.append(("twist", tid, lambda t=tid: check_twist(cat, t, n, **opts)))
    if on("contraction"):
        for cid in pick("contraction"):
            units.append(
                ("contraction", cid, lambda c=cid: check_contraction(cat, c, n, **opts))
            )
        if not chosen:
            units.append(
                ("contraction", "", lambda: check_quotients(cat, n, **opts))
            )
    if on("embedding"):
        for eid in pick("embedding"):
            units.append(
                ("embedding", eid, lambda e=eid: check_embedding(cat, e, n, **opts))
            )
    if on("realization"):
        for rid in pick("realization"):
            units.append(("realization", rid, lambda r=rid: verify_realization(cat, r)))
            if rid != "real_classical":
                units.append(
                    ("realization", rid, lambda r=rid: check_continuum_limit(cat, r))
                )
        for cid in pick("casimir"):
            units.append(
                ("realization", cid, lambda c=cid: verify_casimir(cat, c, order=n))
            )
    if on("symmetry"):
        for sid in pick("symmetry"):
            units.append(("symmetry", sid, lambda s=sid: verify_symmetry_table(cat, s)))
    if on("lattice"):
        sids = pick("screen")
        if sids or not chosen:
            if cfg.sigma == 0 or cfg.tau == 0:
                # every screen divides by both steps
                raise ConfigError("the lattice suite needs positive sigma and tau")
            grid = GridSpec(sigma=cfg.sigma, tau=cfg.tau)

            def run_lattice(ids=tuple(sids)):
                checks = lattice_suite(cat, grid, tolerance=cfg.tolerance, m=cfg.m)
                if ids:
                    checks = [c for c in checks if c.name.split(":")[0] in ids]
                return checks

            units.append(("lattice", "", run_lattice))

    missing = sorted(chosen - seen)
    if missing:
        raise ConfigError(
            f"suite {cfg.suite!r} does not cover: {', '.join(missing)}"
        )
    return units


@dataclass
class VerificationReport:
    records: list
    summary: dict
    engine: str
    config: dict

    def failures(self, allow_errata=False):
        bad = ("fail",) if allow_errata else ("fail", "erratum-suspected")
        return [r for r in self.records if r["status"] in bad]

    def to_json(self):
        doc = {
            "schema_version": 1,
            "engine": self.engine,
            "config": self.config,
            "summary": self.summary,
            "checks": self.records,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run(config, out=None):
    """Execute the configured suites; report to disk and summary to out."""
    out = sys.stdout if out is None else out
    config.validate()
    cat = _load(config.catalog)
    units = _suite_units(cat, config)

    def one(unit):
        suite, entry, fn = unit
        t0 = time.perf_counter()
        try:
            checks = list(fn())
        except TwistcheckError as exc:
            # a unit that cannot even run is a failed verification, not a
            # crash: corrupted inputs must surface as failing check ids
            name = f"{entry or suite}:aborted"
            checks = [Check(name, False, f"{type(exc).__name__}: {exc}")]
        return checks, time.perf_counter() - t0

    workers = max(1, min(8, os.cpu_count() or 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, units))

    records = []
    for (suite, entry, _), (checks, dt) in zip(units, results):
        for c in checks:
            records.append(
                {
                    "check": c.name,
                    "suite": suite,
                    "entry": entry or None,
                    "status": c.status,
                    "detail": c.detail,
                    "erratum": c.erratum,
                    "seconds": round(dt, 6),
                }
            )
    summary = {
        "total": len(records),
        "pass": sum(r["status"] == "pass" for r in records),
        "fail": sum(r["status"] == "fail" for r in records),
        "erratum_suspected": sum(
            r["status"] == "erratum-suspected" for r in records
        ),
    }
    report = VerificationReport(
        records=records,
        summary=summary,
        engine=f"twistcheck {__version__}",
        config=config.echo(),
    )
    if config.report:
        with open(config.report, "w") as fh:
            fh.write(report.to_json())
    _print_summary(report, config, out)
    return report


def _print_summary(report, cfg, out):
    for r in report.records:
        if r["status"] == "pass":
            continue
        print(f"{r['status'].upper():18} {r['check']}  {r['detail']}".rstrip(), file=out)
        if r["erratum"]:
            print(f"{'':18} {r['erratum']}", file=out)
    counts = {}
    for r in report.records:
        c = counts.setdefault(r["suite"], [0, 0])
        c[0] += 1
        c[1] += r["status"] == "pass"
    for suite in SUITES:
        if suite in counts:
            total, good = counts[suite]
            print(f"{suite:12} {total:4} checks, {good:4} pass", file=out)
    s = report.summary
    print(
        f"total: {s['total']} checks, {s['pass']} pass, {s['fail']} fail,"
        f" {s['erratum_suspected']} erratum-suspected"
        f"  (order {cfg.order}, degree {cfg.degree})",
        file=out,
    )


# -- show and list -------------------------------------------------------------------


def _describe(cat, e, order):
    """Canonical sections for one entry: everything rendered, not echoed."""
    d = e.definition
    if e.kind == "presentation":
        ctx = cat.context(e.id, order)
        m = model(cat, e.id, order)
        gens = [", ".join(d["generators"]) + f"   (deformation {d['deformation']})"]
        brackets = []
        for pair in sorted(d.get("brackets", {})):
            a, b = (s.strip() for s in pair.split(","))
            ia, ib = d["generators"].index(a), d["generators"].index(b)
            brackets.append(f"[{a}, {b}] = {ctx.bracket(ia, ib).render()}")
        brackets.extend(f"[{g}, .] = 0" for g in d.get("central", ()))
        cops = [
            f"Delta({ctx.generators[i]}) = {m.deltas[i].render()}"
            for i in sorted(m.deltas)
        ]
        return [("generators", gens), ("brackets", brackets), ("coproducts", cops)]
    if e.kind == "twist":
        dom = NCDomain(cat.context(d["inside"], order))
        macros = d.get("macros")
        images = [
            f"{g} -> {evaluate(parse(text, macros=macros), dom).render()}"
            for g, text in sorted(d["images"].items())
        ]
        head = [f"{d['defines']} expressed inside {d['inside']}"]
        if "composition_of" in d:
            head.append("composition of " + " then ".join(d["composition_of"]))
        sections = [("map", head), ("images", images)]
        if "inverse" in d:
            dom_def = NCDomain(cat.context(d["defines"], order))
            inv = [
                f"{g} -> {evaluate(parse(text, macros=macros), dom_def).render()}"
                for g, text in sorted(d["inverse"].items())
            ]
            sections.append(("inverse", inv))
        return sections
    if e.kind == "contraction":
        rule = d["param_rule"]
        head = [
            f"{d['source']} -> {d['target']}",
            f"parameter: old = {rule['coeff']} * eps^{rule['eps_power']} * new",
        ]
        rows = [
            f"{g} = {a['coeff']} * eps^{a['eps_power']} * {a['gen']}"
            for g, a in sorted(d["assignments"].items())
        ]
        return [("contraction", head), ("assignments", rows)]
    if e.kind == "embedding":
        dom = NCDomain(cat.context(d["big"], order))
        macros = d.get("macros")
        head = [f"{d['sub']} inside {d['big']}, parameter scale {d['param_scale']}"]
        images = [
            f"{g} -> {evaluate(parse(text, macros=macros), dom).render()}"
            for g, text in sorted(d["images"].items())
        ]
        return [("embedding", head), ("images", images)]
    if e.kind == "realization":
        ops = [
            f"{g} = {operator_of(text, macros=d.get('macros')).render()}"
            for g, text in sorted(d["operators"].items())
        ]
        return [("algebra", [d["algebra"]]), ("operators", ops)]
    if e.kind == "casimir":
        head = [f"element of {d['algebra']}: {d['element']}"]
        rows = [
            f"under {rid}: {casimir(cat, rid, e.id).render()}"
            for rid in sorted(d.get("realized_by", {}))
        ]
        return [("casimir", head), ("realized", rows)]
    if e.kind == "symmetry":
        head = [f"realization {d['realization']}, casimir {d['casimir']}"]
        rows = [
            f"[E, {g}] = ({operator_of(text).render()}) * E"
            for g, text in sorted(d["table"].items())
        ]
        return [("symmetry", head), ("multipliers", rows)]
    # screen
    head = [f"E = {operator_of(d['operator']).render()}"]
    links = [f"family {d['family']}"]
    for key in ("realization", "casimir"):
        if key in d:
            links.append(f"{key} {d[key]}")
    return [("equation", head), ("links", links)]


_LATEX = (
    ("Delta(", r"\Delta("),
    (" (x) ", r" \otimes "),
    ("sigma", r"\sigma"),
    ("tau", r"\tau"),
    ("eps", r"\varepsilon"),
    ("dx", r"\partial_x"),
    ("dt", r"\partial_t"),
    ("Tx", "T_x"),
    ("Tt", "T_t"),
    ("->", r"\mapsto"),
    ("*", r" \, "),
)


def _latexish(line):
    for old, new in _LATEX:
        line = line.replace(old, new)
    out = []
    i = 0
    while i < len(line):
        if line[i] == "^" and i + 1 < len(line):
            j = i + 1 + (line[i + 1] == "-")
            while j < len(line) and line[j].isdigit():
                j += 1
            if j > i + 1:
                out.append("^{" + line[i + 1 : j] + "}")
                i = j
                continue
        out.append(line[i])
        i += 1
    return "".join(out)


def show(cat, entry_id, fmt="text", order=3):
    """Render one catalog entry, fully expanded at the given order."""
    e = cat.get(entry_id)
    sections = _describe(cat, e, order)
    if fmt == "json":
        doc = {
            "id": e.id,
            "kind": e.kind,
            "label": e.paper_label,
            "sections": {head: lines for head, lines in sections},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    styled = _latexish if fmt == "latex-ish" else (lambda s: s)
    out = [f"{e.id}  ({e.kind}" + (f", [{e.paper_label}])" if e.paper_label else ")")]
    for head, lines in sections:
        out.append(f"-- {head}")
        out.extend(f"   {styled(line)}" for line in lines)
    return "\n".join(out) + "\n"


def list_entries(cat, kind=None):
    rows = []
    for e in sorted(cat, key=lambda e: (KINDS.index(e.kind), e.id)):
        if kind and e.kind != kind:
            continue
        label = ",".join(e.labels()) or "-"
        rows.append(f"{e.id:24} {e.kind:13} {label}")
    return "\n".join(rows) + "\n"


# -- entry point ---------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="twistcheck",
        description="exact verification of the bundled deformation catalog",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suite", choices=("all",) + SUITES)
    v.add_argument("entries", nargs="*", metavar="id", help="restrict to these ids")
    v.add_argument("--order", type=int, default=None, help="truncation order N")
    v.add_argument("--degree", type=int, default=None, help="series degree cap")
    v.add_argument("--sigma", default=None, help="lattice step in x, e.g. 1/10")
    v.add_argument("--tau", default=None, help="lattice step in t")
    v.add_argument("--m", default=None, help="mass parameter")
    v.add_argument("--tolerance", type=float, default=None)
    v.add_argument("--report", default=None, help="write a JSON report here")
    v.add_argument("--allow-errata", action="store_true", default=None)
    v.add_argument("--config", default=None, help="TOML config file")
    v.add_argument("--catalog", default=None, help="alternate catalog path")

    s = sub.add_parser("show", help="render one catalog entry")
    s.add_argument("entry")
    s.add_argument("--format", choices=("text", "latex-ish", "json"), default="text")
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--catalog", default=None)

    li = sub.add_parser("list", help="inventory the catalog")
    li.add_argument("kind", nargs="?", choices=KINDS)
    li.add_argument("--catalog", default=None)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            cfg = make_config(args)
            report = run(cfg)
            return 1 if report.failures(cfg.allow_errata) else 0
        cat = _load(args.catalog)
        if args.command == "show":
            sys.stdout.write(show(cat, args.entry, args.format, args.order))
        else:
            sys.stdout.write(list_entries(cat, args.kind))
        return 0
    except (ConfigError, UnknownEntry, ValidationFailed, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())

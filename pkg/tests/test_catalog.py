import pytest

from twistcheck.catalog import (
    ALL_LABELS,
    load_catalog,
    load_catalog_text,
    serialize_catalog,
)
from twistcheck.errors import UnknownEntry, ValidationFailed
from twistcheck.ncalg import verify_jacobi


@pytest.fixture(scope="module")
def cat():
    return load_catalog()


def test_full_catalog_loads(cat):
    assert len(cat) == 50
    assert len(cat.ids("presentation")) == 14
    assert len(cat.ids("twist")) == 10
    assert len(cat.ids("contraction")) == 2
    assert len(cat.ids("embedding")) == 2
    assert len(cat.ids("realization")) == 7
    assert len(cat.ids("casimir")) == 4
    assert len(cat.ids("symmetry")) == 6
    assert len(cat.ids("screen")) == 5


def test_label_coverage(cat):
    cov = cat.coverage()
    assert cov["missing"] == []
    assert cov["unknown"] == []
    assert set(cov["unchecked"]) == {"ae"}
    # every tag is either implemented or listed as unchecked
    assert set(cov["labels"]) | set(cov["unchecked"]) == set(ALL_LABELS)


def test_get_and_labels(cat):
    e = cat.get("uz_sl2_bc")
    assert e.kind == "presentation"
    assert e.labels() == ("bc", "eb", "ab")
    with pytest.raises(UnknownEntry):
        cat.get("no_such_entry")


def test_context_only_for_presentations(cat):
    with pytest.raises(UnknownEntry):
        cat.context("map_bd", order=2)


def test_context_is_cached_per_options(cat):
    a = cat.context("uz_sl2_bc", order=2)
    b = cat.context("uz_sl2_bc", order=2)
    c = cat.context("uz_sl2_bc", order=3)
    assert a is b
    assert a is not c


@pytest.mark.parametrize(
    "pid",
    [
        "borel_aa",
        "uz_sl2_ba",
        "uz_sl2_bc",
        "sl2_twist_bf",
        "uz_gl2_ca",
        "gl2_twist_cd",
        "uz_poincare_db",
        "poincare_twist_de",
        "uz_h4_fb",
        "h4_twist_fg",
    ],
)
def test_sl2_family_brackets_satisfy_jacobi(cat, pid):
    assert verify_jacobi(cat.context(pid, order=2)) == []


@pytest.mark.parametrize("pid", ["uz_schr_sigma_gb", "schr_sigma_twist_he"])
def test_sigma_family_brackets_satisfy_jacobi(cat, pid):
    assert verify_jacobi(cat.context(pid, order=2)) == []


@pytest.mark.parametrize("pid", ["uz_schr_tau_jb", "schr_tau_twist_kd"])
def test_tau_family_brackets_satisfy_jacobi(cat, pid):
    assert verify_jacobi(cat.context(pid, order=2)) == []


def test_serialize_round_trip(cat):
    text = serialize_catalog(cat)
    cat2 = load_catalog_text(text)
    assert len(cat2) == len(cat)
    for e in cat:
        e2 = cat2.get(e.id)
        assert e2.kind == e.kind
        assert e2.labels() == e.labels()
        assert e2.definition == e.definition
    assert serialize_catalog(cat2) == text


BASE = """
[[entries]]
id = "p1"
kind = "presentation"
paper_label = "aa"
source_text = "[A,B] = B"

[entries.definition]
generators = ["A", "B"]
deformation = "z"

[entries.definition.brackets]
"A,B" = "B"

[entries.definition.coproducts]
A = "tensor(1, A) + tensor(A, 1)"
B = "tensor(1, B) + tensor(B, 1)"
"""


def test_minimal_presentation_loads():
    cat = load_catalog_text(BASE)
    assert cat.ids() == ["p1"]


def test_unknown_kind_rejected():
    with pytest.raises(ValidationFailed, match="unknown kind"):
        load_catalog_text(BASE.replace('"presentation"', '"gadget"'))


def test_unknown_definition_field_rejected():
    text = BASE.replace('deformation = "z"', 'deformation = "z"\nbogus = "1"')
    with pytest.raises(ValidationFailed, match="unknown definition fields"):
        load_catalog_text(text)


def test_missing_bracket_pair_rejected():
    text = BASE.replace('generators = ["A", "B"]', 'generators = ["A", "B", "G"]')
    text = text.replace(
        'B = "tensor(1, B) + tensor(B, 1)"',
        'B = "tensor(1, B) + tensor(B, 1)"\nG = "tensor(1, G) + tensor(G, 1)"',
    )
    with pytest.raises(ValidationFailed, match="no bracket given"):
        load_catalog_text(text)


def test_central_generator_fills_missing_brackets():
    text = BASE.replace('generators = ["A", "B"]', 'generators = ["A", "B", "G"]')
    text = text.replace(
        'B = "tensor(1, B) + tensor(B, 1)"',
        'B = "tensor(1, B) + tensor(B, 1)"\nG = "tensor(1, G) + tensor(G, 1)"',
    )
    text = text.replace('deformation = "z"', 'deformation = "z"\ncentral = ["G"]')
    cat = load_catalog_text(text)
    ctx = cat.context("p1", order=2)
    assert ctx.bracket("G", "A").is_zero_at(2)


def test_stray_symbol_rejected():
    with pytest.raises(ValidationFailed, match="unknown symbols"):
        load_catalog_text(BASE.replace('"A,B" = "B"', '"A,B" = "B + Q"'))


def test_coproduct_cover_enforced():
    text = BASE.replace('A = "tensor(1, A) + tensor(A, 1)"\n', "")
    with pytest.raises(ValidationFailed, match="coproducts must cover"):
        load_catalog_text(text)


def test_duplicate_ids_rejected():
    with pytest.raises(ValidationFailed, match="duplicate entry id"):
        load_catalog_text(BASE + BASE)


def test_dangling_twist_reference_rejected():
    text = BASE + """
[[entries]]
id = "t1"
kind = "twist"
paper_label = "bb"
source_text = "A = A"

[entries.definition]
defines = "p1"
inside = "nowhere"

[entries.definition.images]
A = "A"
B = "B"
"""
    with pytest.raises(ValidationFailed, match="unknown entry 'nowhere'"):
        load_catalog_text(text)


def test_twist_image_cover_enforced():
    text = BASE + """
[[entries]]
id = "t1"
kind = "twist"
paper_label = "bb"
source_text = "A = A"

[entries.definition]
defines = "p1"
inside = "p1"

[entries.definition.images]
A = "A"
"""
    with pytest.raises(ValidationFailed, match="images must cover"):
        load_catalog_text(text)


def test_symmetry_table_cover_enforced():
    text = BASE + """
[[entries]]
id = "r1"
kind = "realization"
paper_label = "gd"
source_text = "A = x ; B = t"

[entries.definition]
algebra = "p1"

[entries.definition.operators]
A = "x"
B = "t"

[[entries]]
id = "c1"
kind = "casimir"
paper_label = "ge"
source_text = "E = B^2"

[entries.definition]
algebra = "p1"
element = "B^2"

[entries.definition.realized_by]
r1 = "t^2"

[[entries]]
id = "s1"
kind = "symmetry"
paper_label = "gg"
source_text = "E A - A E = 0"

[entries.definition]
realization = "r1"
casimir = "c1"

[entries.definition.table]
A = "0"
"""
    with pytest.raises(ValidationFailed, match="table must cover"):
        load_catalog_text(text)

"""Operator-layer checks, anchored to identities worked out by hand.

The forward difference lowers degree like a derivative: with Delta =
(Tx - 1)/sigma, Delta(x^2) = 2x + sigma and Delta(2x + sigma) = 2, so the
second difference of x^2 is the constant 2 at every step size.  For the
geometric-space dilation 2t dt + x(1 - Tx^-1)/sigma + 1/2, the pieces act
on x t as 2 + 1 + 1/2, hence 7/2 x t.  And with K = -t(Tx - 1)/sigma
- m x Tx^-1 and P = dx, only the x-part fails to commute:
[K, P] = -m (x Tx^-1 dx - (x dx + 1) Tx^-1) = m Tx^-1.

The seeded-corruption tests pin down the discrepancy protocol: one nudged
canonical coefficient must come back as exactly the reverse nudge, two
independent nudges must come back as a plain failure with no suggestion,
and the two application routes must agree either way.
"""

import copy
from dataclasses import replace as entry_replace
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistcheck.catalog import Catalog, load_catalog
from twistcheck.errors import (
    NotDivisible,
    UnknownEntry,
    UnknownGenerator,
    UnresolvedExponential,
    ValidationFailed,
)
from twistcheck.exprs import parse
from twistcheck.ncalg import commutator, substitute
from twistcheck.opalg import (
    DiffDiffOperator,
    apply_operator,
    casimir,
    check_continuum_limit,
    operator_of,
    realize,
    series_oracle,
    verify_casimir,
    verify_realization,
    verify_symmetry_table,
)


@pytest.fixture(scope="module")
def cat():
    return load_catalog()


def mutated(cat, entry_id, fn):
    entries = []
    for e in cat:
        if e.id == entry_id:
            d = copy.deepcopy(e.definition)
            fn(d)
            e = entry_replace(e, definition=d)
        entries.append(e)
    return Catalog(entries)


def by_name(checks):
    return {c.name.split(":", 1)[1]: c for c in checks}


# -- canonical form and composition -------------------------------------------------


def test_defining_relations():
    x, t = operator_of("x"), operator_of("t")
    dx, dt = operator_of("dx"), operator_of("dt")
    Tx, Tt = operator_of("Tx"), operator_of("Tt")
    assert commutator(dx, x) == operator_of("1")
    assert commutator(dt, t) == operator_of("1")
    assert commutator(Tx, x) == operator_of("sigma*Tx")
    assert commutator(Tt, t) == operator_of("tau*Tt")
    for a in (dx, Tx, x):
        for b in (dt, Tt, t):
            assert commutator(a, b).is_zero()
    assert commutator(dx, Tx).is_zero()
    assert commutator(dt, Tt).is_zero()


def test_equivalent_spellings_share_canonical_form():
    assert operator_of("((Tx - 1)/sigma)^2") == operator_of(
        "(Tx^2 - 2*Tx + 1)/sigma^2"
    )
    assert operator_of("Tx*x*Tx^-1") == operator_of("x + sigma")
    assert operator_of("dx^2*x - x*dx^2") == operator_of("2*dx")


def test_shift_powers_compose():
    Tx = operator_of("Tx")
    assert operator_of("Tx^3") * operator_of("Tx^-3") == operator_of("1")
    assert operator_of("Tx^-1") * operator_of("x") == operator_of(
        "(x - sigma)*Tx^-1"
    )
    assert Tx * Tx == operator_of("Tx^2")


def test_second_difference_of_x_squared_is_two():
    d2 = operator_of("((Tx - 1)/sigma)^2")
    for sigma in (F(1, 2), F(1, 3), F(3)):
        assert apply_operator(d2, {(2, 0): F(1)}, sigma=sigma) == {(0, 0): F(2)}
    # and degree three feels the step: Delta^2 x^3 = 6x + 6 sigma x ... at
    # sigma = 1/2 the exact value is 6x + 3.
    out = apply_operator(d2, {(3, 0): F(1)}, sigma=F(1, 2))
    assert out == {(1, 0): F(6), (0, 0): F(3)}


def test_dilation_action_on_xt(cat):
    imgs = realize(cat, "real_hf")
    out = apply_operator(imgs["cD"], {(1, 1): F(1)}, sigma=F(1, 3), m=F(5))
    assert out == {(1, 1): F(7, 2)}
    assert apply_operator(imgs["cP"], {(0, 0): F(1)}, sigma=F(1, 3)) == {}


def test_apply_requires_bound_parameters():
    with pytest.raises(ValueError, match="sigma"):
        apply_operator(operator_of("Tx"), {(1, 0): F(1)})
    with pytest.raises(ValueError, match="m"):
        apply_operator(operator_of("m*dx"), {(1, 0): F(1)})
    # a pure time operator never asks for sigma
    assert apply_operator(operator_of("t*dt"), {(0, 2): F(1)}, tau=F(1)) == {
        (0, 2): F(2)
    }


def test_gd_bracket_oracle(cat):
    imgs = realize(cat, "real_gd")
    assert commutator(imgs["K"], imgs["P"]) == operator_of("m*Tx^-1")


# -- expression evaluation ----------------------------------------------------------


def test_exponentials_realize_to_shifts():
    images = {"P": operator_of("dx"), "H": operator_of("dt")}
    assert operator_of("exp(-sigma*P)", images=images) == operator_of("Tx^-1")
    assert operator_of("exp(2*sigma*dx)") == operator_of("Tx^2")
    assert operator_of("exp(tau*H)", images=images) == operator_of("Tt")
    assert operator_of("exp(0)") == operator_of("1")


def test_unresolvable_exponentials_are_hard_errors():
    with pytest.raises(UnresolvedExponential):
        operator_of("exp(sigma*dx/2)")
    with pytest.raises(UnresolvedExponential):
        operator_of("exp(x)")
    with pytest.raises(UnresolvedExponential):
        # a finite-difference image has no shift exponential
        operator_of("exp(sigma*P)", images={"P": operator_of("(Tx - 1)/sigma")})
    with pytest.raises(UnresolvedExponential):
        operator_of("Tx^(1/2)")


def test_division_and_inverses():
    assert operator_of("(2*Tx)^-1") == operator_of("1/2*Tx^-1")
    assert operator_of("dx/sigma") * operator_of("sigma") == operator_of("dx")
    with pytest.raises(NotDivisible):
        operator_of("dx/(1 + sigma)")
    with pytest.raises(NotDivisible):
        operator_of("dx/x")
    with pytest.raises(NotDivisible):
        operator_of("(Tx + 1)^-1")
    with pytest.raises(NotDivisible):
        operator_of("x^-1")
    with pytest.raises(UnknownGenerator):
        operator_of("nabla")


def test_substitution_binds_parameters():
    op = operator_of("sigma/2*Tx + m*x")
    half = op.subs(sigma=F(1, 3))
    assert half == operator_of("1/6*Tx + m*x")
    assert half.subs(m=F(2)) == operator_of("1/6*Tx + 2*x")


def test_render_is_readable():
    op = operator_of("x*Tx^-1 - 1/2*sigma*dx^2")
    assert op.render() == "-1/2*sigma*dx^2 + x*Tx^-1"
    assert DiffDiffOperator.zero().render() == "0"


# -- shift expansion ----------------------------------------------------------------


def test_shift_expansion():
    Tx = operator_of("Tx")
    assert Tx.expand_shifts(2) == operator_of(
        "1 + sigma*dx + sigma^2/2*dx^2"
    )
    delta = operator_of("(Tx - 1)/sigma")
    assert delta.expand_shifts(1) == operator_of("dx + sigma/2*dx^2")
    assert delta.expand_shifts(2) == operator_of(
        "dx + sigma/2*dx^2 + sigma^2/6*dx^3"
    )


def test_shift_expansion_keeps_negative_degrees():
    # (Tx - 1)/sigma^2 leaves a 1/sigma tail that a continuum check must see
    op = operator_of("(Tx - 1)/sigma^2")
    low = op.expand_shifts(0)
    assert low == operator_of("dx/sigma + 1/2*dx^2")


# -- catalog suites -----------------------------------------------------------------


def test_realizations_verify_exactly(cat):
    for rid in sorted(cat.ids("realization")):
        checks = by_name(verify_realization(cat, rid))
        assert set(checks) == {"brackets", "samples", "monomial-actions"}
        bad = [c.name for c in checks.values() if not c.ok]
        assert not bad, (rid, bad, [checks[n].detail for n in checks])


def test_casimirs_verify_exactly(cat):
    for cid in sorted(cat.ids("casimir")):
        for c in verify_casimir(cat, cid):
            assert c.ok, (c.name, c.detail)


def test_realized_casimirs_are_screen_operators(cat):
    assert casimir(cat, "real_gd", "cas_ge") == operator_of(
        "((Tx - 1)/sigma)^2 - 2*m*dt"
    )
    assert casimir(cat, "real_ke", "cas_hg_kd") == operator_of(
        "dx^2 - 2*m*(Tt - 1)/tau"
    )
    assert casimir(cat, "real_classical", "cas_hg") == operator_of(
        "dx^2 - 2*m*dt"
    )


def test_casimir_realization_must_match_algebra(cat):
    with pytest.raises(ValidationFailed):
        casimir(cat, "real_gd", "cas_hg")


def test_entry_kinds_are_enforced(cat):
    with pytest.raises(UnknownEntry):
        verify_realization(cat, "cas_ge")
    with pytest.raises(UnknownEntry):
        verify_casimir(cat, "real_gd")


def test_symmetry_tables_hold(cat):
    for sid in sorted(cat.ids("symmetry")):
        for c in verify_symmetry_table(cat, sid):
            assert c.ok, (c.name, c.detail)


def test_continuum_limits_recover_vector_fields(cat):
    for rid in sorted(cat.ids("realization")):
        if rid == "real_classical":
            continue
        (check,) = check_continuum_limit(cat, rid)
        assert check.ok, check.detail


def test_continuum_limit_of_boost(cat):
    imgs = realize(cat, "real_gd")
    assert imgs["K"].expand_shifts(0) == operator_of("-t*dx - m*x")
    assert imgs["C"].expand_shifts(0) == operator_of(
        "t^2*dt + t*x*dx + 1/2*m*x^2 + 1/2*t"
    )


def test_series_oracle_agrees_with_word_realization(cat):
    for rid in ("real_gd", "real_jd"):
        (check,) = series_oracle(cat, rid)
        assert check.ok, check.detail


def test_cross_basis_products_agree(cat):
    # normal-order a cubic word in the twisted basis, then push it through
    # the basis change; the result must match the product of the mapped
    # factors, reordered entirely on the other side.
    src = cat.context("sl2_twist_bf", 3)
    dst = cat.context("uz_sl2_ba", 3)
    entry = cat.get("map_bh")
    images = {
        g: dst.parse(parse(text, macros=entry.definition.get("macros")))
        for g, text in entry.definition["images"].items()
    }
    word = src.gen("cJm") * src.gen("cJ3") * src.gen("cJp")
    direct = substitute(word, images, dst)
    factors = images["cJm"] * images["cJ3"] * images["cJp"]
    assert direct.eq_at(factors, 3)


# -- the discrepancy protocol -------------------------------------------------------


def nudge_C(d):
    d["operators"]["C"] = d["operators"]["C"].replace(
        "1/2*m*x^2*Tx^-1", "1/3*m*x^2*Tx^-1"
    )


def test_single_bad_coefficient_is_diagnosed(cat):
    checks = by_name(verify_realization(mutated(cat, "real_gd", nudge_C), "real_gd"))
    brackets = checks["brackets"]
    assert not brackets.ok
    assert brackets.status == "erratum-suspected"
    assert "1/3 -> 1/2" in brackets.erratum
    assert "not applied" in brackets.erratum
    assert "[D,C]" in brackets.detail
    assert not checks["samples"].ok
    # the two application routes agree even on the broken identity
    assert checks["monomial-actions"].ok


def test_unrepairable_corruption_gets_no_suggestion(cat):
    def two_nudges(d):
        nudge_C(d)
        d["operators"]["C"] = d["operators"]["C"].replace(
            "t^2*dt*Tx", "2*t^2*dt*Tx"
        )

    checks = by_name(
        verify_realization(mutated(cat, "real_gd", two_nudges), "real_gd")
    )
    assert not checks["brackets"].ok
    assert checks["brackets"].status == "fail"
    assert checks["brackets"].erratum == ""


def test_symmetry_table_suggestions(cat):
    bad = mutated(cat, "sym_gg", lambda d: d["table"].__setitem__("D", "3"))
    checks = by_name(verify_symmetry_table(bad, "sym_gg"))
    assert checks["table"].status == "erratum-suspected"
    assert "3 -> 2" in checks["table"].erratum
    assert checks["monomial-actions"].ok


def test_broken_continuum_limit_is_reported(cat):
    bad = mutated(
        cat,
        "real_hf",
        lambda d: d["operators"].__setitem__("cD", "dx/sigma"),
    )
    (check,) = check_continuum_limit(bad, "real_hf")
    assert not check.ok
    assert "parameter degree survives" in check.detail


# -- properties ---------------------------------------------------------------------

rationals = st.builds(F, st.integers(-9, 9), st.integers(1, 9))

keys = st.tuples(
    st.integers(0, 2),
    st.integers(0, 2),
    st.integers(-1, 1),
    st.integers(-1, 1),
    st.integers(0, 1),
    st.integers(0, 1),
    st.integers(-1, 1),
    st.integers(-1, 1),
    st.integers(0, 1),
)

operators = st.dictionaries(keys, rationals, min_size=1, max_size=3).map(
    DiffDiffOperator
)

polys = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2)), rationals, max_size=3
)


@settings(max_examples=60, deadline=None)
@given(operators, operators, operators)
def test_multiplication_is_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@settings(max_examples=60, deadline=None)
@given(operators, operators, polys)
def test_application_respects_composition(a, b, f):
    kw = dict(sigma=F(1, 2), tau=F(1, 3), m=F(2))
    assert apply_operator(a * b, f, **kw) == apply_operator(
        a, apply_operator(b, f, **kw), **kw
    )


@settings(max_examples=40, deadline=None)
@given(operators, operators, st.integers(0, 2))
def test_shift_expansion_is_multiplicative(a, b, n):
    # each factor expanded with headroom for the other's lowest degree
    full = (a.expand_shifts(n + 2) * b.expand_shifts(n + 2)).terms
    filtered = DiffDiffOperator(
        {k: c for k, c in full.items() if k[6] + k[7] <= n}
    )
    assert (a * b).expand_shifts(n) == filtered


@settings(max_examples=40, deadline=None)
@given(operators, polys)
def test_binding_commutes_with_application(op, f):
    kw = dict(sigma=F(1, 2), tau=F(1, 3), m=F(2))
    assert apply_operator(op.subs(**kw), f, **kw) == apply_operator(op, f, **kw)

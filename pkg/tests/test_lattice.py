"""Lattice checks, anchored to eigenvalues worked out by hand.

At the defaults sigma = 1/10, k = 1, m = 1/2 the space-geometric family
has Tx eigenvalue 1 + sigma k = 11/10 and dt eigenvalue k^2/(2m) = 1, so
the screen operator gives ((11/10 - 1)/(1/10))^2 - 2 (1/2) 1 = 1 - 1 = 0
exactly.  On an eight-site ring the circulant symbol of the forward
difference squared is lambda_n = ((omega^n - 1)/sigma)^2 / (2m) with
omega = e^(2 pi i/8): mode n = 1 has Re lambda < 0 and decays, while the
alternating mode n = 4 has lambda = (-2/sigma)^2/(2m) = +400 and must
trip the overflow guard rather than return garbage.

For the time stepping, one step on x^2 adds (tau/2m) d_x^2 x^2 =
(1/10) * 2 = 1/5, an exact Fraction the output must reproduce.
"""

import copy
import io
from dataclasses import replace as entry_replace
from fractions import Fraction as F
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistcheck.catalog import Catalog, load_catalog
from twistcheck.errors import InstabilityDetected, MissingDerivative, UnknownEntry
from twistcheck.lattice import (
    DEFAULT_GRID,
    GridSpec,
    SolutionFamily,
    apply_symmetry_numeric,
    evolve,
    export_csv,
    lattice_suite,
    residual,
    symmetry_residual,
)
from twistcheck.opalg import operator_of, realize


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


SCREENS = {
    "screen_ac": "both_geometric",
    "screen_gf": "space_geometric",
    "screen_hi": "space_geometric",
    "screen_jf": "time_geometric",
    "screen_kf": "time_geometric",
}


# -- grids and families --------------------------------------------------------------


def test_grid_points_are_rational():
    g = GridSpec(x0=F(1, 3))
    assert g.x(4) == F(1, 3) + F(4, 10)
    assert g.t(0) == 0
    assert isinstance(g.x(1), F)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(nx=0)
    with pytest.raises(ValueError):
        GridSpec(sigma=F(-1, 10))


def test_family_validation():
    with pytest.raises(ValueError):
        SolutionFamily("spherical")
    with pytest.raises(ValueError):
        SolutionFamily("space_geometric", m=F(0))


def test_constant_family_value():
    fam = SolutionFamily("both_geometric", k=F(0))
    assert fam.value(F(1, 2), F(3), DEFAULT_GRID) == 1.0


def test_space_family_lattice_values():
    # (1 + sigma k)^(x/sigma) at x = i sigma is (11/10)^i on the dot
    fam = SolutionFamily("space_geometric")
    g = DEFAULT_GRID
    assert fam.value(g.x(3), F(0), g) == pytest.approx(1.1**3, abs=1e-15)


# -- solving the screens ---------------------------------------------------------------


@pytest.mark.parametrize("sid", sorted(SCREENS))
def test_family_solves_screen_exactly(cat, sid):
    fam = SolutionFamily(SCREENS[sid])
    r = residual(cat, sid, fam)
    assert r == 0 and isinstance(r, F)


@pytest.mark.parametrize("sid", sorted(SCREENS))
def test_float_backend_agrees(cat, sid):
    fam = SolutionFamily(SCREENS[sid])
    assert abs(residual(cat, sid, fam, mode="float")) <= 1e-12


@pytest.mark.parametrize("sid", ["screen_hi", "screen_kf"])
def test_constant_solves(cat, sid):
    fam = SolutionFamily(SCREENS[sid], k=F(0))
    assert residual(cat, sid, fam) == 0


def test_translation_leaves_zero_residual(cat):
    fam = SolutionFamily("space_geometric")
    for g in (
        GridSpec(x0=F(1, 10)),
        GridSpec(t0=F(1, 10)),
        GridSpec(x0=F(-7, 10), t0=F(3, 2)),
    ):
        assert residual(cat, "screen_hi", fam, g) == 0


def test_wrong_family_fails(cat):
    # the space family is no solution of the time-lattice equation; the
    # certificate refuses and the magnitude comes back as a float
    r = residual(cat, "screen_kf", SolutionFamily("space_geometric"))
    assert isinstance(r, float) and r > 1e-3


def test_continuous_space_grid(cat):
    # sigma = 0 degenerates the x-factor to e^(kx); the time screen
    # still certifies exactly
    g = GridSpec(sigma=F(0), nx=4, nt=4)
    assert residual(cat, "screen_kf", SolutionFamily("time_geometric"), g) == 0


def test_kind_enforced(cat):
    with pytest.raises(UnknownEntry):
        residual(cat, "real_gd", SolutionFamily("space_geometric"))


# -- symmetries ------------------------------------------------------------------------


REALIZED = {
    "screen_gf": "real_gd",
    "screen_hi": "real_hf",
    "screen_jf": "real_jd",
    "screen_kf": "real_ke",
}


@pytest.mark.parametrize("sid", sorted(REALIZED))
def test_symmetries_map_solutions_to_solutions(cat, sid):
    fam = SolutionFamily(SCREENS[sid])
    for g, img in sorted(realize(cat, REALIZED[sid]).items()):
        exact = symmetry_residual(cat, sid, img, fam)
        assert exact == 0 and isinstance(exact, F), g
        assert abs(symmetry_residual(cat, sid, img, fam, mode="float")) <= 1e-10, g


def test_zero_operator_is_a_symmetry(cat):
    fam = SolutionFamily("space_geometric")
    assert symmetry_residual(cat, "screen_hi", operator_of("0"), fam) == 0


def test_multiplication_by_x_is_not_a_symmetry(cat):
    fam = SolutionFamily("space_geometric")
    r = symmetry_residual(cat, "screen_hi", operator_of("x"), fam)
    assert isinstance(r, float) and r > 1e-3


# -- grid-sample inputs ------------------------------------------------------------------


def test_constant_samples_solve_shift_only_screen(cat):
    g = GridSpec(nx=4, nt=3)
    assert residual(cat, "screen_ac", np.ones((4, 3)), g) == 0

    exact = np.empty((4, 3), dtype=object)
    exact[:] = F(1)
    r = residual(cat, "screen_ac", exact, g)
    assert r == 0 and isinstance(r, F)


def test_samples_have_no_derivatives(cat):
    g = GridSpec(nx=4, nt=3)
    with pytest.raises(MissingDerivative):
        residual(cat, "screen_hi", np.ones((4, 3)), g)


def test_samples_shape_checked(cat):
    with pytest.raises(ValueError):
        residual(cat, "screen_ac", np.ones((2, 2)), GridSpec(nx=4, nt=3))


def test_apply_symmetry_on_samples_wraps(cat):
    g = GridSpec(nx=4, nt=3)
    arr = np.arange(12, dtype=float).reshape(4, 3)
    out = apply_symmetry_numeric(operator_of("Tx"), arr, g)
    assert np.array_equal(out, np.roll(arr, -1, axis=0))


def test_apply_symmetry_on_family_matches_eigenvalue(cat):
    # (x Tx) phi = x (1 + sigma k) phi on the geometric lattice
    fam = SolutionFamily("space_geometric")
    g = GridSpec(nx=4, nt=3)
    out = apply_symmetry_numeric(operator_of("x*Tx"), fam, g)
    for i in range(4):
        for j in range(3):
            x, t = g.x(i), g.t(j)
            want = float(x) * 1.1 * fam.value(x, t, g)
            assert out[i, j] == pytest.approx(want, abs=1e-14)


# -- evolution ---------------------------------------------------------------------------


def test_single_ring_mode_follows_circulant_eigenvalue(cat):
    ring = GridSpec(nx=8, nt=6)
    mode = np.exp(2j * np.pi * np.arange(8) / 8)
    out = evolve(cat, "screen_hi", mode, ring, steps=5)
    lam = ((np.exp(2j * np.pi / 8) - 1) / 0.1) ** 2 / 1.0
    for j in range(6):
        want = mode * np.exp(lam * j * 0.1)
        assert np.max(np.abs(out[:, j] - want)) <= 1e-12


def test_evolve_zero_and_constant_data(cat):
    ring = GridSpec(nx=8, nt=6)
    assert not evolve(cat, "screen_hi", np.zeros(8), ring, steps=5).any()
    # lambda_0 = 0: constants are stationary
    flat = evolve(cat, "screen_hi", np.ones(8), ring, steps=5)
    assert np.max(np.abs(flat - 1)) <= 1e-14
    assert not np.iscomplexobj(flat)


def test_alternating_mode_trips_the_guard(cat):
    ring = GridSpec(nx=8, nt=6)
    with pytest.raises(InstabilityDetected):
        evolve(cat, "screen_hi", np.array([1.0, -1.0] * 4), ring, steps=8)


def test_time_step_on_x_squared_is_exact(cat):
    # x^2 -> x^2 + 1/5 after one step at tau = 1/10, m = 1/2
    g = GridSpec(nx=3, nt=2)
    out = evolve(cat, "screen_kf", [F(0), F(0), F(1)], g, steps=1)
    assert out[0, 1] == 0.2
    assert out[2, 1] == float(F(1, 5) ** 2 + F(1, 5))


def test_time_stepping_tracks_the_family(cat):
    fine = GridSpec(tau=F(1, 100), nx=8, nt=6)
    coeffs = [F(1) / factorial(n) for n in range(13)]
    out = evolve(cat, "screen_kf", coeffs, fine, steps=5)
    fam = SolutionFamily("time_geometric")
    worst = max(
        abs(out[i, j] - fam.value(fine.x(i), fine.t(j), fine))
        for i in range(8)
        for j in range(6)
    )
    assert worst <= 1e-8


def test_evolve_rejects_mismatched_input(cat):
    ring = GridSpec(nx=8, nt=6)
    with pytest.raises(ValueError):
        evolve(cat, "screen_hi", np.ones(5), ring)
    with pytest.raises(ValueError):
        evolve(cat, "screen_ac", np.ones(8), ring)
    with pytest.raises(ValueError):
        evolve(cat, "screen_hi", np.ones(8), GridSpec(sigma=F(0), nx=8))


def test_export_csv_round_trip(cat):
    g = GridSpec(nx=2, nt=2)
    buf = io.StringIO()
    export_csv(np.array([[1.0, 2.0], [3.0, 4.0]]), g, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "x,t,value"
    assert len(lines) == 5
    assert [float(v) for v in lines[2].split(",")] == [0.0, 0.1, 2.0]


# -- the suite ---------------------------------------------------------------------------


def test_suite_is_green(cat):
    checks = lattice_suite(cat)
    assert all(c.ok for c in checks), [c.name for c in checks if not c.ok]
    names = {c.name for c in checks}
    assert {f"{sid}:solves" for sid in SCREENS} <= names
    assert {f"{sid}:symmetries" for sid in REALIZED} <= names
    assert {f"{sid}:evolution" for sid in REALIZED} <= names


def test_suite_flags_a_corrupted_screen(cat):
    bad = mutated(
        cat,
        "screen_hi",
        lambda d: d.update(operator="((Tx - 1)/sigma)^2 - 3*m*dt"),
    )
    got = {c.name: c for c in lattice_suite(bad)}
    assert not got["screen_hi:solves"].ok
    assert got["screen_gf:solves"].ok


# -- properties --------------------------------------------------------------------------


rational_k = st.builds(
    F, st.integers(min_value=-4, max_value=4), st.integers(min_value=1, max_value=5)
)
positive_m = st.builds(
    F, st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=4)
)
origins = st.builds(
    F, st.integers(min_value=-8, max_value=8), st.integers(min_value=1, max_value=6)
)


@settings(max_examples=40, deadline=None)
@given(k=rational_k, m=positive_m, x0=origins, t0=origins)
def test_residual_is_zero_for_every_family_member(cat, k, m, x0, t0):
    g = GridSpec(x0=x0, t0=t0, nx=5, nt=5)
    for sid, family in SCREENS.items():
        fam = SolutionFamily(family, k=k, m=m)
        assert residual(cat, sid, fam, g) == 0, sid


@settings(max_examples=25, deadline=None)
@given(k=rational_k, m=positive_m)
def test_symmetry_residual_is_zero_on_random_members(cat, k, m):
    g = GridSpec(nx=4, nt=4)
    fam = SolutionFamily("time_geometric", k=k, m=m)
    for gen, img in realize(cat, "real_ke").items():
        assert symmetry_residual(cat, "screen_kf", img, fam, g) == 0, gen

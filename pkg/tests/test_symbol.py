import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levyspec import (
    AtomMeasure,
    BadParameter,
    BernsteinFunction,
    DiffusionMatrix,
    LevyTriplet,
    RadialDensity,
    StableIsotropic,
    ZeroMeasure,
    closed_form_preset,
    eval_symbol,
    quadrature_symbol,
    sup_symbol,
    symmetrize_atoms,
)
from levyspec.errors import DivergentMeasure
from levyspec.symbol import custom_symbol, maximize_symbol, negative_definiteness_check

from conftest import paired_atoms


def stable_constant_1d(alpha):
    """2 int_0^inf (1 - cos r) r^{-1-alpha} dr in closed form (mpmath Gamma)."""
    if alpha == 1.0:
        return math.pi
    return float(2 * mpmath.gamma(1 - alpha) * mpmath.cos(mpmath.pi * alpha / 2) / alpha)


def test_closed_form_examples():
    lap = closed_form_preset("laplacian", d=2)
    assert eval_symbol(lap, [1.0, 1.0]) == 2.0
    rel = closed_form_preset("relativistic", d=2, b=1.0)
    assert eval_symbol(rel, [1.0, math.sqrt(2.0)]) == pytest.approx(1.0, abs=1e-15)
    bern = closed_form_preset("bernstein", d=1, f=BernsteinFunction.power(0.5))
    assert eval_symbol(bern, 3.0) == pytest.approx(3.0, abs=1e-15)


@pytest.mark.parametrize("kw", [{"alpha": 2.5}, {"alpha": 0.0}])
def test_fractional_rejects_bad_index(kw):
    with pytest.raises(BadParameter):
        closed_form_preset("fractional", **kw)


def test_relativistic_rejects_nonpositive_mass():
    with pytest.raises(BadParameter):
        closed_form_preset("relativistic", b=0.0)


def test_atoms_at_pi_hand_sum():
    s = quadrature_symbol(LevyTriplet.pure_jump(paired_atoms(2.0)))
    # (alpha/2)(1 - cos u) summed by hand over the two atoms
    assert eval_symbol(s, math.pi) == 0.5 * (1 - math.cos(math.pi)) * 2
    u = np.linspace(-7, 7, 29)
    assert np.allclose(s(u), 1 - np.cos(u), rtol=0, atol=1e-15)


def test_gaussian_quadrature_symbol():
    s = quadrature_symbol(LevyTriplet(DiffusionMatrix.identity(2), ZeroMeasure(2)))
    assert eval_symbol(s, [2.0, 0.0]) == 4.0


def test_zero_frequency_is_zero():
    for s in [closed_form_preset("laplacian"), closed_form_preset("fractional", alpha=0.7),
              closed_form_preset("relativistic", b=2.0)]:
        assert eval_symbol(s, 0.0) == 0.0
    q = quadrature_symbol(LevyTriplet.pure_jump(StableIsotropic(1.3)))
    assert abs(eval_symbol(q, 0.0)) <= q.quad_tol


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_stable_quadrature_matches_mpmath(alpha):
    s = quadrature_symbol(LevyTriplet.pure_jump(StableIsotropic(alpha)))
    C = stable_constant_1d(alpha)
    for u in (0.5, 1.0, 3.0):
        assert eval_symbol(s, u) == pytest.approx(C * u ** alpha, rel=1e-7)


def test_stable_homogeneity_ratios():
    s = quadrature_symbol(LevyTriplet.pure_jump(StableIsotropic(1.0)))
    base = eval_symbol(s, 1.0)
    for u in (0.5, 2.0, 4.0, 8.0):
        assert eval_symbol(s, u) / base == pytest.approx(u, rel=1e-6)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_stable_in_the_plane_matches_bessel_moment(alpha):
    # eta(u) = 2 pi |u|^alpha int_0^inf (1 - J0(r)) r^{-1-alpha} dr, and the
    # Bessel moment equals Gamma(1 - alpha/2) / (alpha 2^alpha Gamma(1 + alpha/2))
    moment = mpmath.gamma(1 - alpha / 2) / (alpha * 2 ** alpha * mpmath.gamma(1 + alpha / 2))
    s = quadrature_symbol(LevyTriplet.pure_jump(StableIsotropic(alpha, d=2)))
    got = s.values(np.array([[0.6, 0.8], [0.0, 2.0]]))
    want = 2 * math.pi * float(moment) * np.array([1.0, 2.0 ** alpha])
    assert got == pytest.approx(want, rel=1e-7)


def test_exponential_density_symbol():
    # 2 int_0^inf (1 - cos(u r)) e^{-r} dr = 2 u^2 / (1 + u^2)
    nu = RadialDensity(lambda r: np.exp(-r), singularity=-1.0)
    s = quadrature_symbol(LevyTriplet.pure_jump(nu))
    u = np.array([0.3, 1.0, 5.0, 20.0])
    assert s(u) == pytest.approx(2 * u ** 2 / (1 + u ** 2), abs=1e-8)
    assert s.sup_info.kind == "unknown"


def test_divergent_measure_rejected():
    nu = RadialDensity(lambda r: r ** -3.5, singularity=2.5)
    with pytest.raises(DivergentMeasure):
        quadrature_symbol(LevyTriplet.pure_jump(nu))


def test_quadrature_matches_closed_form_on_grid():
    nu = symmetrize_atoms([(1.0, 0.7), (2.5, 0.4)])
    q = quadrature_symbol(LevyTriplet.pure_jump(nu))
    c = closed_form_preset("compound_poisson", atoms=nu)
    u = np.linspace(-10, 10, 101)
    denom = np.maximum(np.abs(c(u)), 1e-300)
    assert np.max(np.abs(q(u) - c(u)) / denom * (c(u) > 0)) <= 1e-8
    g = quadrature_symbol(LevyTriplet.gaussian([[0.5]]))
    assert np.allclose(g(u), 0.5 * u ** 2, rtol=1e-12)


def test_sup_of_paired_atoms():
    s = closed_form_preset("compound_poisson", atoms=paired_atoms(2.0))
    sup = sup_symbol(s)
    assert sup.is_finite and abs(sup.value - 2.0) <= 1e-9
    assert sup_symbol(closed_form_preset("laplacian")).is_infinite


def test_incommensurate_sup_is_strictly_below_two_m():
    nu = symmetrize_atoms([(1.0, 1.0), (math.sqrt(2.0), 1.0)])
    s = closed_form_preset("compound_poisson", atoms=nu)
    sup = sup_symbol(s)
    # oracle: 10^6-point dense evaluation over the same box
    u = np.linspace(-8 * math.pi, 8 * math.pi, 1_000_001)
    dense = float(np.max(s(u)))
    assert sup.value < 2 * nu.mass
    assert sup.value >= dense - 1e-9


def test_maximizer_finds_interior_peak():
    s = closed_form_preset("compound_poisson", atoms=paired_atoms(2.0))
    K, u_star, _ = maximize_symbol(s)
    assert abs(K - 2.0) <= 1e-12
    assert abs(abs(u_star[0]) % (2 * math.pi) - math.pi) <= 1e-6


def test_negative_definiteness_examples():
    rng = np.random.default_rng(3)
    lap = closed_form_preset("laplacian", d=2)
    assert negative_definiteness_check(lap, rng.standard_normal((20, 2)))
    cp = closed_form_preset("compound_poisson", atoms=symmetrize_atoms([(1.0, 1.0), (2.7, 0.3)]))
    assert negative_definiteness_check(cp, rng.uniform(-5, 5, 16))
    quartic = custom_symbol(lambda p: np.sum(p * p, axis=1) ** 2)
    # matrix [[2, 16], [16, 32]] has determinant 64 - 256 < 0
    assert not negative_definiteness_check(quartic, np.array([1.0, 2.0]))
    with pytest.raises(BadParameter):
        negative_definiteness_check(lap, np.zeros((65, 2)))


def test_bernstein_table_interpolates_without_extrapolating():
    s = np.linspace(0, 4, 9)
    f = BernsteinFunction.from_table(s, np.sqrt(s))
    assert f(2.25) == pytest.approx(1.5, abs=1e-2)
    with pytest.raises(BadParameter):
        f(10.0)


PRESETS = [
    closed_form_preset("laplacian", d=2),
    closed_form_preset("fractional", d=2, alpha=0.8),
    closed_form_preset("relativistic", d=2, b=0.5),
    closed_form_preset("bernstein", d=2, f=BernsteinFunction.power(0.3)),
    closed_form_preset("compound_poisson", atoms=AtomMeasure(
        [[1.0, 0.0], [-1.0, 0.0], [0.5, 2.0], [-0.5, -2.0]], [0.5, 0.5, 0.2, 0.2])),
]
vec = st.tuples(st.floats(-20, 20), st.floats(-20, 20)).map(np.array)


@pytest.mark.parametrize("s", PRESETS, ids=lambda s: s.name)
@given(u=vec, v=vec)
def test_symmetry_and_sqrt_subadditivity(s, u, v):
    a, b, c = eval_symbol(s, u), eval_symbol(s, v), eval_symbol(s, u + v)
    assert eval_symbol(s, -u) == pytest.approx(a, rel=1e-12, abs=1e-300)
    assert math.sqrt(c) <= math.sqrt(a) + math.sqrt(b) + 1e-9


@given(st.lists(st.tuples(st.floats(0.1, 10), st.floats(0.01, 5)), min_size=1, max_size=5),
       st.floats(-50, 50))
def test_finite_measure_symbol_bounded_by_twice_mass(atoms, u):
    nu = symmetrize_atoms(atoms)
    s = quadrature_symbol(LevyTriplet.pure_jump(nu))
    assert eval_symbol(s, u) <= 2 * nu.mass + 1e-12


@given(st.lists(st.tuples(st.floats(0.1, 10), st.floats(0.01, 5)), min_size=1, max_size=5))
def test_sup_never_exceeds_twice_mass(atoms):
    nu = symmetrize_atoms(atoms)
    sup = sup_symbol(closed_form_preset("compound_poisson", atoms=nu), grid_n=2048)
    assert sup.is_finite and sup.value <= 2 * nu.mass + 1e-12

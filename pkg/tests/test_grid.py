import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levyspec import (
    BadParameter,
    GeneratorSpec,
    GridFunction,
    PeriodicGrid,
    closed_form_preset,
    forward_transform,
    frequency_lattice,
    inverse_transform,
    sample,
)
from levyspec.grid import FREQUENCY, hermitian_defect, trig_interpolate, trig_interpolate_shifted
from levyspec.operators import apply_semigroup


def test_grid_rejects_bad_sizes():
    for n in (6, 12, 4):
        with pytest.raises(BadParameter):
            PeriodicGrid(1, n, 1.0)
    with pytest.raises(BadParameter):
        PeriodicGrid(3, 8, 1.0)
    with pytest.raises(BadParameter):
        PeriodicGrid(1, 8, -1.0)


def test_constant_concentrates_at_zero_frequency():
    for d in (1, 2):
        g = PeriodicGrid(d, 16, 10.0)
        F = forward_transform(sample(g, lambda *x: 1.0))
        centre = (g.n // 2,) * d
        assert F.values[centre] == pytest.approx(g.L ** d / (2 * math.pi) ** (d / 2), rel=1e-14)
        rest = F.values.copy()
        rest[centre] = 0
        assert np.max(np.abs(rest)) < 1e-12


def test_pure_wave_hits_single_coefficient():
    g = PeriodicGrid(1, 32, 7.0)
    k0 = 5
    F = forward_transform(sample(g, lambda x: np.exp(2j * math.pi * k0 * x / g.L)))
    slot = k0 + g.n // 2
    mask = np.ones(g.n, bool)
    mask[slot] = False
    assert abs(F.values[slot]) > 1
    assert np.max(np.abs(F.values[mask])) < 1e-12


def test_gaussian_transform_matches_closed_form():
    g = PeriodicGrid(1, 512, 40.0)
    F = forward_transform(sample(g, lambda x: np.exp(-x ** 2 / 2)))
    y = g.frequency_axis()
    band = np.abs(y) <= 4
    assert np.max(np.abs(F.values[band] - np.exp(-y[band] ** 2 / 2))) <= 1e-10


def test_inverse_examples():
    g = PeriodicGrid(1, 64, 5.0)
    rng = np.random.default_rng(1)
    f = GridFunction(g, rng.standard_normal(64))
    back = inverse_transform(forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) <= 1e-13 * np.max(np.abs(f.values))
    spike = np.zeros(64, complex)
    spike[g.n // 2 + 3] = 1.0
    wave = inverse_transform(GridFunction(g, spike, FREQUENCY)).values
    assert np.allclose(np.abs(wave), abs(wave[0]))
    zero = inverse_transform(GridFunction(g, np.zeros(64, complex), FREQUENCY))
    assert not np.any(zero.values)


def test_frequency_lattice_examples():
    assert np.allclose(frequency_lattice(PeriodicGrid(1, 8, 2 * math.pi))[:, 0], np.arange(-4, 4))
    assert np.allclose(frequency_lattice(PeriodicGrid(1, 8, 4 * math.pi))[:, 0],
                       np.arange(-4, 4) / 2)
    lat = frequency_lattice(PeriodicGrid(2, 8, 2 * math.pi))
    assert lat.shape == (64, 2)
    assert tuple(lat[1]) == (-4.0, -3.0)  # second axis varies fastest


def test_sample_examples():
    g = PeriodicGrid(1, 16, 4.0)
    assert not np.any(sample(g, lambda x: 0.0).values)
    assert sample(g, lambda x: (x < 0).astype(float)).values.sum() == 8
    gauss = sample(g, lambda x: np.exp(-x ** 2)).values
    assert gauss[g.n // 2] == 1.0
    assert np.allclose(gauss[1:], gauss[1:][::-1])


def test_csv_round_trip_is_exact():
    g = PeriodicGrid(2, 8, 3.3)
    rng = np.random.default_rng(2)
    f = GridFunction(g, rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    back = GridFunction.from_csv(f.to_csv())
    assert back.grid == g and np.array_equal(back.values, f.values)


def test_trig_interpolation_reproduces_nodes_and_waves():
    g = PeriodicGrid(1, 32, 2 * math.pi)
    f = sample(g, lambda x: np.cos(3 * x) + 0.5 * np.sin(x))
    x = np.array([[0.1], [1.234], [-3.0], [10.0]])
    assert np.allclose(trig_interpolate(f, x), np.cos(3 * x[:, 0]) + 0.5 * np.sin(x[:, 0]),
                       atol=1e-12)
    shifted = trig_interpolate_shifted(f, x, np.array([[0.0], [0.5]]))
    assert np.allclose(shifted[:, 1], trig_interpolate(f, x + 0.5), atol=1e-12)


@given(st.integers(1, 2), st.sampled_from([8, 16, 32]), st.floats(0.5, 100),
       st.integers(0, 2 ** 31 - 1))
def test_parseval_and_round_trip(d, n, L, seed):
    g = PeriodicGrid(d, n, L)
    rng = np.random.default_rng(seed)
    f = GridFunction(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    F = forward_transform(f)
    lhs = g.h ** d * np.sum(np.abs(f.values) ** 2)
    rhs = (2 * math.pi / L) ** d * np.sum(np.abs(F.values) ** 2)
    assert rhs == pytest.approx(lhs, rel=1e-12)
    assert f.l2_norm() == pytest.approx(F.l2_norm(), rel=1e-12)
    back = inverse_transform(F)
    assert np.max(np.abs(back.values - f.values)) <= 1e-13 * np.max(np.abs(f.values)) * n


@given(st.integers(1, 2), st.integers(0, 2 ** 31 - 1), st.floats(0.01, 3))
def test_even_multiplier_keeps_real_data_real(d, seed, t):
    g = PeriodicGrid(d, 16, 9.0)
    rng = np.random.default_rng(seed)
    f = GridFunction(g, rng.standard_normal(g.shape))
    assert hermitian_defect(forward_transform(f)) <= 1e-12 * max(1, f.l2_norm())
    G = GeneratorSpec(closed_form_preset("fractional", d=d, alpha=1.3), g)
    F = forward_transform(f)
    out = inverse_transform(GridFunction(g, np.exp(-t * G.multiplier) * F.values, FREQUENCY))
    assert np.max(np.abs(out.values.imag)) <= 1e-12 * np.max(np.abs(f.values))
    assert apply_semigroup(G, t, f).is_real

import math

import numpy as np
import pytest

from levyspec import (
    BadParameter,
    BernsteinFunction,
    DiffusionMatrix,
    GeneratorSpec,
    LevyTriplet,
    PeriodicGrid,
    RadialDensity,
    SamplerSpec,
    closed_form_preset,
    empirical_characteristic_function,
    sample,
    sample_increments,
    verify_characteristic_function,
    verify_semigroup_mc,
)
from levyspec.errors import MismatchedModel, UnsupportedMeasure
from levyspec.montecarlo import MCReport

from conftest import paired_atoms

N = 100_000


def specs(t=1.0, n=N, seed=0):
    return {
        "brownian": SamplerSpec.brownian([[1.0]], t=t, N=n, seed=seed),
        "compound_poisson": SamplerSpec.compound_poisson(paired_atoms(2.0), t=t, N=n, seed=seed),
        "stable": SamplerSpec.stable(1.3, d=1, t=t, N=n, seed=seed),
        "subordinated": SamplerSpec.subordinated(BernsteinFunction.power(0.4), d=2, t=t, N=n,
                                                 seed=seed),
        "triplet": SamplerSpec.from_triplet(
            LevyTriplet(DiffusionMatrix([[0.2]]), paired_atoms(1.0)), t=t, N=n, seed=seed),
    }


def test_poisson_jump_counts():
    X, counts = sample_increments(SamplerSpec.compound_poisson(paired_atoms(2.0), N=N, seed=4),
                                  return_jump_counts=True)
    assert abs(counts.mean() - 1.0) <= 3 * math.sqrt(1.0 / N)
    assert abs(counts.var() - 1.0) <= 0.05
    # positions have the parity of the jump count for atoms at +-1
    assert np.all((X[:, 0] - counts) % 2 == 0)


def test_brownian_variance_is_two_a_t():
    X = sample_increments(SamplerSpec.brownian([[1.0]], N=N, seed=1))
    # Var of the sample variance of N(0, 2) is 2 * 2^2 / N
    assert abs(X.var() - 2.0) <= 3 * math.sqrt(8.0 / N)


@pytest.mark.parametrize("variant", sorted(specs()))
def test_samples_are_centred_and_symmetric(variant):
    spec = specs(n=20_000)[variant]
    X = sample_increments(spec)
    # sign of the first coordinate is fair under symmetry
    frac = np.mean(X[:, 0] > 0) + 0.5 * np.mean(X[:, 0] == 0)
    assert abs(frac - 0.5) <= 3 * 0.5 / math.sqrt(X.shape[0])
    if variant != "stable":
        assert np.all(np.abs(X.mean(axis=0)) <= 3 * X.std(axis=0) / math.sqrt(X.shape[0]))
    # quantiles of |X| against those of |-X| drawn with another seed
    Y = -sample_increments(SamplerSpec(spec.variant, spec.params, spec.d, spec.t, spec.N, 99))
    q = [0.25, 0.5, 0.75]
    a = np.quantile(np.abs(X[:, 0]), q)
    b = np.quantile(np.abs(Y[:, 0]), q)
    assert np.allclose(a, b, rtol=0.05, atol=0.05)


def test_seeded_sampling_is_deterministic(monkeypatch):
    spec = specs(n=70_000)["stable"]
    a = sample_increments(spec)
    monkeypatch.setenv("LEVYSPEC_THREADS", "4")
    b = sample_increments(spec)
    assert np.array_equal(a, b)


def test_ecf_examples():
    X = sample_increments(SamplerSpec.compound_poisson(paired_atoms(2.0), N=N, seed=11))
    ecf = empirical_characteristic_function(X, [[0.0], [math.pi], [0.7]])
    assert ecf.values[0] == 1.0
    assert abs(ecf.values[1].real - math.exp(-2.0)) <= 4 / math.sqrt(N)
    assert np.all(np.abs(ecf.values.imag) <= 4 / math.sqrt(N))
    with pytest.raises(BadParameter):
        empirical_characteristic_function(X[:50], [[1.0]])


@pytest.mark.parametrize("variant", sorted(specs()))
def test_characteristic_function_identity(variant):
    rep = verify_characteristic_function(specs()[variant])
    assert rep.passed, rep.to_dict()
    assert len(rep.tests) == 10


@pytest.mark.parametrize("variant", ["brownian", "compound_poisson", "stable"])
def test_convolution_property(variant):
    s, t = 0.4, 0.6
    a = sample_increments(specs(t=s, seed=1)[variant])
    b = sample_increments(specs(t=t, seed=2)[variant])
    c = sample_increments(specs(t=s + t, seed=3)[variant])
    u = [[0.3], [1.0], [2.0]]
    lhs = empirical_characteristic_function(a + b, u).values
    rhs = empirical_characteristic_function(c, u).values
    assert np.all(np.abs(lhs - rhs) <= 4 * math.sqrt(2.0 / N))


def test_semigroup_mc_brownian_heat():
    g = PeriodicGrid(1, 512, 40.0)
    G = GeneratorSpec(closed_form_preset("laplacian"), g)
    spec = SamplerSpec.brownian([[1.0]], t=0.5, N=N, seed=7)
    f = sample(g, lambda x: np.exp(-x ** 2 / 2))
    rep = verify_semigroup_mc(spec, G, f, [[0.0], [g.axis()[260]]])
    assert rep.passed, rep.to_dict()


def test_semigroup_mc_compound_poisson_and_constant():
    g = PeriodicGrid(1, 256, 64.0)
    G = GeneratorSpec(closed_form_preset("compound_poisson", atoms=paired_atoms(2.0)), g)
    spec = SamplerSpec.compound_poisson(paired_atoms(2.0), N=N, seed=3)
    f = sample(g, lambda x: np.exp(-x ** 2 / 8))
    assert verify_semigroup_mc(spec, G, f, [[0.0], [1.0], [-2.0]]).passed
    one = verify_semigroup_mc(spec, G, sample(g, lambda x: 1.0), [[0.0]])
    z = [t for t in one.tests if t["name"].startswith("semigroup_z")][0]
    assert z["statistic"] == 0.0


def test_wrap_mass_is_flagged_on_small_torus():
    g = PeriodicGrid(1, 64, 8.0)
    G = GeneratorSpec(closed_form_preset("fractional", alpha=1.0), g)
    spec = SamplerSpec.stable(1.0, N=20_000, seed=0)
    rep = verify_semigroup_mc(spec, G, sample(g, lambda x: np.exp(-x ** 2)), [[0.0]])
    wrap = [t for t in rep.tests if t["name"].startswith("wrap_mass")][0]
    assert not wrap["pass"] and not rep.passed


def test_semigroup_mc_preconditions():
    g = PeriodicGrid(1, 64, 20.0)
    f = sample(g, lambda x: np.exp(-x ** 2))
    G = GeneratorSpec(closed_form_preset("laplacian"), g)
    with pytest.raises(MismatchedModel):
        verify_semigroup_mc(SamplerSpec.stable(1.0, N=200), G, f, [[0.0]])
    with pytest.raises(BadParameter):
        verify_semigroup_mc(SamplerSpec.brownian([[1.0]], N=200), G, f, [[0.1]])


def test_unsupported_variants():
    nu = RadialDensity(lambda r: np.exp(-r), singularity=-1.0)
    with pytest.raises(UnsupportedMeasure):
        SamplerSpec.from_triplet(LevyTriplet.pure_jump(nu))
    with pytest.raises(UnsupportedMeasure):
        SamplerSpec.subordinated(BernsteinFunction.relativistic(1.0))


def test_report_serialises_with_seed():
    rep = verify_characteristic_function(specs(n=1000, seed=42)["compound_poisson"])
    d = rep.to_dict()
    assert d["seed"] == 42 and d["N"] == 1000 and isinstance(rep, MCReport)
    assert {"name", "statistic", "tolerance", "pass"} <= set(d["tests"][0])

"""Monte Carlo sampling of symmetric Levy increments and statistical checks.

Supported laws at time ``t`` (each with ``E exp(i u.X_t) = exp(-t eta(u))``):

* ``brownian``: ``N(0, 2 t a)``; the generator ``sum a_ij d_i d_j`` carries
  no 1/2, so the covariance is ``2 a`` per unit time.
* ``compound_poisson``: Poisson(``M t``) jumps drawn from ``nu / M``.
* ``triplet``: independent sum of the two above.
* ``stable``: symmetric stable with ``eta(u) = (scale |u|)^alpha``.  In d = 1
  via the Chambers-Mallows-Stuck transform, in d = 2 via subordination.
* ``subordinated``: ``sqrt(2 S_t) Z`` with ``S_t`` a positive stable
  subordinator of index ``beta`` (Kanter's representation), giving
  ``eta(u) = |u|^(2 beta)``.

Sampling is chunked; chunk ``i`` draws from a Philox generator keyed by
``(seed, i)``, so results are bit-identical for any thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, MismatchedModel, UnsupportedMeasure
from .grid import GridFunction, trig_interpolate_shifted
from .measures import AtomMeasure, DiffusionMatrix, LevyTriplet, ZeroMeasure
from .operators import GeneratorSpec, apply_semigroup
from .symbol import BernsteinFunction, Symbol, closed_form_preset, quadrature_symbol

VARIANTS = ("brownian", "compound_poisson", "triplet", "stable", "subordinated")

CHUNK = 1 << 15
MIN_SAMPLES = 100


def thread_cap() -> int:
    """Worker threads allowed by ``LEVYSPEC_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LEVYSPEC_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class SamplerSpec:
    variant: str
    params: dict
    d: int
    t: float = 1.0
    N: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise UnsupportedMeasure(f"no sampler for variant {self.variant!r}")
        if not self.t > 0:
            raise BadParameter("sampling time must be positive")
        if self.N < 1:
            raise BadParameter("sample count must be positive")

    # -- constructors ------------------------------------------------------

    @classmethod
    def brownian(cls, a, **kw) -> "SamplerSpec":
        a = a if isinstance(a, DiffusionMatrix) else DiffusionMatrix(a)
        return cls("brownian", {"a": a}, a.d, **kw)

    @classmethod
    def compound_poisson(cls, nu: AtomMeasure, **kw) -> "SamplerSpec":
        return cls("compound_poisson", {"nu": nu}, nu.d, **kw)

    @classmethod
    def stable(cls, alpha: float, scale: float = 1.0, d: int = 1, **kw) -> "SamplerSpec":
        if not 0.0 < alpha <= 2.0:
            raise BadParameter("stable index must lie in (0, 2]")
        return cls("stable", {"alpha": float(alpha), "scale": float(scale)}, d, **kw)

    @classmethod
    def subordinated(cls, f: BernsteinFunction, d: int = 1, **kw) -> "SamplerSpec":
        if f.kind != "power":
            raise UnsupportedMeasure("subordinated sampler supports power Bernstein functions only")
        return cls("subordinated", {"beta": f.params["exponent"]}, d, **kw)

    @classmethod
    def from_triplet(cls, triplet: LevyTriplet, **kw) -> "SamplerSpec":
        nu = triplet.nu
        if isinstance(nu, ZeroMeasure):
            return cls.brownian(triplet.a, **kw)
        if not isinstance(nu, AtomMeasure):
            raise UnsupportedMeasure(f"no sampler for {nu.kind} measures")
        if triplet.a.is_zero:
            return cls.compound_poisson(nu, **kw)
        return cls("triplet", {"a": triplet.a, "nu": nu}, triplet.d, **kw)

    # -- law ---------------------------------------------------------------

    def symbol(self) -> Symbol:
        """Characteristic exponent of the sampled law."""
        v, p = self.variant, self.params
        if v == "brownian":
            return quadrature_symbol(LevyTriplet.gaussian(p["a"]))
        if v == "compound_poisson":
            return closed_form_preset("compound_poisson", d=self.d, atoms=p["nu"])
        if v == "triplet":
            return quadrature_symbol(LevyTriplet(p["a"], p["nu"]))
        if v == "stable":
            alpha, c = p["alpha"], p["scale"]
            if alpha == 2.0:
                base = closed_form_preset("laplacian", d=self.d)
            else:
                base = closed_form_preset("fractional", d=self.d, alpha=alpha)
            if c == 1.0:
                return base
            return Symbol(self.d, "closed_form", base.name, {**base.params, "scale": c},
                          base.sup_info, lambda pts: base.func(c * pts), radial=True)
        beta = p["beta"]
        return closed_form_preset("bernstein", d=self.d, f=BernsteinFunction.power(beta))

    def describe(self) -> dict:
        out = {}
        for k, v in self.params.items():
            if isinstance(v, DiffusionMatrix):
                out[k] = v.entries.tolist()
            elif isinstance(v, AtomMeasure):
                out[k] = [[list(y), w] for y, w in v.pairs()]
            else:
                out[k] = v
        return out


# ---------------------------------------------------------------------------
# Samplers (one chunk each)
# ---------------------------------------------------------------------------


def _gaussian(rng, a: DiffusionMatrix, t, n):
    cov = 2.0 * t * a.entries
    w, V = np.linalg.eigh(0.5 * (cov + cov.T))
    root = V * np.sqrt(np.clip(w, 0.0, None))
    return rng.standard_normal((n, a.d)) @ root.T


def _compound_poisson(rng, nu: AtomMeasure, t, n, counts_out=None):
    M = nu.mass
    counts = rng.poisson(M * t, size=n)
    total = int(counts.sum())
    which = rng.choice(nu.weights.size, size=total, p=nu.weights / M)
    owner = np.repeat(np.arange(n), counts)
    out = np.zeros((n, nu.d))
    for k in range(nu.d):
        out[:, k] = np.bincount(owner, weights=nu.locations[which, k], minlength=n)
    if counts_out is not None:
        counts_out.append(counts)
    return out


def _positive_stable(rng, beta, n):
    """Kanter's representation: ``E exp(-s S) = exp(-s^beta)``."""
    if beta == 1.0:
        return np.ones(n)
    U = rng.uniform(0.0, math.pi, size=n)
    E = rng.standard_exponential(size=n)
    return (np.sin(beta * U) / np.sin(U) ** (1.0 / beta)
            * (np.sin((1.0 - beta) * U) / E) ** ((1.0 - beta) / beta))


def _symmetric_stable_1d(rng, alpha, n):
    """Chambers-Mallows-Stuck, symmetric case: ``E exp(i u X) = exp(-|u|^alpha)``."""
    phi = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size=n)
    w = rng.standard_exponential(size=n)
    if alpha == 1.0:
        return np.tan(phi)
    return (np.sin(alpha * phi) / np.cos(phi) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha))


def _subordinated(rng, beta, t, d, n):
    S = t ** (1.0 / beta) * _positive_stable(rng, beta, n)
    return np.sqrt(2.0 * S)[:, None] * rng.standard_normal((n, d))


def _sample_chunk(spec: SamplerSpec, index: int, n: int, counts_out=None):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([spec.seed, index])))
    v, p, t = spec.variant, spec.params, spec.t
    if v == "brownian":
        return _gaussian(rng, p["a"], t, n)
    if v == "compound_poisson":
        return _compound_poisson(rng, p["nu"], t, n, counts_out)
    if v == "triplet":
        return _gaussian(rng, p["a"], t, n) + _compound_poisson(rng, p["nu"], t, n, counts_out)
    if v == "stable":
        alpha, c = p["alpha"], p["scale"]
        if spec.d == 1 and alpha < 2.0:
            x = _symmetric_stable_1d(rng, alpha, n)[:, None]
            return c * t ** (1.0 / alpha) * x
        return c * _subordinated(rng, 0.5 * alpha, t, spec.d, n)
    return _subordinated(rng, p["beta"], t, spec.d, n)


def sample_increments(spec: SamplerSpec, return_jump_counts: bool = False):
    """Draw ``N`` i.i.d. copies of ``X_t`` as an ``(N, d)`` array.

    With ``return_jump_counts`` (compound Poisson variants only) also
    returns the per-sample number of jumps.
    """
    if return_jump_counts and spec.variant not in ("compound_poisson", "triplet"):
        raise BadParameter("jump counts exist only for compound Poisson variants")
    sizes = [min(CHUNK, spec.N - s) for s in range(0, spec.N, CHUNK)]
    count_lists = [[] for _ in sizes]

    def work(i):
        return _sample_chunk(spec, i, sizes[i], count_lists[i] if return_jump_counts else None)

    workers = min(thread_cap(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(work, range(len(sizes))))
    else:
        chunks = [work(i) for i in range(len(sizes))]
    X = np.concatenate(chunks, axis=0)
    if return_jump_counts:
        return X, np.concatenate([c[0] for c in count_lists])
    return X


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ECFResult:
    u: np.ndarray
    values: np.ndarray
    stderr: float


def empirical_characteristic_function(samples, u_list) -> ECFResult:
    """``(1/N) sum_j exp(i u.X_j)`` for each ``u``, with standard error ``1/sqrt(N)``."""
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N, d = X.shape
    if N < MIN_SAMPLES:
        raise BadParameter(f"need at least {MIN_SAMPLES} samples, got {N}")
    U = np.asarray(u_list, dtype=float)
    if d == 1 and U.ndim <= 1:
        U = U.reshape(-1, 1)
    U = U.reshape(-1, d)
    vals = np.empty(U.shape[0], dtype=complex)
    for i, u in enumerate(U):
        if not np.any(u):
            vals[i] = 1.0
            continue
        phase = X @ u
        vals[i] = complex(np.mean(np.cos(phase)), np.mean(np.sin(phase)))
    return ECFResult(U, vals, 1.0 / math.sqrt(N))


@dataclass
class MCReport:
    variant: str
    t: float
    N: int
    seed: int
    tests: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t["pass"] for t in self.tests)

    def add(self, name, statistic, tolerance, ok=None):
        ok = bool(abs(statistic) <= tolerance) if ok is None else bool(ok)
        self.tests.append({"name": name, "statistic": float(statistic),
                           "tolerance": float(tolerance), "pass": ok})

    def to_dict(self) -> dict:
        return {"variant": self.variant, "t": self.t, "N": self.N, "seed": self.seed,
                "params": self.params, "tests": self.tests, "pass": self.passed}


def default_test_frequencies(d: int) -> np.ndarray:
    if d == 1:
        return np.array([[0.25], [0.5], [1.0], [2.0], [math.pi]])
    return np.array([[0.25, 0.0], [0.0, 0.5], [0.5, 0.5], [1.0, -0.5], [math.pi, 0.0]])


def verify_characteristic_function(spec: SamplerSpec, samples=None, u_list=None,
                                   report: MCReport | None = None, z_max: float = 4.0) -> MCReport:
    """Compare the ECF with ``exp(-t eta(u))``; tolerance ``z_max / sqrt(N)``."""
    report = report or MCReport(spec.variant, spec.t, spec.N, spec.seed, params=spec.describe())
    X = sample_increments(spec) if samples is None else samples
    U = default_test_frequencies(spec.d) if u_list is None else np.asarray(u_list, dtype=float)
    ecf = empirical_characteristic_function(X, U)
    exact = np.exp(-spec.t * spec.symbol().values(ecf.u))
    tol = z_max * ecf.stderr
    for u, got, want in zip(ecf.u, ecf.values, exact):
        label = ",".join(f"{c:.6g}" for c in u)
        report.add(f"ecf_real[u={label}]", got.real - want, tol)
        report.add(f"ecf_imag[u={label}]", got.imag, tol)
    return report


def verify_semigroup_mc(spec: SamplerSpec, G: GeneratorSpec, f: GridFunction, x_list,
                        samples=None, report: MCReport | None = None,
                        z_max: float = 4.0, wrap_limit: float = 0.01) -> MCReport:
    """Compare ``(1/N) sum f(x + X_j)`` with the spectral ``T_t f(x)``.

    ``f`` is extended off the nodes by its trigonometric interpolant, which
    is periodic, so ``x + X_j`` wraps onto the torus.  The fraction of
    wrapped samples is reported as its own test against ``wrap_limit``; a
    large wrap mass means the period is too small to stand in for the line.
    """
    report = report or MCReport(spec.variant, spec.t, spec.N, spec.seed, params=spec.describe())
    if G.grid.d != spec.d:
        raise MismatchedModel("sampler and generator dimensions differ")
    probe = np.vstack([default_test_frequencies(spec.d), frequency_probe(G)])
    want = spec.symbol().values(probe)
    got = G.symbol.values(probe)
    if not np.allclose(got, want, rtol=1e-7, atol=1e-9):
        raise MismatchedModel("sampler law and generator symbol disagree")

    grid = G.grid
    xs = np.asarray(x_list, dtype=float).reshape(-1, grid.d)
    nodes = (xs + 0.5 * grid.L) / grid.h
    if np.any(np.abs(nodes - np.rint(nodes)) > 1e-9) or np.any(nodes < 0) or np.any(nodes >= grid.n):
        raise BadParameter("semigroup comparison points must be grid nodes")
    idx = tuple(np.rint(nodes).astype(int).T)

    X = sample_increments(spec) if samples is None else samples
    exact = np.atleast_1d(apply_semigroup(G, spec.t, f).values[idx])
    values = trig_interpolate_shifted(f, X, xs)
    half = 0.5 * grid.L
    for c, x in enumerate(xs):
        shifted = x + X
        wrapped = float(np.mean(np.any((shifted < -half) | (shifted >= half), axis=1)))
        vals = values[:, c]
        mean = float(np.mean(vals))
        sd = float(np.std(vals, ddof=1))
        diff = mean - float(np.real(exact[c]))
        if sd <= 1e-12 * max(1.0, abs(mean)):
            # (numerically) deterministic integrand, e.g. constant f
            z = 0.0 if abs(diff) <= 1e-10 * max(1.0, abs(mean)) else math.inf
        else:
            z = diff / (sd / math.sqrt(X.shape[0]))
        label = ",".join(f"{v:.6g}" for v in x)
        report.add(f"semigroup_z[x={label}]", z, z_max)
        report.add(f"wrap_mass[x={label}]", wrapped, wrap_limit)
    return report


def frequency_probe(G: GeneratorSpec) -> np.ndarray:
    """A few lattice frequencies used to cross-check sampler and generator."""
    k = G.grid.dy * np.array([1.0, 3.0, 7.0])
    if G.grid.d == 1:
        return k[:, None]
    return np.column_stack([k, k[::-1]])

"""Generator, semigroup and resolvent of a symmetric Levy process on a torus.

All three act as Fourier multipliers on the frequency lattice:

    A         <->  -eta(y_k)
    T_t       <->  exp(-t eta(y_k))
    (lam-A)^-1 <-> 1 / (lam + eta(y_k))

The direct-space form of the generator (second derivatives plus an integral
of symmetric second differences against ``nu``) is evaluated pointwise by
:func:`direct_generator` as an independent route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._quad import integrate
from .errors import BadParameter, NotFinite, QuadratureFailure, SpectrumProximity
from .grid import (
    FREQUENCY,
    PHYSICAL,
    GridFunction,
    PeriodicGrid,
    forward_transform,
    inverse_transform,
)
from .measures import (
    AtomMeasure,
    LevyTriplet,
    RadialDensity,
    StableIsotropic,
    ZeroMeasure,
    sphere_measure,
    total_mass,
)
from .symbol import Symbol, quadrature_symbol

# Jump-part conventions for the direct-space generator, see direct_generator.
SYMBOL_CONVENTION = "symbol"
LITERAL_CONVENTION = "literal"


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """A symbol bound to a grid, with the sampled multiplier cached."""

    symbol: Symbol
    grid: PeriodicGrid
    resolvent_margin: float = 1e-6

    def __post_init__(self):
        if self.symbol.d != self.grid.d:
            raise BadParameter(
                f"symbol dimension {self.symbol.d} does not match grid dimension {self.grid.d}"
            )

    @cached_property
    def multiplier(self) -> np.ndarray:
        """``eta`` on the frequency lattice, quadrature noise below 0 clamped."""
        eta = self.grid.multiplier(self.symbol)
        tol = self.symbol.quad_tol * (1.0 + self.grid.frequency_norms() ** 2)
        if np.any(eta < -np.maximum(tol, 1e-300)):
            raise QuadratureFailure("sampled symbol is negative beyond quadrature tolerance")
        eta = np.maximum(eta, 0.0)
        eta[(self.grid.n // 2,) * self.grid.d] = 0.0
        eta.setflags(write=False)
        return eta

    @cached_property
    def spectrum(self):
        from .spectrum import classify_spectrum

        return classify_spectrum(self.symbol)

    def _apply(self, f: GridFunction, mult) -> GridFunction:
        if f.grid != self.grid:
            raise BadParameter("grid function lives on a different grid")
        F = forward_transform(f) if f.space == PHYSICAL else f
        out = inverse_transform(GridFunction(self.grid, mult * F.values, FREQUENCY))
        if f.is_real and f.space == PHYSICAL:
            # even multiplier: the imaginary part is pure rounding
            return out.real()
        return out


def apply_generator(G: GeneratorSpec, f: GridFunction) -> GridFunction:
    """``A f = -F^{-1}[eta F f]``."""
    return G._apply(f, -G.multiplier)


def apply_semigroup(G: GeneratorSpec, t: float, f: GridFunction) -> GridFunction:
    """``T_t f = F^{-1}[exp(-t eta) F f]``; ``T_0`` returns ``f`` itself."""
    if t < 0:
        raise BadParameter("semigroup time must be non-negative")
    if t == 0:
        return f
    return G._apply(f, np.exp(-t * G.multiplier))


def spectrum_distance(G: GeneratorSpec, lam: float) -> float:
    """Distance from ``lam`` to the lattice values ``-eta(y_k)`` and the continuum spectrum."""
    lattice = float(np.min(np.abs(lam + G.multiplier)))
    report = G.spectrum
    if report.classification == "interval":
        lo, hi = -report.K_hat, 0.0
    else:
        # half line, and inconclusive symbols are treated as if unbounded
        lo, hi = -math.inf, 0.0
    continuum = 0.0 if lo <= lam <= hi else min(abs(lam - lo), abs(lam - hi))
    return min(lattice, continuum)


def resolvent_multiplier_bound(G: GeneratorSpec, lam: float) -> float:
    """``max_k |(1 + eta) / (lam + eta)|`` on the lattice."""
    eta = G.multiplier
    return float(np.max(np.abs((1.0 + eta) / (lam + eta))))


def apply_resolvent(G: GeneratorSpec, lam: float, g: GridFunction) -> GridFunction:
    """Solve ``(lam I - A) f = g`` by dividing by ``lam + eta``.

    Raises :class:`SpectrumProximity` when ``lam`` is within the relative
    safety margin of the spectrum, i.e. when ``lam I - A`` is numerically
    not invertible.
    """
    lam = float(lam)
    margin = G.resolvent_margin * (1.0 + abs(lam))
    dist = spectrum_distance(G, lam)
    if dist <= margin:
        raise SpectrumProximity(lam, dist, margin)
    return G._apply(g, 1.0 / (lam + G.multiplier))


def resolvent_residual(G: GeneratorSpec, lam: float, g: GridFunction,
                       f: GridFunction | None = None) -> float:
    """``||(lam - A) f - g|| / ||g||`` with ``f = R_lam g`` unless given."""
    f = apply_resolvent(G, lam, g) if f is None else f
    r = f * lam - apply_generator(G, f) - g
    return r.l2_norm() / g.l2_norm()


def sobolev_norm(G: GeneratorSpec, f: GridFunction) -> float:
    """Discrete ``(int (1 + eta^2) |f_hat|^2 dy)^(1/2)``."""
    F = forward_transform(f) if f.space == PHYSICAL else f
    w = G.grid.dy ** G.grid.d
    return math.sqrt(w * float(np.sum((1.0 + G.multiplier ** 2) * np.abs(F.values) ** 2)))


# ---------------------------------------------------------------------------
# Direct-space generator
# ---------------------------------------------------------------------------

_TAYLOR_RADIUS = 1e-3


def _second_difference(f, x, y):
    return f(x + y) - 2.0 * f(x) + f(x - y)


def direct_generator(t: LevyTriplet, f, x, hessian=None, *,
                     convention: str = SYMBOL_CONVENTION, tol: float = 1e-10) -> float:
    """Evaluate the generator of ``t`` on a smooth ``f`` at the point ``x``.

    ``f`` takes a ``d``-vector and returns a float; ``hessian`` returns the
    ``d x d`` matrix of second derivatives and is needed whenever ``a != 0``
    or ``nu`` has a density.

    With ``convention="symbol"`` (default) the jump part is
    ``1/2 int (f(x+y) - 2 f(x) + f(x-y)) nu(dy)``, the operator whose Fourier
    symbol is exactly ``-eta``.  ``convention="literal"`` drops the 1/2 and
    doubles the jump contribution.
    """
    if convention not in (SYMBOL_CONVENTION, LITERAL_CONVENTION):
        raise BadParameter(f"unknown convention {convention!r}")
    factor = 0.5 if convention == SYMBOL_CONVENTION else 1.0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = t.d
    if x.shape != (d,):
        raise BadParameter(f"point must be a {d}-vector")

    H = None
    if hessian is not None:
        H = np.atleast_2d(np.asarray(hessian(x), dtype=float))

    value = 0.0
    if not t.a.is_zero:
        if H is None:
            raise BadParameter("a Hessian is needed for the diffusion part")
        value += float(np.sum(t.a.entries * H))

    nu = t.nu
    if isinstance(nu, ZeroMeasure):
        pass
    elif isinstance(nu, AtomMeasure):
        jumps = sum(w * _second_difference(f, x, y) for y, w in zip(nu.locations, nu.weights))
        value += factor * float(jumps)
    elif isinstance(nu, (StableIsotropic, RadialDensity)):
        if H is None:
            raise BadParameter("a Hessian is needed for density measures")
        value += factor * _density_jump_part(nu, f, x, H, tol)
    else:
        raise BadParameter(f"unsupported measure {type(nu).__name__}")
    return value


def _density_jump_part(nu, f, x, H, tol):
    """``int (f(x+y) - 2 f(x) + f(x-y)) rho(|y|) dy`` for a radial density.

    Below ``|y| = delta`` the second difference is replaced by its Taylor
    term ``y^T H y`` (the remainder is ``O(delta^2)`` smaller), avoiding
    catastrophic cancellation where the density is singular.
    """
    delta = min(_TAYLOR_RADIUS, nu.outer_limit)
    R = nu.outer_limit
    d = nu.d
    # angular mean of y^T H y over the unit sphere times the sphere measure
    taylor = float(np.trace(H)) / d * sphere_measure(d)
    inner = taylor * nu.radial_integral(lambda r: r * r, 0.0, delta, tol=tol)

    if d == 1:
        def g(r):
            return _second_difference(f, x, np.array([r]))

        near, _ = integrate(lambda r: g(r) * nu.density(r), delta, min(1.0, R),
                            epsabs=tol, epsrel=tol)
        far = 0.0
        if R > 1.0:
            far, _ = integrate(lambda r: g(r) * nu.density(r), 1.0, R,
                               epsabs=tol, epsrel=tol)
        return inner + 2.0 * (near + far)

    def angular(r):
        weight = float(nu.density(r)) * r
        if weight == 0.0:
            return 0.0

        def h(theta):
            y = r * np.array([math.cos(theta), math.sin(theta)])
            return _second_difference(f, x, y)
        # y and -y contribute equally: integrate the half circle twice.
        # The tolerance targets the weighted integrand, not the bare angle mean.
        val, _ = integrate(h, 0.0, math.pi, epsabs=tol / weight, epsrel=tol)
        return 2.0 * val * weight

    total = inner
    for a, b in ((delta, min(1.0, R)), (1.0, R)):
        if b <= a:
            continue
        val, _ = integrate(angular, a, b, epsabs=tol, epsrel=tol)
        total += val
    return total


# ---------------------------------------------------------------------------
# Bounded (finite-measure) jump part
# ---------------------------------------------------------------------------


@dataclass
class JumpNormReport:
    mass: float
    trials: int
    max_ratio: float
    peak_ratio: float
    sharp_bound: float
    crude_bound: float
    ratios: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.max_ratio <= self.sharp_bound + 1e-9
                and self.peak_ratio <= self.sharp_bound + 1e-9
                and self.max_ratio <= self.crude_bound + 1e-9)

    def to_dict(self) -> dict:
        return {"mass": self.mass, "trials": self.trials, "max_ratio": self.max_ratio,
                "peak_ratio": self.peak_ratio, "sharp_bound": self.sharp_bound,
                "crude_bound": self.crude_bound, "ok": self.ok}


def bounded_jump_norm_check(t: LevyTriplet, trials: int = 20, grid: PeriodicGrid | None = None,
                            seed: int = 0) -> JumpNormReport:
    """Randomised operator-norm estimate for a finite jump measure.

    Checks ``||A f|| <= 2M ||f||`` (the bound coming from ``eta <= 2M``) and
    the cruder ``4M`` bound for ``trials`` random grid functions, plus a
    probe concentrated at the frequency where ``eta`` peaks on the lattice.
    """
    M = total_mass(t.nu)
    if not math.isfinite(M):
        raise NotFinite("jump measure has infinite mass; the jump part is unbounded")
    if not t.a.is_zero:
        raise BadParameter("bounded-jump check applies to pure-jump triplets (a = 0)")
    d = t.d
    grid = grid or PeriodicGrid(d, 256 if d == 1 else 64, 256.0 if d == 1 else 64.0)
    if M == 0.0:
        return JumpNormReport(0.0, trials, 0.0, 0.0, 0.0, 0.0, [0.0] * trials)

    G = GeneratorSpec(quadrature_symbol(t), grid)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        f = GridFunction(grid, rng.standard_normal(grid.shape))
        ratios.append(apply_generator(G, f).l2_norm() / f.l2_norm())

    peak = np.unravel_index(int(np.argmax(G.multiplier)), grid.shape)
    F = np.zeros(grid.shape, dtype=complex)
    F[peak] = 1.0
    probe = inverse_transform(GridFunction(grid, F, FREQUENCY))
    peak_ratio = apply_generator(G, probe).l2_norm() / probe.l2_norm()
    return JumpNormReport(M, trials, float(max(ratios)), float(peak_ratio),
                          2.0 * M, 4.0 * M, ratios)

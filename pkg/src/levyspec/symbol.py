"""Characteristic exponents ``eta(u) = a u.u + int (1 - cos(u.y)) nu(dy)``.

Symbols come from two routes: closed-form presets (Laplacian, fractional
Laplacian, relativistic, compound Poisson, Bernstein functions of ``|u|^2``)
and adaptive quadrature against a :class:`~levyspec.measures.LevyTriplet`.
Every symbol carries ``sup_info`` describing what is known about
``sup eta``, which drives the spectrum classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from ._quad import integrate
from .errors import BadParameter, DivergentMeasure
from .measures import (
    AtomMeasure,
    DiffusionMatrix,
    LevyTriplet,
    RadialDensity,
    StableIsotropic,
    ZeroMeasure,
    levy_integral,
    total_mass,
    validate_triplet,
)

PRESETS = ("laplacian", "fractional", "relativistic", "compound_poisson", "bernstein")

DEFAULT_QUAD_TOL = 1e-8


@dataclass(frozen=True)
class SupInfo:
    """What is known about ``sup_u eta(u)``.

    ``kind`` is ``"finite"`` (``value`` is the sup or an upper bound on it),
    ``"infinite"``, or ``"unknown"`` (``value`` is a lower bound, if any).
    """

    kind: str
    value: float | None = None

    @classmethod
    def finite(cls, K: float) -> "SupInfo":
        return cls("finite", float(K))

    @classmethod
    def infinite(cls) -> "SupInfo":
        return cls("infinite")

    @classmethod
    def unknown(cls, lower: float | None = None) -> "SupInfo":
        return cls("unknown", None if lower is None else float(lower))

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"


# ---------------------------------------------------------------------------
# Bernstein functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BernsteinFunction:
    """A strictly increasing Bernstein function ``f`` with ``f(0) = 0``.

    Use the constructors :meth:`power`, :meth:`relativistic` and
    :meth:`from_table`.
    """

    kind: str
    params: dict = field(default_factory=dict)
    _interp: Callable | None = None

    @classmethod
    def power(cls, exponent: float) -> "BernsteinFunction":
        """``f(s) = s**exponent``; ``exponent = alpha/2`` gives ``eta = |u|^alpha``."""
        if not 0.0 < exponent <= 1.0:
            raise BadParameter(f"Bernstein power exponent must lie in (0, 1], got {exponent}")
        return cls("power", {"exponent": float(exponent)})

    @classmethod
    def relativistic(cls, b: float) -> "BernsteinFunction":
        if not b > 0:
            raise BadParameter(f"relativistic mass b must be positive, got {b}")
        return cls("relativistic", {"b": float(b)})

    @classmethod
    def from_table(cls, s, f) -> "BernsteinFunction":
        """Monotone piecewise-cubic interpolation of sampled values.

        The table must start at ``s = 0`` with ``f = 0`` and be strictly
        increasing in both columns.  Evaluation outside the table raises.
        """
        s = np.asarray(s, dtype=float)
        f = np.asarray(f, dtype=float)
        if s.ndim != 1 or s.shape != f.shape or s.size < 2:
            raise BadParameter("Bernstein table needs two equal-length 1-D columns")
        if s[0] != 0.0 or f[0] != 0.0:
            raise BadParameter("Bernstein table must start at f(0) = 0")
        if np.any(np.diff(s) <= 0) or np.any(np.diff(f) <= 0):
            raise BadParameter("Bernstein table must be strictly increasing")
        interp = PchipInterpolator(s, f, extrapolate=False)
        return cls("table", {"s_max": float(s[-1])}, interp)

    @property
    def unbounded(self) -> bool | None:
        return None if self.kind == "table" else True

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            return np.power(s, self.params["exponent"])
        if self.kind == "relativistic":
            b = self.params["b"]
            return s / (np.sqrt(b * b + s) + b)
        if np.any(s > self.params["s_max"]) or np.any(s < 0):
            raise BadParameter(
                f"Bernstein table covers [0, {self.params['s_max']}]; extrapolation refused"
            )
        return self._interp(s)


# ---------------------------------------------------------------------------
# Symbol
# ---------------------------------------------------------------------------


def _as_points(u, d):
    """Coerce ``u`` to an ``(N, d)`` array; report whether it was a single point."""
    arr = np.asarray(u, dtype=float)
    if d == 1:
        if arr.ndim == 0:
            return arr.reshape(1, 1), True
        if arr.ndim == 1:
            return arr[:, None], False
        if arr.ndim == 2 and arr.shape[1] == 1:
            return arr, False
    else:
        if arr.shape == (d,):
            return arr.reshape(1, d), True
        if arr.ndim == 2 and arr.shape[1] == d:
            return arr, False
    raise BadParameter(f"cannot interpret array of shape {arr.shape} as points in R^{d}")


def _atom_sum(points, nu: AtomMeasure):
    phase = points @ nu.locations.T
    # 1 - cos x = 2 sin^2(x/2) avoids cancellation near 0
    return 2.0 * (np.sin(0.5 * phase) ** 2) @ nu.weights


@dataclass(frozen=True, eq=False)
class Symbol:
    """An evaluable characteristic exponent.

    ``source`` is ``"closed_form"``, ``"quadrature"`` or ``"custom"``.
    ``radial`` marks symbols depending on ``|u|`` only.
    """

    d: int
    source: str
    name: str
    params: dict
    sup_info: SupInfo
    func: Callable[[np.ndarray], np.ndarray]
    triplet: LevyTriplet | None = None
    radial: bool = False
    quad_tol: float = 0.0

    def __call__(self, u):
        return eval_symbol(self, u)

    def values(self, points: np.ndarray) -> np.ndarray:
        """Evaluate on an ``(N, d)`` array of points."""
        if self.radial and self.source == "quadrature":
            r = np.sqrt(np.sum(points * points, axis=1))
            uniq, inverse = np.unique(r, return_inverse=True)
            probe = np.zeros((uniq.size, self.d))
            probe[:, 0] = uniq
            return self.func(probe)[inverse]
        return self.func(points)

    @property
    def is_closed_form(self) -> bool:
        return self.source == "closed_form"

    def describe(self) -> dict:
        return {"name": self.name, "source": self.source, "d": self.d,
                "params": {k: v for k, v in self.params.items() if _jsonable(v)}}


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, type(None), list, tuple))


def eval_symbol(s: Symbol, u):
    """Evaluate ``eta`` at a point (returns float) or an array of points."""
    points, single = _as_points(u, s.d)
    if not np.all(np.isfinite(points)):
        raise BadParameter("symbol argument must be finite")
    out = np.asarray(s.values(points), dtype=float)
    return float(out[0]) if single else out


def custom_symbol(func: Callable, d: int = 1, name: str = "custom") -> Symbol:
    """Wrap an arbitrary vectorised ``func(points) -> values`` (test fixtures)."""
    return Symbol(d, "custom", name, {}, SupInfo.unknown(), func)


def closed_form_preset(name: str, d: int = 1, **params) -> Symbol:
    """Closed-form symbol presets.

    ``laplacian``: ``|u|^2``; ``fractional(alpha)``: ``|u|^alpha``;
    ``relativistic(b)``: ``sqrt(b^2 + |u|^2) - b``;
    ``compound_poisson(atoms)``: ``sum_j w_j (1 - cos(u.y_j))`` over all
    atoms (each symmetric pair contributes ``2 w (1 - cos(u.y))``);
    ``bernstein(f)``: ``f(|u|^2)``.
    """
    if name == "laplacian":
        def func(p):
            return np.sum(p * p, axis=1)
        return Symbol(d, "closed_form", name, {}, SupInfo.infinite(), func, radial=True)

    if name == "fractional":
        alpha = float(params.get("alpha", np.nan))
        if not 0.0 < alpha < 2.0:
            raise BadParameter(f"fractional Laplacian needs 0 < alpha < 2, got {alpha}")

        def func(p):
            return np.power(np.sum(p * p, axis=1), 0.5 * alpha)
        return Symbol(d, "closed_form", name, {"alpha": alpha}, SupInfo.infinite(), func,
                      radial=True)

    if name == "relativistic":
        b = float(params.get("b", np.nan))
        if not b > 0:
            raise BadParameter(f"relativistic symbol needs b > 0, got {b}")

        def func(p):
            sq = np.sum(p * p, axis=1)
            return sq / (np.sqrt(b * b + sq) + b)
        return Symbol(d, "closed_form", name, {"b": b}, SupInfo.infinite(), func, radial=True)

    if name == "compound_poisson":
        nu = params.get("atoms")
        if not isinstance(nu, AtomMeasure):
            nu = AtomMeasure.from_pairs(nu)
        if nu.d != d:
            d = nu.d
        if nu.has_origin_atom() or not nu.is_symmetric():
            raise BadParameter("compound Poisson preset needs symmetric atoms away from 0")

        def func(p):
            return _atom_sum(p, nu)
        return Symbol(d, "closed_form", name, {"mass": nu.mass, "atoms": nu},
                      SupInfo.finite(2.0 * nu.mass), func,
                      triplet=LevyTriplet.pure_jump(nu))

    if name == "bernstein":
        f = params.get("f")
        if not isinstance(f, BernsteinFunction):
            raise BadParameter("bernstein preset needs a BernsteinFunction 'f'")

        def func(p):
            return np.asarray(f(np.sum(p * p, axis=1)), dtype=float)
        sup = SupInfo.infinite() if f.unbounded else SupInfo.unknown()
        return Symbol(d, "closed_form", name, {"f": f, "kind": f.kind, **f.params}, sup,
                      func, radial=True)

    raise BadParameter(f"unknown preset {name!r}; expected one of {PRESETS}")


# ---------------------------------------------------------------------------
# Quadrature route
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSettings:
    """``quad_tol(u) = tol * (1 + |u|^2)`` bounds the absolute error of eta(u)."""

    tol: float = DEFAULT_QUAD_TOL

    def quad_tol(self, u_norm: float) -> float:
        return self.tol * (1.0 + u_norm * u_norm)


def radial_jump_exponent(nu, k: float, tol: float) -> float:
    """``int (1 - cos(k y_1)) nu(dy)`` for a radial density measure.

    Uses the one-dimensional marginal ``rho_1`` of ``nu``:
    ``2 int_0^inf (1 - cos(k s)) rho_1(s) ds``.  Near the origin the
    integrand is written as ``2 sin^2(k s / 2) rho_1(s)`` (bounded by
    ``(k s)^2 rho_1(s) / 2``, integrable because the singularity exponent is
    below 2).  Away from the origin the ``cos`` part is integrated with
    QUADPACK's Fourier-weighted rules, so the tail needs no hard truncation.
    """
    if k == 0.0:
        return 0.0
    rho1 = nu.marginal_density
    R = nu.outer_limit
    piece_tol = tol / 16.0
    split = min(1.0, 1.0 / k, R)

    def near(s):
        return 2.0 * math.sin(0.5 * k * s) ** 2 * rho1(s)

    total, _ = integrate(near, 0.0, split, epsabs=piece_tol, epsrel=1e-12)
    for a, b in ((split, min(1.0, R)), (1.0, R)):
        if b <= a:
            continue
        mass, _ = integrate(rho1, a, b, epsabs=piece_tol, epsrel=1e-13)
        if np.isinf(b):
            osc, _ = integrate(rho1, a, np.inf, weight="cos", wvar=k, epsabs=piece_tol,
                               epsrel=0.0, limit=200)
        else:
            osc, _ = integrate(rho1, a, b, weight="cos", wvar=k, epsabs=piece_tol,
                               epsrel=1e-13)
        total += mass - osc
    return 2.0 * total


def quadrature_symbol(t: LevyTriplet, settings: QuadratureSettings | None = None) -> Symbol:
    """Symbol of a triplet, integrating ``1 - cos(u.y)`` against ``nu``.

    Atom measures are summed exactly; radial densities go through
    :func:`radial_jump_exponent`.
    """
    settings = settings or QuadratureSettings()
    nu = t.nu
    if isinstance(nu, (StableIsotropic, RadialDensity)) and nu.singularity >= 2:
        levy_integral(nu)  # raises DivergentMeasure
    report = validate_triplet(t)
    if not report.ok:
        raise BadParameter("invalid triplet: " + "; ".join(report.violations))

    a = t.a

    if isinstance(nu, ZeroMeasure):
        def jump(p):
            return np.zeros(p.shape[0])
    elif isinstance(nu, AtomMeasure):
        def jump(p):
            return _atom_sum(p, nu)
    else:
        def jump(p):
            norms = np.sqrt(np.sum(p * p, axis=1))
            return np.array([radial_jump_exponent(nu, float(k), settings.quad_tol(float(k)))
                             for k in norms])

    def func(p):
        return a.quadratic_form(p) + jump(p)

    if not a.is_zero:
        sup = SupInfo.infinite()
    elif isinstance(nu, AtomMeasure):
        sup = SupInfo.finite(2.0 * nu.mass)
    elif isinstance(nu, StableIsotropic) or getattr(nu, "unbounded_symbol", False):
        sup = SupInfo.infinite()
    else:
        sup = SupInfo.unknown()

    isotropic_a = np.array_equal(a.entries, a.entries[0, 0] * np.eye(a.d))
    return Symbol(t.d, "quadrature", f"triplet[{nu.kind}]",
                  {"measure": nu.kind, "tol": settings.tol}, sup, func, triplet=t,
                  radial=nu.is_radial and isotropic_a, quad_tol=settings.tol)


# ---------------------------------------------------------------------------
# Supremum search
# ---------------------------------------------------------------------------

DEFAULT_SEARCH_HALF_WIDTH = 8.0 * math.pi


def _default_grid_n(d):
    return 4096 if d == 1 else 512


def _golden_refine_1d(func, lo, mid, hi):
    """Maximise ``func`` in the bracket; fall back to ``mid`` on a flat bracket."""
    try:
        res = minimize_scalar(lambda x: -func(x), bracket=(lo, mid, hi), method="golden",
                              options={"xtol": 1e-12})
        x = float(res.x)
        if lo <= x <= hi and func(x) >= func(mid):
            return x
    except ValueError:
        pass
    return mid


def _local_max_candidates(values, count, shape=None):
    """Flat indices of the ``count`` largest discrete local maxima."""
    grid = values.reshape(shape) if shape is not None else values
    mask = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.ndim):
        n = grid.shape[ax]
        prev = np.take(grid, np.r_[0, np.arange(n - 1)], axis=ax)
        nxt = np.take(grid, np.r_[np.arange(1, n), n - 1], axis=ax)
        mask &= (grid >= prev) & (grid >= nxt)
    idx = np.flatnonzero(mask)
    order = np.argsort(grid.reshape(-1)[idx], kind="stable")[::-1]
    return idx[order[:count]]


def maximize_symbol(s: Symbol, search_box: float | None = None, grid_n: int | None = None,
                    candidates: int = 16):
    """Dense-grid maximisation of ``eta`` on ``[-B, B]^d`` with local refinement.

    Returns ``(K_hat, u_star, refined)`` where ``refined`` lists
    ``(eta, u)`` for every refined candidate, best first.
    """
    B = DEFAULT_SEARCH_HALF_WIDTH if search_box is None else float(search_box)
    n = grid_n or _default_grid_n(s.d)
    axis = np.linspace(-B, B, n)
    h = axis[1] - axis[0]

    if s.d == 1:
        vals = s.values(axis[:, None])
        refined = []
        for i in _local_max_candidates(vals, candidates):
            i = int(i)
            lo, hi = axis[max(i - 1, 0)], axis[min(i + 1, n - 1)]

            def f1(x):
                return float(s.values(np.array([[x]]))[0])

            x = _golden_refine_1d(f1, lo, axis[i], hi)
            refined.append((f1(x), np.array([x])))
    else:
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        vals = s.values(pts)
        refined = []
        for flat in _local_max_candidates(vals, candidates, (n, n)):
            u = pts[int(flat)].copy()
            for _ in range(4):
                for ax in range(2):
                    def f2(x, ax=ax, u=u):
                        v = u.copy()
                        v[ax] = x
                        return float(s.values(v[None, :])[0])
                    u[ax] = _golden_refine_1d(f2, max(u[ax] - h, -B), u[ax],
                                              min(u[ax] + h, B))
            refined.append((float(s.values(u[None, :])[0]), u))

    # refinement starts at grid points and only accepts improvements
    refined.sort(key=lambda item: -item[0])
    K_hat, u_star = refined[0]
    return K_hat, u_star, refined


def sup_symbol(s: Symbol, search_box: float | None = None,
               grid_n: int | None = None) -> SupInfo:
    """Estimate ``sup eta``.

    Finite-mass pure-jump symbols give ``Finite(K_hat)`` from a dense grid
    search refined by golden-section steps, clipped to the ``2M`` bound.
    Symbols known to grow without bound give ``Infinite``.  Anything else is
    ``Unknown`` carrying the grid maximum as a lower bound.
    """
    info = s.sup_info
    if info.is_infinite:
        return info
    if info.is_finite:
        K_hat, _, _ = maximize_symbol(s, search_box, grid_n)
        return SupInfo.finite(min(K_hat, info.value))
    if s.radial:
        # eta depends on |u| only: a radial sweep is enough for a lower bound
        B = DEFAULT_SEARCH_HALF_WIDTH if search_box is None else float(search_box)
        r = np.linspace(0.0, B * math.sqrt(s.d), grid_n or 256)
        probe = np.zeros((r.size, s.d))
        probe[:, 0] = r
        return SupInfo.unknown(float(np.max(s.values(probe))))
    K_hat, _, _ = maximize_symbol(s, search_box, grid_n or (256 if s.d == 1 else 64))
    return SupInfo.unknown(K_hat)


def negative_definiteness_check(s, points) -> bool:
    """Test whether ``[eta(u_i) + eta(u_j) - eta(u_i - u_j)]`` is PSD.

    ``s`` may be a :class:`Symbol` or a plain vectorised callable on
    ``(N, d)`` arrays.  At most 64 points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] > 64:
        raise BadParameter("negative-definiteness check is limited to 64 points")
    evaluate = s.values if isinstance(s, Symbol) else s
    n, d = pts.shape
    eta_i = np.asarray(evaluate(pts), dtype=float)
    diffs = (pts[:, None, :] - pts[None, :, :]).reshape(n * n, d)
    eta_ij = np.asarray(evaluate(diffs), dtype=float).reshape(n, n)
    gram = eta_i[:, None] + eta_i[None, :] - eta_ij
    gram = 0.5 * (gram + gram.T)
    scale = float(np.max(np.abs(gram), initial=0.0))
    if scale == 0.0:
        return True
    return bool(np.linalg.eigvalsh(gram).min() >= -1e-9 * scale)

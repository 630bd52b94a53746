"""Symmetric Levy triplets: diffusion matrices and Levy measures.

A triplet ``(a, nu)`` fixes the symmetric generator

    A f(x) = sum_ij a_ij d_i d_j f(x) + (jump part driven by nu)

and its characteristic exponent ``eta(u) = a u.u + int (1 - cos(u.y)) nu(dy)``.
Only d = 1 and d = 2 are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ._quad import integrate
from .errors import BadParameter, DivergentMeasure, OriginAtom, QuadratureFailure

SUPPORTED_DIMENSIONS = (1, 2)

_MASS_TOL = 1e-11


def _check_dimension(d):
    if d not in SUPPORTED_DIMENSIONS:
        raise BadParameter(f"dimension must be 1 or 2, got {d!r}")


def sphere_measure(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 points for d = 1)."""
    return 2.0 if d == 1 else 2.0 * math.pi


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Diffusion part
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiffusionMatrix:
    """The matrix ``a`` of the second-order part of the generator."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise BadParameter(f"diffusion matrix must be square, got shape {a.shape}")
        _check_dimension(a.shape[0])
        object.__setattr__(self, "entries", _frozen(a))

    @classmethod
    def zero(cls, d: int) -> "DiffusionMatrix":
        return cls(np.zeros((d, d)))

    @classmethod
    def identity(cls, d: int) -> "DiffusionMatrix":
        return cls(np.eye(d))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.entries)

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.entries - np.diag(np.diag(self.entries)))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.T))

    def eigenvalues(self) -> np.ndarray:
        sym = 0.5 * (self.entries + self.entries.T)
        return np.linalg.eigvalsh(sym)

    def psd_tolerance(self) -> float:
        return 1e-12 * float(np.max(np.abs(self.entries), initial=0.0))

    def is_psd(self) -> bool:
        return bool(self.eigenvalues().min() >= -self.psd_tolerance())

    def quadratic_form(self, u) -> np.ndarray:
        """``a u . u`` for ``u`` of shape ``(..., d)``."""
        u = np.asarray(u, dtype=float)
        return np.einsum("...i,ij,...j->...", u, self.entries, u)

    def lower_bound(self) -> float:
        """Largest ``b`` with ``a >= b I``; positive iff ``a`` is positive definite."""
        return float(self.eigenvalues().min())


# ---------------------------------------------------------------------------
# Levy measures
# ---------------------------------------------------------------------------


class LevyMeasure:
    """Base class for the supported symmetric Levy measures."""

    kind: str = "abstract"
    d: int

    @property
    def is_radial(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class ZeroMeasure(LevyMeasure):
    d: int = 1
    kind = "zero"

    def __post_init__(self):
        _check_dimension(self.d)

    @property
    def is_radial(self) -> bool:
        return True


def _canonical_atoms(locations, weights):
    """Merge coincident atoms, normalise -0.0 and sort lexicographically."""
    merged: dict[tuple, float] = {}
    for y, w in zip(locations, weights):
        key = tuple(float(c) + 0.0 for c in y)
        merged[key] = merged.get(key, 0.0) + float(w)
    keys = sorted(merged)
    locs = np.array(keys, dtype=float).reshape(len(keys), -1)
    wts = np.array([merged[k] for k in keys], dtype=float)
    return locs, wts


@dataclass(frozen=True, eq=False)
class AtomMeasure(LevyMeasure):
    """A finite measure ``sum_j w_j delta_{y_j}``.

    Locations are stored as an ``(m, d)`` array in canonical order, with
    coincident atoms merged, so that symmetry can be checked by exact
    coordinate match.
    """

    locations: np.ndarray
    weights: np.ndarray
    kind = "atoms"

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=float)
        if locs.ndim == 1:
            locs = locs[:, None]
        wts = np.asarray(self.weights, dtype=float).reshape(-1)
        if locs.ndim != 2 or locs.shape[0] != wts.shape[0]:
            raise BadParameter("atom locations and weights have mismatched shapes")
        if locs.shape[0] == 0:
            raise BadParameter("atom measure needs at least one atom; use ZeroMeasure")
        _check_dimension(locs.shape[1])
        if not np.all(np.isfinite(locs)) or not np.all(np.isfinite(wts)):
            raise BadParameter("atom data must be finite")
        if np.any(wts <= 0):
            raise BadParameter("atom weights must be positive")
        locs, wts = _canonical_atoms(locs, wts)
        object.__setattr__(self, "locations", _frozen(locs))
        object.__setattr__(self, "weights", _frozen(wts))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "AtomMeasure":
        """Build from ``[(y, w), ...]`` with scalar or vector ``y``."""
        pairs = list(pairs)
        locs = [np.atleast_1d(np.asarray(y, dtype=float)) for y, _ in pairs]
        return cls(np.array(locs), [w for _, w in pairs])

    @property
    def d(self) -> int:
        return self.locations.shape[1]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def pairs(self) -> list[tuple[tuple, float]]:
        return [(tuple(y), float(w)) for y, w in zip(self.locations, self.weights)]

    def has_origin_atom(self) -> bool:
        return bool(np.any(np.all(self.locations == 0.0, axis=1)))

    def is_symmetric(self) -> bool:
        table = {tuple(y): w for y, w in zip(self.locations, self.weights)}
        for y, w in table.items():
            mirror = tuple(-c + 0.0 for c in y)
            if table.get(mirror) != w:
                return False
        return True


class _RadialMixin:
    """Shared machinery for measures with a radial density ``rho(|y|)``."""

    d: int
    singularity: float
    support_radius: float | None

    @property
    def is_radial(self) -> bool:
        return True

    def density(self, r):
        raise NotImplementedError

    @property
    def outer_limit(self) -> float:
        return np.inf if self.support_radius is None else float(self.support_radius)

    def radial_integral(self, g: Callable[[float], float], a: float, b: float,
                        tol: float = 1e-12) -> float:
        """``int_a^b g(r) rho(r) r^(d-1) dr`` (no sphere factor)."""
        b = min(b, self.outer_limit)
        if b <= a:
            return 0.0
        d = self.d
        value, _ = integrate(lambda r: g(r) * self.density(r) * r ** (d - 1), a, b,
                             epsabs=tol, epsrel=tol)
        return value

    def marginal_density(self, s: float) -> float:
        """Density at ``s > 0`` of the image of nu under ``y -> y_1``."""
        if self.d == 1:
            return float(self.density(s))
        # rho_1(s) = 2 s int_0^inf rho(s sqrt(1 + tau^2)) dtau
        upper = np.inf
        if self.support_radius is not None:
            if s >= self.support_radius:
                return 0.0
            upper = math.sqrt((self.support_radius / s) ** 2 - 1.0)
        value, _ = integrate(lambda tau: self.density(s * math.sqrt(1.0 + tau * tau)),
                             0.0, upper, epsabs=1e-13, epsrel=1e-12)
        return 2.0 * s * value


@dataclass(frozen=True, eq=False)
class StableIsotropic(_RadialMixin, LevyMeasure):
    """Isotropic alpha-stable Levy measure with density ``c |y|^(-d-alpha)``."""

    alpha: float
    scale: float = 1.0
    d: int = 1
    kind = "stable"
    support_radius = None

    def __post_init__(self):
        _check_dimension(self.d)
        if not 0.0 < self.alpha < 2.0:
            raise BadParameter(f"stable index alpha must lie in (0, 2), got {self.alpha}")
        if not self.scale > 0.0:
            raise BadParameter("stable scale must be positive")

    @property
    def singularity(self) -> float:
        return float(self.alpha)

    def density(self, r):
        return self.scale * np.power(r, -self.d - self.alpha)

    def marginal_density(self, s: float) -> float:
        if self.d == 1:
            return float(self.density(s))
        # 2 int_0^inf (1 + tau^2)^(-(2 + alpha)/2) dtau in closed form
        k = math.sqrt(math.pi) * math.gamma(0.5 * (1.0 + self.alpha)) / math.gamma(1.0 + 0.5 * self.alpha)
        return k * self.scale * s ** (-1.0 - self.alpha)


@dataclass(frozen=True, eq=False)
class RadialDensity(_RadialMixin, LevyMeasure):
    """User-supplied radial density ``rho(r)``, ``r = |y| > 0``.

    ``singularity`` is the declared exponent ``s`` with
    ``rho(r) = O(r^(-d-s))`` as ``r -> 0``; ``s < 2`` is the Levy condition
    and ``s <= 0`` means the measure has finite mass.  ``support_radius``
    optionally declares that ``rho`` vanishes beyond that radius.
    ``unbounded_symbol`` declares that the characteristic exponent is known
    to grow without bound (used by the spectrum classifier).
    """

    func: Callable[[float], float]
    singularity: float
    d: int = 1
    support_radius: float | None = None
    unbounded_symbol: bool = False
    label: str = "radial"
    kind = "radial"

    def __post_init__(self):
        _check_dimension(self.d)
        if self.support_radius is not None and not self.support_radius > 0:
            raise BadParameter("support radius must be positive")

    def density(self, r):
        return self.func(r)


# ---------------------------------------------------------------------------
# Triplet and validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LevyTriplet:
    a: DiffusionMatrix
    nu: LevyMeasure

    def __post_init__(self):
        if not isinstance(self.a, DiffusionMatrix):
            object.__setattr__(self, "a", DiffusionMatrix(self.a))

    @classmethod
    def pure_jump(cls, nu: LevyMeasure) -> "LevyTriplet":
        return cls(DiffusionMatrix.zero(nu.d), nu)

    @classmethod
    def gaussian(cls, a) -> "LevyTriplet":
        a = a if isinstance(a, DiffusionMatrix) else DiffusionMatrix(a)
        return cls(a, ZeroMeasure(a.d))

    @property
    def d(self) -> int:
        return self.a.d


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_measure(nu: LevyMeasure) -> list[str]:
    problems = []
    if isinstance(nu, AtomMeasure):
        if nu.has_origin_atom():
            problems.append("atom at the origin")
        if not nu.is_symmetric():
            problems.append("measure not symmetric")
    elif isinstance(nu, (StableIsotropic, RadialDensity)):
        if nu.singularity >= 2:
            problems.append(
                f"singularity exponent {nu.singularity} >= 2 violates the Levy condition"
            )
        else:
            if isinstance(nu, RadialDensity):
                r = np.geomspace(1e-3, 1e3, 61)
                if nu.support_radius is not None:
                    r = r[r < nu.support_radius]
                vals = np.array([nu.density(x) for x in r], dtype=float)
                if not np.all(np.isfinite(vals)) or np.any(vals < 0):
                    problems.append("radial density must be finite and non-negative")
            try:
                value = levy_integral(nu)
                if not np.isfinite(value):
                    problems.append("Levy integral is not finite")
            except (QuadratureFailure, DivergentMeasure) as exc:
                problems.append(f"Levy integral could not be established: {exc}")
    elif not isinstance(nu, ZeroMeasure):
        problems.append(f"unsupported measure type {type(nu).__name__}")
    return problems


def validate_triplet(t: LevyTriplet) -> ValidationReport:
    """Check every structural invariant of a symmetric Levy triplet.

    Returns a report listing each violated invariant; never raises on bad
    data.
    """
    problems = []
    a = t.a
    if not a.is_symmetric():
        problems.append("diffusion matrix not symmetric")
    if not a.is_psd():
        problems.append("diffusion matrix not non-negative definite")
    if a.d != t.nu.d:
        problems.append(f"dimension mismatch: diffusion d={a.d}, measure d={t.nu.d}")
    if a.is_zero and isinstance(t.nu, ZeroMeasure):
        problems.append("degenerate triplet: a = 0 and nu = 0")
    problems.extend(validate_measure(t.nu))
    return ValidationReport(tuple(problems))


def total_mass(nu: LevyMeasure) -> float:
    """Total mass ``nu(R^d)``; ``inf`` when the near-origin integral diverges."""
    if isinstance(nu, ZeroMeasure):
        return 0.0
    if isinstance(nu, AtomMeasure):
        return nu.mass
    if isinstance(nu, StableIsotropic):
        return math.inf
    if isinstance(nu, RadialDensity):
        if nu.singularity > 0:
            return math.inf
        inner = nu.radial_integral(lambda r: 1.0, 0.0, 1.0, tol=_MASS_TOL)
        outer = nu.radial_integral(lambda r: 1.0, 1.0, np.inf, tol=_MASS_TOL)
        return sphere_measure(nu.d) * (inner + outer)
    raise BadParameter(f"unsupported measure type {type(nu).__name__}")


def levy_integral(nu: LevyMeasure) -> float:
    """``int (|y|^2 ^ 1) nu(dy)``, split at ``|y| = 1``."""
    if isinstance(nu, ZeroMeasure):
        return 0.0
    if isinstance(nu, AtomMeasure):
        sq = np.sum(nu.locations ** 2, axis=1)
        return float(np.sum(nu.weights * np.minimum(sq, 1.0)))
    if isinstance(nu, (StableIsotropic, RadialDensity)):
        if nu.singularity >= 2:
            raise DivergentMeasure(
                f"density singularity exponent {nu.singularity} >= 2: "
                "int |y|^2 nu(dy) diverges near the origin"
            )
        inner = nu.radial_integral(lambda r: r * r, 0.0, 1.0, tol=_MASS_TOL)
        outer = nu.radial_integral(lambda r: 1.0, 1.0, np.inf, tol=_MASS_TOL)
        return sphere_measure(nu.d) * (inner + outer)
    raise BadParameter(f"unsupported measure type {type(nu).__name__}")


def symmetrize_atoms(atoms: Sequence[tuple]) -> AtomMeasure:
    """Split each atom ``(y, w)`` into ``(y, w/2)`` and ``(-y, w/2)``.

    Mass-preserving and idempotent; coincident atoms are merged.
    """
    locs, wts = [], []
    for y, w in atoms:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if not np.any(y):
            raise OriginAtom(f"atom at the origin: {tuple(y)}")
        locs += [y, -y]
        wts += [0.5 * float(w), 0.5 * float(w)]
    if not locs:
        raise BadParameter("no atoms given")
    return AtomMeasure(np.array(locs), wts)

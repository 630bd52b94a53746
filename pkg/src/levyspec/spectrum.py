"""Classification of the generator's spectrum and a dense-matrix oracle.

The spectrum of the generator equals the closure of the range of
``-eta``.  Since ``eta`` is continuous with ``eta(0) = 0`` the range is an
interval, so only ``sup eta`` matters: an unbounded exponent gives the half
line ``(-inf, 0]``; a bounded one gives ``[-K, 0]`` with ``K = sup eta``.

On a periodic grid the generator becomes a circulant matrix whose
eigenvalues are exactly the sampled symbol values; :func:`eigen_oracle`
checks this by brute-force diagonalisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AtomOffGrid, BadParameter
from .grid import PeriodicGrid, frequency_lattice
from .measures import AtomMeasure, LevyTriplet, ZeroMeasure
from .symbol import (
    DEFAULT_SEARCH_HALF_WIDTH,
    Symbol,
    SupInfo,
    _atom_sum,
    closed_form_preset,
    maximize_symbol,
    sup_symbol,
)

HALF_LINE = "half_line"
INTERVAL = "interval"
INCONCLUSIVE = "inconclusive"


@dataclass
class SpectrumReport:
    classification: str
    K_hat: float | None
    evidence: dict
    proposition_check: bool
    oracle: dict | None = None

    @property
    def conclusive(self) -> bool:
        return self.classification != INCONCLUSIVE

    def interval(self) -> tuple[float, float]:
        """``(lower, upper)`` endpoints of the reported spectrum."""
        if self.classification == INTERVAL:
            return (-self.K_hat, 0.0)
        return (-math.inf, 0.0)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "K_hat": self.K_hat,
            "evidence": self.evidence,
            "proposition_check": self.proposition_check,
            "oracle": self.oracle,
        }


def classify_spectrum(s: Symbol, search_box: float | None = None,
                      grid_n: int | None = None) -> SpectrumReport:
    """Classify the spectrum as a half line, an interval, or inconclusive.

    Rules, in order: a uniformly elliptic diffusion part (``a >= b I`` with
    ``b > 0``); a closed-form preset known to grow without bound; an
    infinite supremum from :func:`sup_symbol`.  A finite supremum ``K_hat``
    yields the interval ``[-K_hat, 0]``.
    """
    evidence = {"symbol": s.describe()}
    t = s.triplet
    if t is not None and not t.a.is_zero:
        b = t.a.lower_bound()
        if b > 0:
            evidence.update(rule="elliptic_diffusion",
                            per_axis_lower_bounds=[b] * t.d, sup_source="diffusion")
            return _report(HALF_LINE, None, evidence)

    if s.is_closed_form and s.sup_info.is_infinite:
        evidence.update(rule="unbounded_closed_form", sup_source="closed_form")
        return _report(HALF_LINE, None, evidence)

    sup = sup_symbol(s, search_box, grid_n)
    evidence["grid"] = {
        "search_box": DEFAULT_SEARCH_HALF_WIDTH if search_box is None else float(search_box),
        "grid_n": grid_n,
    }
    evidence["sup_info"] = sup.kind
    if sup.is_infinite:
        evidence.update(rule="infinite_sup", sup_source=s.source)
        return _report(HALF_LINE, None, evidence)
    if sup.is_finite:
        evidence.update(rule="finite_sup", sup_source="grid_search",
                        sup_bound=s.sup_info.value)
        return _report(INTERVAL, sup.value, evidence)
    evidence.update(rule="unknown_sup", sup_source="grid_search",
                    sup_lower_bound=sup.value,
                    note="spectrum contains [-sup_lower_bound, 0]; supremum not certified")
    return _report(INCONCLUSIVE, None, evidence)


def _report(classification, K_hat, evidence):
    if classification == INTERVAL:
        ok = K_hat is not None and math.isfinite(K_hat) and K_hat >= 0.0
    else:
        ok = True
    return SpectrumReport(classification, None if K_hat is None else float(K_hat),
                          evidence, ok)


# ---------------------------------------------------------------------------
# Range of the symbol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RangeSummary:
    min: float
    max: float
    gaps: bool
    max_jump: float
    median_spacing: float
    n_points: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def default_u_grid(d: int, half_width: float = 10.0, n: int = 4097) -> np.ndarray:
    """Uniform grid plus geometric points near 0, where fractional symbols are steep."""
    uniform = np.linspace(-half_width, half_width, n)
    near = np.geomspace(1e-8, half_width / n, 64)
    axis = np.unique(np.concatenate([uniform, near, -near]))
    if d == 1:
        return axis[:, None]
    coarse = np.unique(np.concatenate([np.linspace(-half_width, half_width, 129), near, -near]))
    X, Y = np.meshgrid(coarse, coarse, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def range_of_symbol(s: Symbol, u_grid=None, gap_factor: float = 100.0) -> RangeSummary:
    """Summarise the sampled range of ``eta``.

    A gap is flagged when two consecutive distinct sampled values differ by
    more than ``gap_factor`` times the median spacing.  Since ``eta`` is
    continuous the true range has no gaps; a flag means under-sampling.
    """
    pts = default_u_grid(s.d) if u_grid is None else np.asarray(u_grid, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if s.d == 1 and pts.shape[0] < 4096:
        raise BadParameter("range sampling needs at least 4096 points in d = 1")
    vals = np.unique(np.asarray(s.values(pts), dtype=float))
    spacing = np.diff(vals)
    if spacing.size == 0:
        return RangeSummary(float(vals[0]), float(vals[0]), False, 0.0, 0.0, pts.shape[0])
    median = float(np.median(spacing))
    jump = float(spacing.max())
    return RangeSummary(float(vals[0]), float(vals[-1]), bool(jump > gap_factor * median),
                        jump, median, pts.shape[0])


# ---------------------------------------------------------------------------
# Dense eigenvalue oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleReport:
    d: int
    n: int
    h: float
    max_mismatch: float
    max_eigenvalue: float
    min_eigenvalue: float
    stencil_deviation: float
    eigenvalues: np.ndarray = field(repr=False)
    predicted: np.ndarray = field(repr=False)

    @property
    def proposition_check(self) -> bool:
        return self.max_eigenvalue <= 1e-10 * max(1.0, abs(self.min_eigenvalue))

    def to_dict(self) -> dict:
        return {"d": self.d, "n": self.n, "h": self.h, "max_mismatch": self.max_mismatch,
                "max_eigenvalue": self.max_eigenvalue, "min_eigenvalue": self.min_eigenvalue,
                "stencil_deviation": self.stencil_deviation,
                "proposition_check": self.proposition_check}


def _node_offsets(nu: AtomMeasure, h: float) -> np.ndarray:
    m = nu.locations / h
    k = np.rint(m)
    if np.any(np.abs(m - k) > 1e-9 * np.maximum(1.0, np.abs(m))):
        bad = nu.locations[np.any(np.abs(m - k) > 1e-9 * np.maximum(1.0, np.abs(m)), axis=1)]
        raise AtomOffGrid(f"atoms {bad.tolist()} are not multiples of the spacing h={h}")
    return k.astype(int)


def _shift_matrix(g: PeriodicGrid, offset) -> np.ndarray:
    """Matrix of ``f(x) -> f(x + offset * h)`` in storage order."""
    n = g.n
    mats = [np.roll(np.eye(n), int(o), axis=1) for o in offset]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def discretized_generator_matrix(t: LevyTriplet, g: PeriodicGrid) -> np.ndarray:
    """Dense circulant (block-circulant in 2-D) matrix of the grid generator.

    Diffusion uses the symmetric second difference ``(S - 2 I + S^-1) / h^2``
    per axis; each atom contributes ``w (P_y - 2 I + P_-y) / 2``.
    """
    nu = t.nu
    if not isinstance(nu, (AtomMeasure, ZeroMeasure)):
        raise BadParameter("the eigenvalue oracle needs an atom (or zero) jump measure")
    if not t.a.is_diagonal:
        raise BadParameter("the eigenvalue oracle supports diagonal diffusion only")
    if g.d != t.d:
        raise BadParameter("grid and triplet dimensions differ")
    limit = 1024 if g.d == 1 else 64
    if g.n > limit:
        raise BadParameter(f"dense oracle limited to n <= {limit} in d = {g.d}")

    size = g.size
    M = np.zeros((size, size))
    ident = np.eye(size)
    for i in range(g.d):
        a_ii = t.a.entries[i, i]
        if a_ii:
            e = np.zeros(g.d, dtype=int)
            e[i] = 1
            M += a_ii / g.h ** 2 * (_shift_matrix(g, e) - 2.0 * ident + _shift_matrix(g, -e))
    if isinstance(nu, AtomMeasure):
        for k, w in zip(_node_offsets(nu, g.h), nu.weights):
            M += 0.5 * w * (_shift_matrix(g, k) - 2.0 * ident + _shift_matrix(g, -k))
    return M


def discrete_symbol(t: LevyTriplet, g: PeriodicGrid, points: np.ndarray) -> np.ndarray:
    """Stencil symbol: ``(2/h^2) sum_i a_ii (1 - cos(h u_i))`` plus the exact atom part."""
    h = g.h
    diag = np.diag(t.a.entries)
    out = (2.0 / h ** 2) * (2.0 * np.sin(0.5 * h * points) ** 2) @ diag
    if isinstance(t.nu, AtomMeasure):
        out = out + _atom_sum(points, t.nu)
    return out


def eigen_oracle(t: LevyTriplet, g: PeriodicGrid) -> OracleReport:
    """Diagonalise the grid generator densely and compare with ``-eta_discrete``.

    Returns the maximum absolute mismatch between the sorted eigenvalues and
    the sorted values ``-eta_discrete(y_k)`` over the frequency lattice.
    """
    if isinstance(t.nu, AtomMeasure):
        _node_offsets(t.nu, g.h)
    M = discretized_generator_matrix(t, g)
    eig = np.sort(np.linalg.eigvalsh(M))
    lattice = frequency_lattice(g)
    predicted = np.sort(-discrete_symbol(t, g, lattice))
    mismatch = float(np.max(np.abs(eig - predicted)))

    # stencil vs continuum on the low band |u| <= 1
    low = lattice[np.sqrt(np.sum(lattice ** 2, axis=1)) <= 1.0]
    stencil = (2.0 / g.h ** 2) * (2.0 * np.sin(0.5 * g.h * low) ** 2) @ np.diag(t.a.entries)
    exact = np.sum(low ** 2 * np.diag(t.a.entries), axis=1)
    deviation = float(np.max(np.abs(stencil - exact))) if low.size else 0.0
    return OracleReport(g.d, g.n, g.h, mismatch, float(eig[-1]), float(eig[0]), deviation,
                        eig, predicted)


# ---------------------------------------------------------------------------
# Attainment of the 2M bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SharpnessReport:
    attains_2M: bool
    witness: tuple | None
    max_found: float
    two_M: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def atom_sharpness_check(nu: AtomMeasure, search_box: float | None = None,
                         grid_n: int | None = None, tol: float = 1e-9) -> SharpnessReport:
    """Search for ``u`` with ``u.y_j = pi (mod 2 pi)`` for every atom.

    Such ``u`` make ``eta(u) = 2M``.  The witness returned is the one of
    smallest norm (first coordinate non-negative) among the refined grid
    maxima reaching ``2M - tol``.
    """
    if not isinstance(nu, AtomMeasure):
        raise BadParameter("sharpness check applies to atom measures")
    s = closed_form_preset("compound_poisson", d=nu.d, atoms=nu)
    two_M = 2.0 * nu.mass
    K_hat, _, refined = maximize_symbol(s, search_box, grid_n, candidates=512)
    hits = [u for val, u in refined if val >= two_M - tol]
    if not hits:
        return SharpnessReport(False, None, min(K_hat, two_M), two_M)
    hits = [u if (u[0] > 0 or (u[0] == 0 and np.all(u >= 0))) else -u for u in hits]
    best = min(hits, key=lambda u: (float(np.linalg.norm(u)), tuple(u)))
    return SharpnessReport(True, tuple(float(c) for c in best), min(K_hat, two_M), two_M)

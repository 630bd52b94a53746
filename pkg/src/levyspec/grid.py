"""Periodic grids on ``[-L/2, L/2)^d`` and continuum-scaled Fourier transforms.

Transforms use the unitary continuum convention

    f_hat(y) = (2 pi)^(-d/2) int exp(-i x.y) f(x) dx,

discretised by the rectangle rule on the torus:

    F_k = h^d (2 pi)^(-d/2) sum_j exp(-i y_k . x_j) f_j,   y_k = 2 pi k / L,

with ``k = -n/2, ..., n/2 - 1`` per axis (centred ordering).  The discrete
Parseval identity is

    h^d sum_j |f_j|^2 = (2 pi / L)^d sum_k |F_k|^2.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParameter

PHYSICAL = "physical"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class PeriodicGrid:
    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise BadParameter(f"grid dimension must be 1 or 2, got {self.d}")
        n = int(self.n)
        if n != self.n or n < 8 or n & (n - 1):
            raise BadParameter(f"points per axis must be a power of two >= 8, got {self.n}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise BadParameter(f"period must be positive, got {self.L}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def dy(self) -> float:
        """Spacing of the frequency lattice."""
        return 2.0 * math.pi / self.L

    @property
    def scale(self) -> float:
        """Factor ``h^d / (2 pi)^(d/2)`` tying the DFT to the continuum transform."""
        return self.h ** self.d / (2.0 * math.pi) ** (0.5 * self.d)

    def axis(self) -> np.ndarray:
        return -0.5 * self.L + self.h * np.arange(self.n)

    def frequency_axis(self) -> np.ndarray:
        return self.dy * np.arange(-self.n // 2, self.n // 2)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis()] * self.d), indexing="ij"))

    def frequency_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.frequency_axis()] * self.d), indexing="ij"))

    def points(self) -> np.ndarray:
        """Physical nodes as an ``(n^d, d)`` array in storage order."""
        return np.column_stack([m.ravel() for m in self.mesh()])

    def frequency_norms(self) -> np.ndarray:
        """``|y_k|`` over the lattice, shaped like frequency data."""
        return np.sqrt(sum(m * m for m in self.frequency_mesh()))

    def multiplier(self, symbol) -> np.ndarray:
        """Sample a symbol on the frequency lattice, shaped like frequency data."""
        return np.asarray(symbol.values(frequency_lattice(self)), dtype=float).reshape(self.shape)

    def doubled(self) -> "PeriodicGrid":
        """Same spacing, twice the period."""
        return PeriodicGrid(self.d, 2 * self.n, 2.0 * self.L)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on a grid, either in physical or in frequency space."""

    grid: PeriodicGrid
    values: np.ndarray
    space: str = PHYSICAL

    def __post_init__(self):
        if self.space not in (PHYSICAL, FREQUENCY):
            raise BadParameter(f"unknown space {self.space!r}")
        vals = np.asarray(self.values)
        if vals.size != self.grid.size:
            raise BadParameter(
                f"expected {self.grid.size} values for the grid, got {vals.size}"
            )
        vals = vals.reshape(self.grid.shape)
        if vals.dtype.kind not in "fc":
            vals = vals.astype(float)
        object.__setattr__(self, "values", vals)

    @property
    def is_real(self) -> bool:
        return self.values.dtype.kind == "f"

    def real(self) -> "GridFunction":
        return GridFunction(self.grid, np.real(self.values).copy(), self.space)

    def l2_norm(self) -> float:
        """Continuum-weighted L2 norm (``h^d`` or ``(2 pi / L)^d`` weights)."""
        w = self.grid.h if self.space == PHYSICAL else self.grid.dy
        return math.sqrt(w ** self.grid.d * float(np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "GridFunction") -> complex:
        """``<self, other>`` with the conjugate on ``other``."""
        w = self.grid.h if self.space == PHYSICAL else self.grid.dy
        return complex(w ** self.grid.d * np.vdot(other.values, self.values))

    def __add__(self, other):
        return GridFunction(self.grid, self.values + other.values, self.space)

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - other.values, self.space)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * c, self.space)

    __rmul__ = __mul__

    # -- serialisation -----------------------------------------------------

    def to_csv(self) -> str:
        """JSON header line, then ``i0[,i1],re,im`` rows in storage order."""
        g = self.grid
        buf = io.StringIO()
        header = {"d": g.d, "n": g.n, "L": g.L, "space": self.space}
        buf.write(json.dumps(header) + "\n")
        cols = [f"i{k}" for k in range(g.d)] + ["re", "im"]
        buf.write(",".join(cols) + "\n")
        idx = np.indices(g.shape).reshape(g.d, -1).T
        vals = self.values.reshape(-1)
        for ij, v in zip(idx, vals):
            v = complex(v)
            buf.write(",".join(str(int(i)) for i in ij))
            buf.write(f",{v.real:.17g},{v.imag:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        lines = text.strip().splitlines()
        try:
            header = json.loads(lines[0])
            grid = PeriodicGrid(int(header["d"]), int(header["n"]), float(header["L"]))
            space = header.get("space", PHYSICAL)
        except (ValueError, KeyError, IndexError) as exc:
            raise BadParameter(f"bad grid-function header: {exc}") from exc
        data = np.loadtxt(io.StringIO("\n".join(lines[2:])), delimiter=",", ndmin=2)
        if data.shape != (grid.size, grid.d + 2):
            raise BadParameter(f"expected {grid.size} rows of {grid.d + 2} columns")
        values = np.zeros(grid.shape, dtype=complex)
        idx = tuple(data[:, k].astype(int) for k in range(grid.d))
        values[idx] = data[:, grid.d] + 1j * data[:, grid.d + 1]
        if not np.any(values.imag):
            values = values.real.copy()
        return cls(grid, values, space)


def _sign(grid: PeriodicGrid) -> np.ndarray:
    """``(-1)^(k_1 + ... + k_d)``: the phase from centring the nodes at 0."""
    k = np.arange(-grid.n // 2, grid.n // 2)
    s1 = np.where(k % 2 == 0, 1.0, -1.0)
    out = s1
    for _ in range(grid.d - 1):
        out = np.multiply.outer(out, s1)
    return out


def forward_transform(f: GridFunction) -> GridFunction:
    """Continuum-scaled DFT of physical-space data."""
    if f.space != PHYSICAL:
        raise BadParameter("forward transform expects physical-space data")
    g = f.grid
    F = np.fft.fftshift(np.fft.fftn(f.values))
    return GridFunction(g, g.scale * _sign(g) * F, FREQUENCY)


def inverse_transform(F: GridFunction) -> GridFunction:
    """Exact inverse of :func:`forward_transform`."""
    if F.space != FREQUENCY:
        raise BadParameter("inverse transform expects frequency-space data")
    g = F.grid
    f = np.fft.ifftn(np.fft.ifftshift(_sign(g) * F.values)) / g.scale
    return GridFunction(g, f, PHYSICAL)


def frequency_lattice(g: PeriodicGrid) -> np.ndarray:
    """Lattice vectors ``2 pi k / L`` as ``(n^d, d)``, row-major over axes."""
    return np.column_stack([m.ravel() for m in g.frequency_mesh()])


def sample(g: PeriodicGrid, f) -> GridFunction:
    """Evaluate ``f(x)`` (d = 1) or ``f(x, y)`` (d = 2) on the nodes."""
    mesh = g.mesh()
    vals = np.asarray(f(*mesh))
    vals = np.broadcast_to(vals, g.shape).copy()
    return GridFunction(g, vals, PHYSICAL)


def mirror_index(g: PeriodicGrid) -> tuple[np.ndarray, ...]:
    """Index arrays mapping each lattice point ``k`` to ``-k`` (mod n)."""
    i = np.arange(g.n)
    # centred slot j holds k = j - n/2; -k sits at slot (n - j) mod n
    j = (-i) % g.n
    return np.ix_(*([j] * g.d))


def hermitian_defect(F: GridFunction) -> float:
    """``max |F(-k) - conj(F(k))|``; zero for transforms of real data."""
    if F.space != FREQUENCY:
        raise BadParameter("Hermitian symmetry is a property of frequency data")
    mirrored = F.values[mirror_index(F.grid)]
    return float(np.max(np.abs(mirrored - np.conj(F.values))))


def trig_interpolate(f: GridFunction, x: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary points.

    ``x`` has shape ``(N, d)``.  The interpolant is periodic, so points
    outside the fundamental cell wrap automatically.  Real data returns the
    real part (the Nyquist mode then contributes a cosine).
    """
    F = forward_transform(f) if f.space == PHYSICAL else f
    g = f.grid
    coef = (g.dy ** g.d / (2.0 * math.pi) ** (0.5 * g.d)) * F.values.reshape(-1)
    lattice = frequency_lattice(g)
    x = np.asarray(x, dtype=float).reshape(-1, g.d)
    out = np.empty(x.shape[0], dtype=complex)
    for start in range(0, x.shape[0], chunk):
        block = x[start:start + chunk]
        out[start:start + chunk] = np.exp(1j * block @ lattice.T) @ coef
    return out.real if f.is_real else out


def trig_interpolate_shifted(f: GridFunction, offsets: np.ndarray, centres: np.ndarray,
                             chunk: int = 4096) -> np.ndarray:
    """Interpolant of ``f`` at ``centres[c] + offsets[j]``, shape ``(N, C)``.

    Shares the exponentials of the offsets across all centres, which is the
    expensive part when ``N`` is large.
    """
    F = forward_transform(f) if f.space == PHYSICAL else f
    g = f.grid
    coef = (g.dy ** g.d / (2.0 * math.pi) ** (0.5 * g.d)) * F.values.reshape(-1)
    lattice = frequency_lattice(g)
    centres = np.asarray(centres, dtype=float).reshape(-1, g.d)
    right = coef[:, None] * np.exp(1j * lattice @ centres.T)
    offsets = np.asarray(offsets, dtype=float).reshape(-1, g.d)
    out = np.empty((offsets.shape[0], centres.shape[0]), dtype=complex)
    for start in range(0, offsets.shape[0], chunk):
        block = offsets[start:start + chunk]
        out[start:start + chunk] = np.exp(1j * block @ lattice.T) @ right
    return out.real if f.is_real else out

"""Model files: JSON descriptions of a triplet, a symbol and a grid.

Example::

    {
      "dimension": 1,
      "diffusion": [[0.0]],
      "measure": {"type": "atoms", "atoms": [[[1.0], 0.5], [[-1.0], 0.5]]},
      "symbol": {"preset": "compound_poisson"},
      "grid": {"n": 256, "L": 256.0}
    }

See ``docs/model-file.md`` for the full schema.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadParameter, DivergentMeasure, ModelError, UnsupportedMeasure
from .grid import PeriodicGrid
from .measures import (
    AtomMeasure,
    DiffusionMatrix,
    LevyTriplet,
    RadialDensity,
    StableIsotropic,
    ZeroMeasure,
    symmetrize_atoms,
    validate_triplet,
)
from .montecarlo import SamplerSpec
from .symbol import (
    BernsteinFunction,
    Symbol,
    closed_form_preset,
    quadrature_symbol,
)

SYMBOL_PRESETS = ("laplacian", "fractional", "relativistic", "compound_poisson",
                  "bernstein_power", "stable")
RADIAL_FAMILIES = ("exponential", "gaussian", "tempered_stable", "uniform")


@dataclass(frozen=True, eq=False)
class Model:
    triplet: LevyTriplet
    preset: dict | None
    grid: PeriodicGrid
    raw: dict

    @property
    def d(self) -> int:
        return self.triplet.d

    def symbol(self) -> Symbol:
        return build_symbol(self)

    def sampler(self, t: float, N: int, seed: int) -> SamplerSpec:
        return build_sampler(self, t, N, seed)


def _fail(path, msg):
    raise ModelError(f"{path}: {msg}")


def _number(obj, key, path, default=None, positive=False):
    if key not in obj:
        if default is None:
            _fail(f"{path}.{key}", "required field missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(f"{path}.{key}", f"expected a finite number, got {v!r}")
    if positive and not v > 0:
        _fail(f"{path}.{key}", f"must be positive, got {v!r}")
    return float(v)


def _parse_diffusion(raw, d):
    if raw is None:
        return DiffusionMatrix.zero(d)
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        _fail("diffusion", "expected a numeric matrix")
    if arr.ndim == 1 and arr.size == d * d:
        arr = arr.reshape(d, d)  # row-major flat list
    if arr.shape != (d, d):
        _fail("diffusion", f"expected a {d}x{d} matrix, got shape {arr.shape}")
    return DiffusionMatrix(arr)


def _parse_atom(entry, d, path):
    if isinstance(entry, dict):
        loc, w = entry.get("location"), entry.get("weight")
    elif isinstance(entry, (list, tuple)) and len(entry) == 2:
        loc, w = entry
    else:
        _fail(path, "atom must be {location, weight} or [location, weight]")
    loc = np.atleast_1d(np.asarray(loc, dtype=float))
    if loc.shape != (d,):
        _fail(f"{path}.location", f"expected {d} coordinates")
    if isinstance(w, bool) or not isinstance(w, (int, float)) or not w > 0:
        _fail(f"{path}.weight", f"must be a positive number, got {w!r}")
    return loc, float(w)


def _radial_density(spec, d, path):
    family = spec.get("family")
    if family not in RADIAL_FAMILIES:
        _fail(f"{path}.family", f"expected one of {RADIAL_FAMILIES}, got {family!r}")
    c = _number(spec, "scale", path, default=1.0, positive=True)
    support = None
    if family == "exponential":
        rate = _number(spec, "rate", path, default=1.0, positive=True)
        func, s = (lambda r: c * np.exp(-rate * r)), -float(d)
    elif family == "gaussian":
        width = _number(spec, "width", path, default=1.0, positive=True)
        func, s = (lambda r: c * np.exp(-0.5 * (r / width) ** 2)), -float(d)
    elif family == "uniform":
        support = _number(spec, "radius", path, positive=True)
        func, s = (lambda r: c * (np.asarray(r) < support).astype(float)), -float(d)
    else:
        s = _number(spec, "singularity", path)
        rate = _number(spec, "rate", path, default=1.0, positive=True)
        func = lambda r: c * np.power(r, -d - s) * np.exp(-rate * r)  # noqa: E731
    unbounded = spec.get("unbounded", False)
    if not isinstance(unbounded, bool):
        _fail(f"{path}.unbounded", "expected a boolean")
    return RadialDensity(func, singularity=s, d=d, support_radius=support,
                         unbounded_symbol=unbounded, label=family)


def _parse_measure(spec, d):
    if spec is None:
        return ZeroMeasure(d)
    if not isinstance(spec, dict):
        _fail("measure", "expected an object")
    kind = spec.get("type")
    if kind == "zero":
        return ZeroMeasure(d)
    if kind == "atoms":
        entries = spec.get("atoms")
        if not isinstance(entries, list) or not entries:
            _fail("measure.atoms", "expected a non-empty list of atoms")
        atoms = [_parse_atom(e, d, f"measure.atoms[{i}]") for i, e in enumerate(entries)]
        if spec.get("symmetrize", False):
            try:
                return symmetrize_atoms(atoms)
            except BadParameter as exc:
                _fail("measure.atoms", str(exc))
        return AtomMeasure(np.array([a for a, _ in atoms]), [w for _, w in atoms])
    if kind == "stable":
        alpha = _number(spec, "alpha", "measure")
        scale = _number(spec, "scale", "measure", default=1.0, positive=True)
        try:
            return StableIsotropic(alpha, scale, d)
        except BadParameter as exc:
            _fail("measure.alpha", str(exc))
    if kind == "radial":
        return _radial_density(spec, d, "measure")
    _fail("measure.type", f"expected zero|atoms|stable|radial, got {kind!r}")


def _parse_grid(spec, d):
    spec = spec or {}
    n = spec.get("n", 256 if d == 1 else 64)
    L = spec.get("L", 40.0)
    try:
        return PeriodicGrid(d, n, L)
    except (BadParameter, TypeError) as exc:
        _fail("grid", str(exc))


def _parse_preset(spec):
    if spec is None:
        return None
    if not isinstance(spec, dict) or spec.get("preset") not in SYMBOL_PRESETS:
        _fail("symbol.preset", f"expected one of {SYMBOL_PRESETS}")
    return dict(spec)


def parse_model(raw: dict, grid_n: int | None = None, grid_L: float | None = None) -> Model:
    """Turn a decoded model file into a :class:`Model`, or raise ModelError."""
    if not isinstance(raw, dict):
        _fail("$", "model file must be a JSON object")
    d = raw.get("dimension")
    if d not in (1, 2):
        _fail("dimension", f"expected 1 or 2, got {d!r}")
    a = _parse_diffusion(raw.get("diffusion"), d)
    nu = _parse_measure(raw.get("measure"), d)
    t = LevyTriplet(a, nu)
    try:
        report = validate_triplet(t)
    except DivergentMeasure as exc:
        _fail("measure", str(exc))
    if not report.ok:
        _fail("model", "; ".join(report.violations))
    grid_spec = dict(raw.get("grid") or {})
    if grid_n is not None:
        grid_spec["n"] = grid_n
    if grid_L is not None:
        grid_spec["L"] = grid_L
    grid = _parse_grid(grid_spec, d)
    preset = _parse_preset(raw.get("symbol"))
    model = Model(t, preset, grid, raw)
    build_symbol(model)  # surface preset parameter errors at load time
    return model


def load_model(path, grid_n=None, grid_L=None) -> Model:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"{path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_model(raw, grid_n, grid_L)


def _stable_measure(model):
    nu = model.triplet.nu
    if isinstance(nu, StableIsotropic):
        return nu
    p = model.preset or {}
    return StableIsotropic(float(p.get("alpha", np.nan)), float(p.get("scale", 1.0)), model.d)


def build_symbol(model: Model) -> Symbol:
    p, d = model.preset, model.d
    try:
        if p is None:
            return quadrature_symbol(model.triplet)
        name = p["preset"]
        if name == "laplacian":
            return closed_form_preset("laplacian", d=d)
        if name == "fractional":
            return closed_form_preset("fractional", d=d, alpha=p.get("alpha", np.nan))
        if name == "relativistic":
            return closed_form_preset("relativistic", d=d, b=p.get("b", np.nan))
        if name == "compound_poisson":
            nu = model.triplet.nu
            if not isinstance(nu, AtomMeasure):
                _fail("symbol.preset", "compound_poisson needs an atom measure")
            return closed_form_preset("compound_poisson", d=d, atoms=nu)
        if name == "bernstein_power":
            exponent = p.get("exponent", 0.5 * p["alpha"] if "alpha" in p else np.nan)
            return closed_form_preset("bernstein", d=d,
                                      f=BernsteinFunction.power(float(exponent)))
        # "stable": quadrature of the isotropic stable density
        return quadrature_symbol(LevyTriplet.pure_jump(_stable_measure(model)))
    except (BadParameter, TypeError, KeyError) as exc:
        raise ModelError(f"symbol: {exc}") from exc


def build_sampler(model: Model, t: float, N: int, seed: int) -> SamplerSpec:
    p, d = model.preset, model.d
    kw = dict(t=t, N=N, seed=seed)
    name = p["preset"] if p else None
    if name == "laplacian":
        return SamplerSpec.brownian(np.eye(d), **kw)
    if name == "fractional":
        return SamplerSpec.stable(float(p["alpha"]), d=d, **kw)
    if name == "bernstein_power":
        return SamplerSpec.subordinated(build_symbol(model).params["f"], d=d, **kw)
    if name == "relativistic":
        raise UnsupportedMeasure("no sampler for the relativistic preset")
    if name == "stable" or (name is None and isinstance(model.triplet.nu, StableIsotropic)):
        nu = _stable_measure(model)
        s = build_symbol(model)
        e1 = np.zeros((1, d))
        e1[0, 0] = 1.0
        scale = float(s.values(e1)[0]) ** (1.0 / nu.alpha)
        return SamplerSpec.stable(nu.alpha, scale=scale, d=d, **kw)
    return SamplerSpec.from_triplet(model.triplet, **kw)

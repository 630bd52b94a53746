"""``levyspec`` command-line front end.

Exit codes: 0 success, 2 model error, 3 numeric failure, 4 inconclusive
spectrum, 5 statistical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import (
    AtomOffGrid,
    BadParameter,
    DivergentMeasure,
    MismatchedModel,
    ModelError,
    NotFinite,
    QuadratureFailure,
    SpectrumProximity,
    UnsupportedMeasure,
)
from .grid import GridFunction, sample
from .measures import AtomMeasure, ZeroMeasure
from .model import load_model
from .montecarlo import (
    MIN_SAMPLES,
    MCReport,
    sample_increments,
    verify_characteristic_function,
    verify_semigroup_mc,
)
from .operators import (
    GeneratorSpec,
    apply_resolvent,
    apply_semigroup,
    resolvent_multiplier_bound,
    resolvent_residual,
    spectrum_distance,
)
from .spectrum import INCONCLUSIVE, classify_spectrum, eigen_oracle

EXIT_OK = 0
EXIT_MODEL = 2
EXIT_NUMERIC = 3
EXIT_INCONCLUSIVE = 4
EXIT_STATISTICAL = 5

ORACLE_TOL = 1e-10

_MODEL_ERRORS = (ModelError, BadParameter, AtomOffGrid, UnsupportedMeasure,
                 DivergentMeasure, MismatchedModel, NotFinite)
_NUMERIC_ERRORS = (QuadratureFailure, SpectrumProximity)


class _Refused(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _jsonable(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _dump_json(obj) -> str:
    # repr of a float is the shortest string that round-trips exactly
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _direction(arg, d):
    if d == 1:
        return np.array([1.0])
    v = np.array([1.0, 0.0]) if arg is None else np.array([float(c) for c in arg.split(",")])
    if v.shape != (d,) or not np.any(v):
        raise BadParameter(f"--direction needs {d} components, not all zero")
    return v / np.linalg.norm(v)


def cmd_symbol(args, model):
    if args.count < 1:
        raise BadParameter("--count must be positive")
    u = np.linspace(args.u_min, args.u_max, args.count)
    direction = _direction(args.direction, model.d)
    eta = model.symbol().values(u[:, None] * direction[None, :])
    if args.format == "json":
        return _dump_json({"direction": direction, "u": u, "eta": eta}), EXIT_OK
    buf = io.StringIO()
    buf.write("u,eta\n")
    for a, b in zip(u, eta):
        buf.write(f"{_fmt(a)},{_fmt(b)}\n")
    return buf.getvalue(), EXIT_OK


def _oracle_applicable(model):
    t = model.triplet
    if not isinstance(t.nu, (AtomMeasure, ZeroMeasure)):
        return f"no grid stencil for {t.nu.kind} measures"
    if not t.a.is_diagonal:
        return "diffusion matrix is not diagonal"
    if model.preset is not None and model.preset["preset"] not in ("laplacian", "compound_poisson"):
        return f"preset {model.preset['preset']} has no grid stencil"
    return None


def cmd_spectrum(args, model):
    report = classify_spectrum(model.symbol())
    code = EXIT_OK if report.classification != INCONCLUSIVE else EXIT_INCONCLUSIVE
    if args.verify:
        reason = _oracle_applicable(model)
        if reason is None:
            oracle = eigen_oracle(model.triplet, model.grid)
            report.oracle = {**oracle.to_dict(), "tolerance": ORACLE_TOL,
                             "pass": oracle.max_mismatch <= ORACLE_TOL
                             and oracle.proposition_check}
            if not report.oracle["pass"] and code == EXIT_OK:
                code = EXIT_NUMERIC
        else:
            report.oracle = {"skipped": reason}
    return _dump_json(report.to_dict()), code


def _initial_data(args, model):
    if args.initial in (None, "gaussian"):
        return sample(model.grid, lambda *xs: np.exp(-0.5 * sum(x * x for x in xs)))
    try:
        f = GridFunction.from_csv(Path(args.initial).read_text())
    except OSError as exc:
        raise ModelError(f"{args.initial}: {exc}") from exc
    if f.grid != model.grid:
        raise ModelError(f"{args.initial}: grid {f.grid} does not match the model grid")
    return f


def _value_rows(g, values):
    idx = np.indices(g.shape).reshape(g.d, -1).T
    coords = g.points()
    return idx, coords, np.asarray(values).reshape(-1)


def cmd_evolve(args, model):
    if args.steps < 1:
        raise BadParameter("--steps must be positive")
    if args.t < 0:
        raise BadParameter("--t must be non-negative")
    G = GeneratorSpec(model.symbol(), model.grid)
    f0 = _initial_data(args, model)
    times = np.linspace(0.0, args.t, args.steps + 1)
    states = [apply_semigroup(G, float(s), f0) for s in times]
    norms = [s.l2_norm() for s in states]
    g = model.grid
    if args.format == "json":
        return _dump_json({
            "grid": {"d": g.d, "n": g.n, "L": g.L},
            "times": times, "l2_norm": norms,
            "values": [np.real(s.values).reshape(-1) for s in states],
        }), EXIT_OK
    cols = ["t"] + [f"i{k}" for k in range(g.d)] + [f"x{k}" for k in range(g.d)]
    buf = io.StringIO()
    buf.write(",".join(cols + ["value", "l2_norm"]) + "\n")
    for s, state, nrm in zip(times, states, norms):
        idx, coords, vals = _value_rows(g, np.real(state.values))
        for ij, x, v in zip(idx, coords, vals):
            buf.write(_fmt(s) + "," + ",".join(str(int(i)) for i in ij) + ","
                      + ",".join(_fmt(c) for c in x) + f",{_fmt(v)},{_fmt(nrm)}\n")
    return buf.getvalue(), EXIT_OK


def cmd_resolvent(args, model):
    if args.lam is None:
        raise BadParameter("--lambda is required")
    G = GeneratorSpec(model.symbol(), model.grid)
    g = _initial_data(args, model)
    f = apply_resolvent(G, args.lam, g)
    if args.format == "csv":
        return f.real().to_csv() if g.is_real else f.to_csv(), EXIT_OK
    return _dump_json({
        "lambda": args.lam,
        "residual": resolvent_residual(G, args.lam, g, f),
        "multiplier_bound": resolvent_multiplier_bound(G, args.lam),
        "spectrum_distance": spectrum_distance(G, args.lam),
        "l2_norm": f.l2_norm(),
        "grid": {"d": model.grid.d, "n": model.grid.n, "L": model.grid.L},
        "values": np.real(f.values).reshape(-1),
    }), EXIT_OK


def cmd_eigencheck(args, model):
    reason = _oracle_applicable(model)
    if reason is not None:
        raise UnsupportedMeasure(reason)
    oracle = eigen_oracle(model.triplet, model.grid)
    ok = oracle.max_mismatch <= ORACLE_TOL and oracle.proposition_check
    out = {**oracle.to_dict(), "tolerance": ORACLE_TOL, "pass": ok}
    return _dump_json(out), EXIT_OK if ok else EXIT_NUMERIC


def _mc_points(model):
    g = model.grid
    offsets = np.array([0, 4, -8]) * g.h
    if g.d == 1:
        return offsets[:, None]
    return np.column_stack([offsets, offsets[::-1]])


def cmd_mc_verify(args, model):
    if args.samples < MIN_SAMPLES:
        raise _Refused(f"--samples must be at least {MIN_SAMPLES}, got {args.samples}")
    if not args.t > 0:
        raise BadParameter("--t must be positive")
    spec = model.sampler(args.t, args.samples, args.seed)
    X = sample_increments(spec)
    report = MCReport(spec.variant, spec.t, spec.N, spec.seed, params=spec.describe())
    verify_characteristic_function(spec, X, report=report)
    G = GeneratorSpec(model.symbol(), model.grid)
    f = _initial_data(args, model)
    verify_semigroup_mc(spec, G, f, _mc_points(model), samples=X, report=report)
    return _dump_json(report.to_dict()), EXIT_OK if report.passed else EXIT_STATISTICAL


COMMANDS = {
    "symbol": cmd_symbol,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "resolvent": cmd_resolvent,
    "eigencheck": cmd_eigencheck,
    "mc-verify": cmd_mc_verify,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model file (JSON)")
    common.add_argument("--grid-n", type=int, help="points per axis (power of two)")
    common.add_argument("--grid-L", type=float, help="period of the torus")
    common.add_argument("--out", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="levyspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("symbol", parents=[common], help="sample eta along a ray")
    p.add_argument("--u-min", type=float, default=-5.0)
    p.add_argument("--u-max", type=float, default=5.0)
    p.add_argument("--count", type=int, default=101)
    p.add_argument("--direction", help="d = 2 only: comma-separated direction, default 1,0")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("spectrum", parents=[common], help="classify the spectrum")
    p.add_argument("--verify", action="store_true", help="also run the dense eigen oracle")
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("evolve", parents=[common], help="apply the semigroup")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--initial", help="'gaussian' (default) or a grid-function CSV")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("resolvent", parents=[common], help="solve (lambda - A) f = g")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--initial", help="right-hand side: 'gaussian' (default) or a CSV")
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("eigencheck", parents=[common], help="dense eigen oracle")
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("mc-verify", parents=[common], help="Monte Carlo checks")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--initial", help="test function: 'gaussian' (default) or a CSV")
    p.add_argument("--format", choices=("json",), default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = load_model(args.model, args.grid_n, args.grid_L)
        text, code = COMMANDS[args.command](args, model)
    except (_Refused, *_MODEL_ERRORS) as exc:
        print(f"levyspec: error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except _NUMERIC_ERRORS as exc:
        print(f"levyspec: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(text, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())

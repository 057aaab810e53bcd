"""Command-line interface: JSON reports over catalog or user-defined surfaces.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure
(singular point, rank loss, non-convergence), 3 identity verification
failure (``verify`` only).  Every outcome, errors included, is a JSON
document on standard output.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import catalog, expr
from .analysis import surface_data
from .calculus import make_grid, weighted_integral
from .errors import (DomainError, KahlerError, NearComplexError, NonConvergenceError,
                     ParseError, RankError, UndefinedAngleError)
from .identities import DEFAULT_LAMBDA, run_suite
from .lagrangian import maslov_index, parse_loop
from .shrinker import OptimizerConfig, find_critical, get_family

SCHEMA = "kahler-report/1"
NUMERICAL = (DomainError, RankError, NearComplexError, UndefinedAngleError, NonConvergenceError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ JSON output
def _fmt_float(x):
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        x = x + 0.0  # normalise -0.0
    return format(x, ".17g")


def dumps(obj, indent=0):
    """Deterministic JSON with 17-significant-digit floats and NaN as null."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ------------------------------------------------------------------ argument helpers
def parse_grid(text):
    try:
        a, b = text.lower().split("x")
        n, m = int(a), int(b)
    except ValueError:
        raise UsageError(f"grid must look like 32x32, got {text!r}") from None
    if n < 1 or m < 1:
        raise UsageError("grid sizes must be positive")
    return n, m


def parse_numbers(text):
    try:
        return [expr.eval_constant(s) for s in expr.split_arguments(text)]
    except ParseError as exc:
        raise UsageError(f"bad number list {text!r}: {exc}") from None


def resolve_surface(text):
    """ImmersionSpec for ``--surface``: catalog ``name[:args]``, ``file:path`` or a path."""
    if text.startswith("file:"):
        return catalog.load(text[len("file:"):])
    if os.path.isfile(text):
        return catalog.load(text)
    name, _, args = text.partition(":")
    key = catalog.ALIASES.get(name, name)
    if key not in catalog.CATALOG:
        raise UsageError(f"unknown surface {name!r}; use a catalog id, an alias or a file")
    if not args.strip():
        return catalog.build(key)
    if key == "perturbed_torus":
        terms = []
        for chunk in args.split(";"):
            vals = parse_numbers(chunk)
            if len(vals) != 5:
                raise UsageError("perturbation terms are component,m,n,amplitude,phase")
            terms.append(vals)
        return catalog.build(key, terms)
    if key == "holomorphic_graph":
        parts = expr.split_arguments(args)
        if len(parts) != 2:
            raise UsageError("holomorphic graphs take f_re,f_im")
        return catalog.build(key, *parts)
    return catalog.build(key, *parse_numbers(args))


def _grid_for(spec, args):
    n, m = parse_grid(args.grid)
    return make_grid(spec, args.nodes_u or n, args.nodes_v or m, args.rule_u, args.rule_v,
                     args.truncate_radius)


def _surface_info(spec):
    return {"name": spec.name, "catalog_id": spec.catalog_id, "domain": spec.domain,
            "periodic": spec.periodic, "annulus": spec.annulus,
            "description": spec.description or None}


# ------------------------------------------------------------------ commands
def _point_record(data):
    rec = {k: float(v) for k, v in data.scalars().items()}
    rec["g"] = data.g.tolist()
    rec["H_ambient"] = data.H_ambient.tolist()
    rec["h"] = data.h.tolist() if bool(data.adapted) else None
    return rec


ANALYZE_COLUMNS = ("u", "v", "x0", "x1", "x2", "x3", "cos_theta", "beta", "eta_re", "eta_im",
                   "eta_abs", "norm_h_sq", "H3", "H4", "H_norm", "grad_theta_norm",
                   "dbarJM_sq", "shrinker_residual", "gauss_K")


def cmd_analyze(args, out):
    spec = resolve_surface(args.surface)
    if args.at:
        u, v = parse_numbers(args.at) if "," in args.at else (None, None)
        if u is None:
            raise UsageError("--at expects u,v")
        data = surface_data(spec, (u, v))
        payload = {"point": _point_record(data)}
        grid = None
        table = [[float(data.scalars()[c]) for c in ANALYZE_COLUMNS]]
    else:
        qgrid = _grid_for(spec, args)
        u, v, _ = qgrid.points()
        data = surface_data(spec, (u.ravel(), v.ravel()))
        sc = data.scalars()
        table = np.stack([sc[c] for c in ANALYZE_COLUMNS], axis=1).tolist()
        summary = {c: {"min": float(np.nanmin(sc[c])) if np.isfinite(sc[c]).any() else None,
                       "max": float(np.nanmax(sc[c])) if np.isfinite(sc[c]).any() else None}
                   for c in ANALYZE_COLUMNS[2:]}
        payload = {"columns": list(ANALYZE_COLUMNS), "rows": table, "summary": summary}
        grid = qgrid.describe()
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ANALYZE_COLUMNS)
        for row in table:
            w.writerow([_fmt_float(x) if isinstance(x, float) else x for x in row])
        out.write(buf.getvalue())
        return 0, None
    return 0, {"surface": _surface_info(spec), "grid": grid, "payload": payload}


def cmd_verify(args, out):
    spec = resolve_surface(args.surface)
    grid = _grid_for(spec, args)
    report = run_suite(spec, grid, args.tol, args.lam)
    code = 0 if report.all_pass else 3
    return code, {"surface": _surface_info(spec), "grid": grid.describe(),
                  "payload": report.as_dict()}


def cmd_maslov(args, out):
    spec = resolve_surface(args.surface)
    res = maslov_index(spec, parse_loop(args.loop, spec, args.samples))
    return 0, {"surface": _surface_info(spec), "grid": None,
               "payload": {"loop": res.loop, "winding": res.winding, "raw": res.raw,
                           "samples": res.samples}}


def cmd_area(args, out):
    spec = resolve_surface(args.surface)
    grid = _grid_for(spec, args)
    F = weighted_integral(spec, "1", grid)
    return 0, {"surface": _surface_info(spec), "grid": grid.describe(),
               "payload": {"gaussian_area": F}}


def cmd_shrink(args, out):
    family = get_family(args.family)
    init = parse_numbers(args.init) if args.init else list(family.default)
    config = OptimizerConfig(max_iter=args.max_iter, tol=args.tol, fd_step=args.fd_step,
                             grid=parse_grid(args.grid), mode=args.mode)
    result = find_critical(family, init, config)
    payload = result.as_dict()
    payload["param_names"] = list(family.param_names)
    report = {"surface": None, "grid": {"nodes": list(config.grid)}, "payload": payload}
    if not result.converged:
        report["error"] = {"type": "NonConvergenceError",
                           "message": f"|grad F| = {result.grad_norm:.3g} after "
                                      f"{result.iterations} iterations"}
        return 2, report
    return 0, report


def cmd_catalog(args, out):
    entries = []
    for entry in catalog.CATALOG.values():
        entries.append({
            "id": entry.id,
            "aliases": [a for a, k in catalog.ALIASES.items() if k == entry.id],
            "summary": entry.summary,
            "parameters": [{"name": n, "default": d if not isinstance(d, tuple) else
                            [list(t) for t in d], "range": r} for n, d, r in entry.params],
            "domain": entry.domain,
            "periodic": list(entry.periodic),
            "ground_truth": [{"quantity": q, "value": v, "source": p}
                             for q, v, p in entry.ground_truth],
        })
    return 0, {"surface": None, "grid": None, "payload": {"entries": entries}}


def cmd_parse_check(args, out):
    defn = expr.load_surface(args.file)
    return 0, {"surface": None, "grid": None, "payload": {
        "valid": True, "name": defn.name,
        "components": dict(zip(("x1", "y1", "x2", "y2"), (expr.to_text(a)
                                                          for a in defn.components))),
        "domain": defn.domain, "periodic": list(defn.periodic)}}


# ------------------------------------------------------------------ parser
def _add_grid(p, default="32x32"):
    p.add_argument("--grid", default=default, help="node counts NxM (default %(default)s)")
    p.add_argument("--nodes-u", type=int, help="override the node count in u")
    p.add_argument("--nodes-v", type=int, help="override the node count in v")
    rules = ("periodic-trapezoid", "gauss-legendre")
    p.add_argument("--rule-u", choices=rules)
    p.add_argument("--rule-v", choices=rules)
    p.add_argument("--truncate-radius", type=float, default=8.0,
                   help="cut unbounded parameter directions at +-R (default %(default)s)")


def build_parser():
    parser = _Parser(prog="kahler", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="accepted for compatibility; evaluation is vectorised")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("analyze", help="per-point invariants")
    p.add_argument("--surface", required=True)
    p.add_argument("--at", help="single parameter point u,v (overrides the grid)")
    _add_grid(p, "8x8")
    p.add_argument("--csv", action="store_true", help="emit a CSV table instead of JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="identity suite")
    p.add_argument("--surface", required=True)
    _add_grid(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                   help="pinching constant in [0, 1)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("maslov", help="Maslov winding along a loop")
    p.add_argument("--surface", required=True)
    p.add_argument("--loop", required=True)
    p.add_argument("--samples", type=int, default=64)
    p.set_defaults(func=cmd_maslov)

    p = sub.add_parser("area", help="Gaussian area")
    p.add_argument("--surface", required=True)
    _add_grid(p, "64x64")
    p.set_defaults(func=cmd_area)

    p = sub.add_parser("shrink", help="critical point of the Gaussian area in a family")
    p.add_argument("--family", required=True, choices=("product", "scaling", "fourier"))
    p.add_argument("--init")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--grid", default="64x64")
    p.add_argument("--fd-step", type=float, default=1e-5)
    p.add_argument("--mode", choices=("stationary", "ascent"), default="stationary")
    p.set_defaults(func=cmd_shrink)

    p = sub.add_parser("catalog", help="built-in surfaces")
    p.add_argument("action", choices=("list",))
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("parse-check", help="validate a surface definition file")
    p.add_argument("--file", required=True)
    p.set_defaults(func=cmd_parse_check)
    return parser


def _error(exc):
    err = {"type": type(exc).__name__, "message": str(getattr(exc, "message", exc))}
    if isinstance(exc, ParseError):
        err.update(line=exc.line, offset=exc.offset, expected=exc.expected)
    if isinstance(exc, NonConvergenceError) and exc.result is not None:
        err["result"] = exc.result.as_dict() if hasattr(exc.result, "as_dict") else None
    return err


def run(argv=None, out=None):
    """Run the CLI; returns the exit code and writes the report to ``out``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    base = {"schema": SCHEMA, "command": argv}
    try:
        args = build_parser().parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be positive")
        code, report = args.func(args, out)
    except UsageError as exc:
        code, report = 1, {"error": {"type": "UsageError", "message": str(exc)}}
    except NUMERICAL as exc:
        code, report = 2, {"error": _error(exc)}
    except (KahlerError, OSError) as exc:
        code, report = 1, {"error": _error(exc)}
    if report is not None:
        out.write(dumps({**base, **report}) + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line entry point: seeded batch runs with JSON and CSV reports.

Exit codes: 0 when the run's verdict passes, 1 when it fails, 2 on bad input.
Every JSON report carries the run configuration under ``"config"``; the
output is a pure function of that configuration (worker count included via
``NEGCURV_THREADS`` does not change it).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import geodesics, hyperbolicity, kahler, radial
from .errors import DomainError, DomainExited, NegCurvError, SingularityError
from .jets import parse_potential

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _potential(text: str):
    try:
        return parse_potential(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, report: dict, passed: bool, stream) -> int:
    doc = {"config": _config(args), "report": report, "verdict": "pass" if passed else "fail"}
    text = dumps(doc)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stream.write(text)
    return EXIT_PASS if passed else EXIT_FAIL


# -- commands -------------------------------------------------------------------


def cmd_conditions(args, stream) -> int:
    p = _potential(args.potential)
    grid = radial.default_grid(args.rmax, args.points)
    try:
        rep = radial.check_conditions(p, grid)
    except SingularityError as exc:
        return _emit(args, {"potential": p.spec, "error": str(exc)}, False, stream)
    note = None
    try:
        rep.completeness = radial.completeness_integral(p, args.rmax)
    except DomainError as exc:
        # the length element is undefined where (a) fails
        if rep.verdicts["a"]:
            raise
        note = str(exc)
    out = rep.as_dict()
    if note is not None:
        out["completeness"] = {"R_max": args.rmax, "classification": "undefined", "reason": note}
    return _emit(args, out, rep.all_pass and rep.completeness is not None, stream)


def cmd_curvature(args, stream) -> int:
    p = _potential(args.potential)
    rep = kahler.curvature_range_report(p, args.dim, args.radii, args.planes, args.seed)
    passed = all(row.K_max < 0 for row in rep.rows)
    return _emit(args, rep.as_dict(), passed, stream)


def cmd_hyperbolicity(args, stream) -> int:
    try:
        S = hyperbolicity.make_space(args.space)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    rep = hyperbolicity.four_point_delta(S, args.quadruples, args.seed, scale=args.scale)
    T = hyperbolicity.default_triangle(S, args.scale)
    if T is not None:
        rep.triangle_defect = hyperbolicity.thin_triangle_defect(S, T, args.samples_per_side)
    return _emit(args, rep.as_dict(), True, stream)


def _projection(k: int):
    return lambda P: P[..., 2 * k: 2 * k + 2]


def cmd_keylemma(args, stream) -> int:
    P = hyperbolicity.make_space("product-discs")
    D = hyperbolicity.disc4()
    constants = hyperbolicity.SchwarzConstants(c=-2.0, d=-4.0)
    schwarz = [
        hyperbolicity.schwarz_bound_check(
            _projection(k), P, D, None, args.pairs, args.seed, args.scale, L=1.0
        )
        for k in (0, 1)
    ]
    key = hyperbolicity.key_lemma_check(P, constants, args.pairs, args.seed, args.scale, L=args.L)
    report = key.as_dict()
    report["schwarz_projections"] = [s.as_dict() for s in schwarz]
    n_bad = len(key.violations) + sum(len(s.violations) for s in schwarz)
    return _emit(args, report, n_bad == 0, stream)


def cmd_geodesic(args, stream) -> int:
    p = _potential(args.potential)
    dim = 2 * args.dim
    x_cart = np.zeros(dim) if args.start is None else np.asarray(args.start, dtype=float)
    if args.direction is None:
        d_cart = np.eye(dim)[0]
    else:
        d_cart = np.asarray(args.direction, dtype=float)
    if x_cart.size != dim or d_cart.size != dim:
        raise UsageError(f"--from and --dir need {dim} real coordinates for --dim {args.dim}")
    if not np.any(d_cart):
        raise UsageError("--dir must be nonzero")
    G = geodesics.geodesic_metric(p, args.dim)
    try:
        x0 = G.chart(x_cart)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    v0 = geodesics.unit_speed(G, x0, geodesics.chart_vector(G, x_cart, d_cart))
    status = EXIT_PASS
    try:
        path = geodesics.integrate_geodesic(G, x0, v0, args.time, args.steps, check_drift=False)
    except DomainExited as exc:
        print(f"error: {exc}", file=sys.stderr)
        path = exc.path
        status = EXIT_USAGE
    if path is not None:
        if status == EXIT_PASS and path.speed_drift > args.drift_tol:
            print(f"error: speed drift {path.speed_drift:.3e} exceeds {args.drift_tol:g}", file=sys.stderr)
            status = EXIT_FAIL
        _write_trace(args, path, stream)
    if args.json:
        summary = {
            "endpoint": None if path is None else G.cartesian(path.endpoint),
            "speed_drift": None if path is None else path.speed_drift,
            "exited": path is None or path.exited,
        }
        doc = {"config": _config(args), "report": summary,
               "verdict": "pass" if status == EXIT_PASS else "fail"}
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(dumps(doc))
    return status


def _write_trace(args, path, stream):
    pts = path.cartesian()
    dim = pts.shape[1]
    names = [f"x_{k + 1}" for k in range(dim)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *names, "speed"])
    for t, x, s in zip(path.t, pts, path.speeds):
        w.writerow([repr(float(t)), *(repr(float(c)) for c in x), repr(float(s))])
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    elif not args.json:
        stream.write(buf.getvalue())


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="negcurv", description="Seeded curvature, geodesic and hyperbolicity experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", metavar="PATH", help="write the JSON report here instead of stdout")

    sp = sub.add_parser("conditions", help="check the radial curvature conditions and completeness")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--rmax", type=float, default=5.0)
    sp.add_argument("--points", type=int, default=500)
    common(sp, seed=False)
    sp.set_defaults(func=cmd_conditions)

    sp = sub.add_parser("curvature", help="sample curvatures at several radii")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--radii", type=_floats, default=[1.0])
    sp.add_argument("--planes", type=int, default=1000)
    common(sp)
    sp.set_defaults(func=cmd_curvature)

    sp = sub.add_parser("hyperbolicity", help="estimate the four-point delta of a built-in space")
    sp.add_argument("--space", required=True, help=", ".join(hyperbolicity.SPACES))
    sp.add_argument("--scale", type=float, default=10.0)
    sp.add_argument("--quadruples", type=int, default=10000)
    sp.add_argument("--samples-per-side", type=int, default=101)
    common(sp)
    sp.set_defaults(func=cmd_hyperbolicity)

    sp = sub.add_parser("keylemma", help="check the product inequalities on two discs")
    sp.add_argument("--pairs", type=int, default=10000)
    sp.add_argument("--scale", type=float, default=5.0)
    sp.add_argument("--L", type=float, default=None, help="override L = sqrt(2)")
    common(sp)
    sp.set_defaults(func=cmd_keylemma)

    sp = sub.add_parser("geodesic", help="integrate a unit-speed geodesic and write a CSV trace")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--from", dest="start", type=_floats, default=None)
    sp.add_argument("--dir", dest="direction", type=_floats, default=None)
    sp.add_argument("--time", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--drift-tol", type=float, default=1e-6)
    sp.add_argument("--csv", metavar="PATH", help="write the trace here instead of stdout")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_geodesic)
    return parser


def main(argv=None, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name in ("dim", "planes", "quadruples", "pairs", "points"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            print(f"error: --{name} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args, stream)
    except (UsageError, NegCurvError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

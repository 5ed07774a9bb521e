"""Command line front-end.

Exit codes: 0 when every check passed, 1 when a mathematical check failed
(the report lists the failures), 2 for usage, parse and domain errors.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import report
from .errors import (
    DomainError,
    InconsistencyError,
    RKHSGeometryError,
    SpecParseError,
    UndefinedError,
    UnsupportedError,
    ValidationError,
)
from .kernels import Tagged
from .metrics import METRIC_KINDS, inner_distance, metric_function
from .npkernels import ZeroSet, blaschke_product, np_test, zero_set_criteria
from .parsing import canonical, load_json_arg, parse_kernel, parse_point, parse_points, parse_subspace
from .subspaces import delta_sub, monotonicity_report, t_series_check
from .suites import SUITES, run_suite

METRIC_ALIASES = {"rho": "rho_disk", "beta": "beta_disk", "rho-ball": "rho_ball"}


class UsageError(Exception):
    pass


def threads() -> int:
    raw = os.environ.get("RKHS_GEOMETRY_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"RKHS_GEOMETRY_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"RKHS_GEOMETRY_THREADS must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items):
    """``map`` over a thread pool capped by RKHS_GEOMETRY_THREADS; results keep input order."""
    n = threads()
    if n == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def point_out(p):
    if isinstance(p, Tagged):
        return {"side": p.side, "z": point_out(p.point)}
    a = np.asarray(p)
    if a.ndim == 0:
        return complex(a)
    return [complex(v) for v in a.ravel()]


def metric_tag(text):
    tag = METRIC_ALIASES.get(text, text.replace("-", "_"))
    if tag not in METRIC_KINDS:
        raise UsageError(f"unknown metric {text!r}; choose from {', '.join(k.replace('_', '-') for k in METRIC_KINDS)}")
    return tag


def _kernel(args):
    return parse_kernel(args.kernel, base_dir=os.getcwd())


def _undefined(fn):
    try:
        v = float(fn())
    except UndefinedError:
        return None
    return v if math.isfinite(v) else None


# ---------------------------------------------------------------------------
# verbs; each returns (results, failures, csv_matrix or None)
# ---------------------------------------------------------------------------


def cmd_dist_table(args):
    spec = _kernel(args)
    tag = metric_tag(args.metric)
    pts = parse_points(args.points, spec)
    for p in pts:
        spec.check(spec.coerce(p))
    d = metric_function(tag, spec, getattr(spec, "dim", 1))

    def row(i):
        return [0.0 if i == j else _undefined(lambda: d(pts[i], pts[j])) for j in range(len(pts))]

    matrix = ordered_map(row, range(len(pts)))
    res = {
        "verb": "dist-table",
        "kernel": canonical(args.kernel),
        "metric": tag,
        "points": [point_out(p) for p in pts],
        "matrix": matrix,
    }
    return [res], [], matrix


def cmd_identity_check(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]

    def one(name):
        return run_suite(name, seed=args.seed, samples=args.samples, tol=args.tol).as_dict()

    results = ordered_map(one, names)
    failures = [f for r in results for f in r["failures"]]
    rows = [[r["suite"], r["checks"], r["max_error"], r["tolerance"], r["passed"]] for r in results]
    return results, failures, rows


def cmd_geodesic(args):
    spec = _kernel(args)
    tag = metric_tag(args.metric)
    x = parse_point(load_json_arg(args.start), spec)
    y = parse_point(load_json_arg(args.end), spec)
    for p in (x, y):
        spec.check(spec.coerce(p))
    d = metric_function(tag, spec)
    r = inner_distance(d, x, y, cells=args.cells, domain=spec.domain)
    res = {
        "verb": "geodesic",
        "kernel": canonical(args.kernel),
        "metric": tag,
        "from": point_out(x),
        "to": point_out(y),
        "direct": float(d(x, y)),
        "inner": r.value,
        "graph": r.graph_value,
        "converged": r.length.converged,
        "path": [complex(p) for p in r.path],
    }
    return [res], [], None


def _zero_set(args):
    if args.points is not None:
        return ZeroSet("explicit", {"points": [complex(v) for v in parse_points(args.points, parse_kernel("dhb:alpha=1"))]})
    kind, _, rest = args.generator.partition(":")
    params = {}
    for part in filter(None, rest.split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise UsageError(f"generator parameters are key=value, got {part!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"generator parameter {key.strip()!r} is not a number: {val!r}") from None
    return ZeroSet(kind, params, prefix=args.prefix)


def cmd_zeroset(args):
    spec = _kernel(args)
    S = _zero_set(args)
    x0 = parse_point(load_json_arg(args.base_point), spec)
    B = blaschke_product(spec, S, x0)
    rep = B.report
    zeros = rep.points[: args.check_zeros]
    worst = max((abs(B(z)) for z in zeros), default=0.0)
    failures = []
    if worst > 1e-12:
        failures.append({"check": "B vanishes on the prefix zeros", "error": worst})
    res = {
        "verb": "zeroset",
        "kernel": canonical(args.kernel),
        "base_point": complex(x0),
        "count": len(rep.points),
        "truncated": rep.truncated,
        "criterion_sum": rep.criterion_sum,
        "classification": rep.classification,
        "infimum": rep.infimum,
        "max_abs_B_on_zeros": worst,
        "partial_products": rep.partial_products,
    }
    if args.space:
        c = zero_set_criteria(args.space, S)
        res["criteria"] = {
            "space": c.space,
            "blaschke_sum": c.blaschke_sum,
            "blaschke_verdict": c.blaschke_verdict,
            "shapiro_shields_sum": c.shapiro_shields_sum,
            "shapiro_shields_printed_sum": c.shapiro_shields_printed_sum,
            "shapiro_shields_verdict": c.shapiro_shields_verdict,
        }
    return [res], failures, None


def cmd_subspace(args):
    spec = _kernel(args)
    sub = parse_subspace(args.subspace, spec)
    data = load_json_arg(args.pairs)
    if not isinstance(data, list) or not all(isinstance(p, list) and len(p) == 2 for p in data):
        raise ValidationError("pairs must be a JSON list of [x, y] pairs")
    pairs = [(parse_point(a, spec), parse_point(b, spec)) for a, b in data]
    try:
        rep = monotonicity_report(spec, sub, pairs)
    except UnsupportedError:
        rep = None
    rows = []
    for x, y in pairs:
        rows.append({
            "x": complex(x),
            "y": complex(y),
            "delta_J": _undefined(lambda: delta_sub(sub, "J", x, y)),
            "delta_H": _undefined(lambda: metric_function("delta", spec)(x, y)),
            "delta_Jperp": _undefined(lambda: delta_sub(sub, "Jperp", x, y)),
        })
    failures = []
    if rep is not None:
        for r in rep.failures:
            failures.append({"check": f"{rep.claim} ordering", "x": r.x, "y": r.y})
    res = {
        "verb": "subspace",
        "kernel": canonical(args.kernel),
        "subspace": args.subspace,
        "claim": None if rep is None else rep.claim,
        "passed": None if rep is None else rep.passed,
        "rows": rows,
    }
    return [res], failures, None


def cmd_np_test(args):
    spec = _kernel(args)
    pts = parse_points(args.points, spec)
    v = np_test(spec, pts)
    res = {
        "verb": "np-test",
        "kernel": canonical(args.kernel),
        "points": [point_out(p) for p in v.points],
        "is_psd": v.is_psd,
        "min_eig": v.min_eig,
        "witness": None if v.witness is None else [complex(c) for c in v.witness],
        "note": v.note,
    }
    return [res], [], None


def cmd_series_check(args):
    results, failures = [], []
    for t in args.t:
        s = t_series_check(t)
        results.append({
            "verb": "series-check",
            "t": s.t,
            "lhs": s.lhs,
            "rhs": s.rhs,
            "difference": s.difference,
            "lhs_t6": s.lhs_t6,
            "rhs_t6": s.rhs_t6,
        })
        for name, err in (("lhs t^6 = -96", s.lhs_t6_error), ("rhs t^6 = -88", s.rhs_t6_error)):
            if err > args.tol:
                failures.append({"check": name, "t": t, "error": err})
    return results, failures, None


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rkhs-geometry", description="Kernel-induced distances on RKHS domains.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("dist-table", parents=[common], help="pairwise distance matrix")
    s.add_argument("--kernel", required=True)
    s.add_argument("--metric", default="delta")
    s.add_argument("--points", required=True, help="inline JSON list or @file")
    s.set_defaults(func=cmd_dist_table)

    s = sub.add_parser("identity-check", parents=[common], help="run seeded identity suites")
    s.add_argument("--suite", default="all", choices=["all", *SUITES])
    s.add_argument("--samples", type=int, default=None)
    s.add_argument("--tol", type=float, default=None)
    s.set_defaults(func=cmd_identity_check)

    s = sub.add_parser("geodesic", parents=[common], help="inner distance between two points")
    s.add_argument("--kernel", required=True)
    s.add_argument("--metric", default="delta")
    s.add_argument("--from", dest="start", required=True)
    s.add_argument("--to", dest="end", required=True)
    s.add_argument("--cells", type=int, default=48)
    s.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("zeroset", parents=[common], help="generalized Blaschke product of a sequence")
    s.add_argument("--kernel", default="dhb:alpha=1")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--generator", help="geometric:base=B or power:p=P")
    g.add_argument("--points")
    s.add_argument("--base-point", default="0")
    s.add_argument("--prefix", type=int, default=10_000)
    s.add_argument("--space", choices=("hardy", "dirichlet"))
    s.add_argument("--check-zeros", type=int, default=20, help="zeros at which B is evaluated")
    s.set_defaults(func=cmd_zeroset)

    s = sub.add_parser("subspace", parents=[common], help="delta on a subspace and its complement")
    s.add_argument("--kernel", required=True)
    s.add_argument("--subspace", required=True)
    s.add_argument("--pairs", required=True)
    s.set_defaults(func=cmd_subspace)

    s = sub.add_parser("np-test", parents=[common], help="positivity of 1 - 1/K")
    s.add_argument("--kernel", required=True)
    s.add_argument("--points", required=True)
    s.set_defaults(func=cmd_np_test)

    s = sub.add_parser("series-check", parents=[common], help="small-t comparison on the Bergman space")
    s.add_argument("--t", type=float, nargs="+", default=[0.1, 0.9])
    s.add_argument("--tol", type=float, default=0.02)
    s.set_defaults(func=cmd_series_check)
    return p


def _csv_rows(verb, rows):
    if verb == "dist-table":
        return report.render_csv(rows)
    lines = ["suite,checks,max_error,tolerance,passed"]
    for name, n, err, tol, ok in rows:
        lines.append(f"{name},{n},{report._num(err)},{report._num(tol)},{'true' if ok else 'false'}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        results, failures, rows = args.func(args)
        if args.format == "csv":
            if rows is None:
                raise UsageError(f"--format csv is not available for {args.verb}")
            out = _csv_rows(args.verb, rows)
        else:
            out = report.render_report(results)
            if not out.endswith(b"\n"):
                out += b"\n"
    except (UsageError, SpecParseError, DomainError, ValidationError, UnsupportedError, OSError) as exc:
        print(f"rkhs-geometry: error: {exc}", file=sys.stderr)
        return 2
    except InconsistencyError as exc:
        print(f"rkhs-geometry: check failed: {exc}", file=sys.stderr)
        return 1
    except RKHSGeometryError as exc:
        print(f"rkhs-geometry: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(out)
    else:
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    for f in failures:
        print(f"FAILED {report.render_value(f)}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

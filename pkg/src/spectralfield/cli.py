"""``spectralfield`` command line interface.

Subcommands print a JSON report (sorted keys, floats as ``%.17g``, matrices
as row-major nested lists, non-finite floats as ``null``).  Exit codes:
0 success, 1 input error, 2 hypothesis violation or crossing, 3 inconclusive.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import calculus, diagnostics, oracle
from .exceptions import FieldSpecError, InconsistentDerivativeError, SpectralFieldError, UnstableTrackingError
from .fieldspec import load_field
from .polyfield import BUILTINS, builtin_field
from .spectral import ClusterConfig, decompose, kyfan_sum

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_INCONCLUSIVE = 0, 1, 2, 3

GRAD_RTOL = 1e-6
HESS_RTOL = 1e-4
DPROJ_RTOL = 1e-5

GAP_ENV = "SPECTRALFIELD_GAP_TOL"


class InputError(Exception):
    pass


# serialization


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dumps_report(report) -> str:
    """Serialize deterministically with ``%.17g`` floats."""

    def enc(v):
        if v is None:
            return "null"
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, int):
            return str(v)
        if isinstance(v, float):
            return "%.17g" % v if math.isfinite(v) else "null"
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, list):
            return "[" + ", ".join(enc(x) for x in v) + "]"
        if isinstance(v, dict):
            return "{" + ", ".join(f"{json.dumps(k)}: {enc(v[k])}" for k in sorted(v)) + "}"
        raise TypeError(f"cannot serialize {type(v).__name__}")

    return enc(_jsonable(report)) + "\n"


# argument parsing


def parse_csv(text, name="vector"):
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"--{name}: expected comma-separated numbers, got {text!r}") from None


def parse_matrix(text):
    rows = [parse_csv(r, "matrix") for r in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise InputError("--matrix: rows have different lengths")
    return np.vstack(rows)


def cluster_config():
    raw = os.environ.get(GAP_ENV)
    if raw is None:
        return ClusterConfig()
    try:
        return ClusterConfig(float(raw))
    except ValueError:
        raise InputError(f"{GAP_ENV} must be a positive number, got {raw!r}") from None


def resolve_field(args):
    if args.builtin and args.spec:
        raise InputError("give --builtin or --spec, not both")
    if args.builtin:
        return builtin_field(args.builtin)
    if args.spec:
        try:
            return load_field(args.spec)
        except OSError as exc:
            raise InputError(f"cannot read {args.spec}: {exc.strerror}") from None
    raise InputError("a field is required: --builtin NAME or --spec FILE")


def require_point(args, F):
    if args.point is None:
        raise InputError("--point is required")
    x = parse_csv(args.point, "point")
    if x.shape[0] != F.n:
        raise InputError(f"--point has {x.shape[0]} coordinates, field needs {F.n}")
    return x


def require_j(args, F):
    if args.j is None:
        raise InputError("--j is required")
    if not 1 <= args.j <= F.m:
        raise InputError(f"--j must be in [1, {F.m}]")
    return args.j


def vector_arg(args, name, size):
    text = getattr(args, name)
    if text is None:
        return None
    v = parse_csv(text, name)
    if v.shape[0] != size:
        raise InputError(f"--{name} has length {v.shape[0]}, expected {size}")
    return v


def _decomp_dict(decomp):
    return {
        "eigenvalues": decomp.values,
        "s": decomp.s,
        "cluster_gap_used": decomp.cluster_gap_used,
        "gap_margin": decomp.gap_margin,
        "groups": [
            {
                "value": g.value,
                "multiplicity": g.multiplicity,
                "index_range": list(g.index_range),
                "projection": g.projection,
            }
            for g in decomp.groups
        ],
    }


def _index_dict(rep):
    return {
        "j_star_lo": rep.j_star_lo,
        "j_star_hi": rep.j_star_hi,
        "d": rep.d,
        "s_upto_j": rep.s_upto_j,
        "s_total": rep.s_total,
        "inv_mult_sum": rep.inv_mult_sum,
    }


def _rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / (1.0 + np.linalg.norm(a)))


# commands


def cmd_eval(args):
    F = resolve_field(args)
    x = require_point(args, F)
    H = F(x)
    decomp = decompose(H, cluster_config())
    report = {
        "inputs": {"field": F.name, "point": x},
        "outputs": {
            "H": H,
            "decomposition": _decomp_dict(decomp),
            "index_reports": [_index_dict(diagnostics.index_report(decomp, g.index_range[0])) for g in decomp.groups],
        },
    }
    return report, EXIT_OK


def cmd_derive(args):
    F = resolve_field(args)
    x = require_point(args, F)
    j = require_j(args, F)
    e = vector_arg(args, "e", F.n)
    q = vector_arg(args, "q", F.m)
    a = vector_arg(args, "a", F.n)
    b = vector_arg(args, "b", F.n)
    want_grad = args.grad or not (args.hess or args.dproj or args.second)
    if args.dproj and e is None and q is None:
        raise InputError("--dproj needs --e or --q")
    if args.second and (a is None or b is None):
        raise InputError("--second needs --a and --b")

    cfg = cluster_config()
    ctx = calculus.eigen_context(F, x, j, cfg)
    inputs = {"field": F.name, "point": x, "j": j}
    try:
        grad = calculus.grad_lambda(ctx)
    except InconsistentDerivativeError as exc:
        return {
            "inputs": inputs,
            "error": "crossing",
            "message": str(exc),
            "witness": {"point": x, "j": j, "discrepancy": exc.discrepancy,
                        "multiplicity": ctx.d, "distinct_eigenvalues": ctx.decomp.s},
        }, EXIT_VIOLATION

    out, checks = {"eigenvalue": ctx.value, "multiplicity": ctx.d, "group_gap": ctx.decomp.group_gap(j)}, {}
    if want_grad:
        out["grad"] = grad
    if args.hess:
        out["hess"] = calculus.hess_lambda(ctx)
    if args.dproj and e is not None:
        out["dproj"] = calculus.dir_deriv_proj(ctx, e)
        inputs["e"] = e
    if args.dproj and q is not None:
        out["jac_dproj"] = calculus.jac_deriv_proj(ctx, q)
        inputs["q"] = q
    if args.second:
        out["second"] = calculus.second_dir_lambda(ctx, a, b)
        inputs["a"], inputs["b"] = a, b

    report = {"inputs": inputs, "outputs": out, "hypotheses_unverified": True}
    if not args.validate:
        return report, EXIT_OK

    fd = oracle.FDConfig()
    ok = True
    try:
        if want_grad:
            ref = oracle.fd_grad_lambda(F, x, j, fd, cfg)
            checks["grad"] = {"oracle": ref, "discrepancy": _rel_err(grad, ref), "tolerance": GRAD_RTOL}
        if args.hess:
            ref = oracle.fd_hess_lambda(F, x, j, fd, cfg)
            checks["hess"] = {"oracle": ref, "discrepancy": _rel_err(out["hess"], ref), "tolerance": HESS_RTOL}
        if args.dproj and e is not None:
            ref = oracle.fd_dproj(F, x, j, e, fd, cfg)
            checks["dproj"] = {"oracle": ref, "discrepancy": _rel_err(out["dproj"], ref), "tolerance": DPROJ_RTOL}
        if args.second:
            # bilinear form of the oracle Hessian
            ref = float(a @ oracle.fd_hess_lambda(F, x, j, fd, cfg) @ b)
            checks["second"] = {"oracle": ref, "discrepancy": _rel_err(out["second"], ref), "tolerance": HESS_RTOL}
    except UnstableTrackingError as exc:
        report["validation"] = {"error": "unstable_tracking", "message": str(exc)}
        return report, EXIT_INCONCLUSIVE
    for c in checks.values():
        c["passed"] = c["discrepancy"] <= c["tolerance"]
        ok = ok and c["passed"]
    report["validation"] = checks
    report["max_discrepancy"] = max((c["discrepancy"] for c in checks.values()), default=0.0)
    return report, EXIT_OK if ok else EXIT_VIOLATION


def cmd_expand(args):
    F = resolve_field(args)
    x = require_point(args, F)
    j = require_j(args, F)
    cfg = cluster_config()
    ctx = calculus.eigen_context(F, x, j, cfg)
    inputs = {"field": F.name, "point": x, "j": j}
    try:
        model = calculus.taylor2_lambda(ctx)
    except InconsistentDerivativeError as exc:
        return {"inputs": inputs, "error": "crossing", "message": str(exc),
                "witness": {"point": x, "j": j, "discrepancy": exc.discrepancy}}, EXIT_VIOLATION
    out = {"base": model.base, "linear": model.linear, "quadratic": model.quadratic}
    y = vector_arg(args, "y", F.n)
    if y is not None:
        lo, hi = ctx.group.index_range
        actual = float(np.mean(decompose(F(x + y), cfg).values[lo - 1 : hi]))
        predicted = model.predict(y)
        inputs["y"] = y
        out["displacement"] = {"predicted": predicted, "actual": actual, "residual": abs(actual - predicted)}
    if args.steps is not None:
        e = vector_arg(args, "e", F.n)
        if e is None:
            raise InputError("--steps needs --e")
        steps = parse_csv(args.steps, "steps")
        try:
            fit = oracle.fit_expansion_order(F, x, j, e, steps, cfg)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        inputs["e"], inputs["steps"] = e, steps
        out["order_fit"] = {
            "steps": fit.steps,
            "residuals": fit.residuals,
            "fitted_order": fit.fitted_order,
            "exact": fit.exact,
        }
    return {"inputs": inputs, "outputs": out, "hypotheses_unverified": True}, EXIT_OK


def parse_box(text, n):
    vals = parse_csv(text, "box")
    if vals.shape[0] != 2 * n:
        raise InputError(f"--box needs {2 * n} numbers (low,high per axis)")
    region = vals.reshape(n, 2)
    if np.any(region[:, 0] > region[:, 1]):
        raise InputError("--box has low > high")
    return region


def cmd_scan(args):
    F = resolve_field(args)
    j = require_j(args, F)
    if args.box is None:
        raise InputError("--box is required")
    region = parse_box(args.box, F.n)
    grid = [21] * F.n
    if args.grid is not None:
        g = parse_csv(args.grid, "grid")
        if g.shape[0] == 1:
            g = np.repeat(g, F.n)
        if g.shape[0] != F.n or np.any(g < 2) or np.any(g != np.round(g)):
            raise InputError(f"--grid needs {F.n} integer counts >= 2")
        grid = [int(v) for v in g]
    rep = diagnostics.check_equivalence_conditions(F, region, grid, j, cluster_config())
    scan = rep.scan
    report = {
        "inputs": {"field": F.name, "box": region, "grid": list(scan.grid), "j": j},
        "outputs": {
            "verdict": rep.verdict,
            "reason": rep.reason,
            "witness": rep.witness,
            "dimension_constant": rep.dimension_constant,
            "distinct_count_constant": rep.distinct_count_constant,
            "max_projection_jump": rep.max_projection_jump,
            "flagged_edges": rep.flagged_edges,
            "scan": {
                "samples": len(scan.sample_points),
                "constant_dim": scan.constant_dim,
                "min_gap": scan.min_gap,
                "dims_of_j": sorted(set(scan.dims_of_j)),
                "group_counts": sorted(set(scan.group_counts)),
                "crossings": [
                    {"segment": list(c.segment), "bracket": list(c.bracket), "counts": list(c.counts)}
                    for c in scan.crossings
                ],
            },
        },
    }
    code = {diagnostics.SUPPORTED: EXIT_OK, diagnostics.REFUTED: EXIT_VIOLATION}.get(rep.verdict, EXIT_INCONCLUSIVE)
    return report, code


def cmd_kyfan(args):
    if args.k is None:
        raise InputError("--k is required")
    if args.matrix is not None:
        if args.builtin or args.spec:
            raise InputError("give --matrix or a field, not both")
        X = parse_matrix(args.matrix)
        inputs = {"matrix": X}
    else:
        F = resolve_field(args)
        x = require_point(args, F)
        X = F(x)
        inputs = {"field": F.name, "point": x}
    try:
        decomp = decompose(X, cluster_config())
    except SpectralFieldError as exc:
        raise InputError(str(exc)) from None
    if not 0 <= args.k <= decomp.m:
        raise InputError(f"--k must be in [0, {decomp.m}]")
    value, R = kyfan_sum(X, args.k, decomp)
    inputs["k"] = args.k
    out = {"value": value, "minimizer": R, "unique_minimizer": R is not None}
    if args.samples is not None:
        seed = args.seed if args.seed is not None else 0
        brute = oracle.kyfan_bruteforce(X, args.k, args.samples, seed)
        inputs["samples"], inputs["seed"] = args.samples, seed
        out["bruteforce"] = {"value": brute, "excess": brute - value}
    return {"inputs": inputs, "outputs": out}, EXIT_OK


COMMANDS = {"eval": cmd_eval, "derive": cmd_derive, "expand": cmd_expand, "scan": cmd_scan, "kyfan": cmd_kyfan}


def build_parser():
    parser = argparse.ArgumentParser(prog="spectralfield", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    src = parser.add_argument_group("field")
    src.add_argument("--builtin", choices=sorted(BUILTINS))
    src.add_argument("--spec", help="FieldSpec JSON file")
    parser.add_argument("--point")
    parser.add_argument("--j", type=int)
    for name in ("e", "q", "a", "b", "y"):
        parser.add_argument(f"--{name}")
    parser.add_argument("--box", help="low1,high1,low2,high2,...")
    parser.add_argument("--grid", help="samples per axis")
    parser.add_argument("--k", type=int)
    parser.add_argument("--matrix", help="rows separated by ';', entries by ','")
    parser.add_argument("--steps", help="decreasing step sizes")
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    flags = parser.add_argument_group("derive quantities")
    for name in ("grad", "hess", "dproj", "second", "validate"):
        flags.add_argument(f"--{name}", action="store_true")
    parser.add_argument("--out", help="write the report here instead of stdout")
    return parser


def run(argv=None):
    """Parse ``argv`` and run a command; returns ``(report, exit_code, out_path)``.

    ``report`` is ``None`` when argparse rejected the arguments (it has
    already printed usage).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return None, EXIT_INPUT if exc.code else EXIT_OK, None
    try:
        report, code = COMMANDS[args.command](args)
    except FieldSpecError as exc:
        report, code = {"error": "field_spec", "message": str(exc), "line": exc.line, "column": exc.column}, EXIT_INPUT
    except (InputError, SpectralFieldError, ValueError, IndexError, KeyError) as exc:
        report, code = {"error": "input", "message": str(exc)}, EXIT_INPUT
    report = {"command": args.command, "argv": list(argv) if argv is not None else sys.argv[1:], **report}
    return report, code, args.out


def main(argv=None):
    report, code, out = run(argv)
    if report is None:
        return code
    text = dumps_report(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if "error" in report and code == EXIT_INPUT:
        print(f"spectralfield: {report.get('message', report['error'])}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

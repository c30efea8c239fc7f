"""Command-line surface: solve | apply-op | check | residual.

Exit codes are part of the contract: 0 success, 1 input error, 2 solver hit
its iteration budget, 3 solver diverged, 4 residual defect above threshold.
CSV output carries 17 significant digits, so identical inputs (and seed)
reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .grid import SampledPath, lp_norm, w1p_norm
from .lagrangian import check_coercivity, check_convexity, check_regularity
from .residual import first_integral_residual, differential_residual
from .solver import LineSearchError, monitor_coercivity, solve
from .specfile import (
    SpecError,
    build_problem,
    coercivity_certificate,
    convexity_request,
    load_spec,
    regularity_certificates,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MAX_ITERS = 2
EXIT_DIVERGED = 3
EXIT_THRESHOLD = 4

_STATUS_EXIT = {"converged": EXIT_OK, "max_iters": EXIT_MAX_ITERS, "diverged": EXIT_DIVERGED}


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0])
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for i in range(rows):
            f.write(",".join(_fmt(float(c[i])) for c in columns) + "\n")


def _read_csv(path: str):
    with open(path) as f:
        header = f.readline().strip().split(",")
        data = [line.strip().split(",") for line in f if line.strip()]
    try:
        arr = np.asarray([[float(x) for x in row] for row in data])
    except ValueError as e:
        raise SpecError(str(path), f"non-numeric CSV entry: {e}") from None
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise SpecError(str(path), "ragged CSV")
    return header, arr


def _path_from_csv(problem, path_csv: str) -> SampledPath:
    header, arr = _read_csv(path_csv)
    grid = problem.grid
    if arr.shape[0] != grid.n:
        raise SpecError(str(path_csv), f"{arr.shape[0]} rows do not match the grid ({grid.n} nodes)")
    if np.abs(arr[:, 0] - grid.nodes).max() > 1e-9 * (grid.b - grid.a):
        raise SpecError(str(path_csv), "first column does not match the grid nodes")
    d = problem.dim
    if arr.shape[1] < 1 + d:
        raise SpecError(str(path_csv), f"need {d} value columns after t, got {arr.shape[1] - 1}")
    return SampledPath.from_values(grid, arr[:, 1 : 1 + d])


def cmd_solve(args) -> int:
    spec = build_problem(load_spec(args.spec), n=args.n, grad_tol=args.tol, seed=args.seed)
    problem = spec.problem
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        report = solve(problem, spec.solve_options)
    except LineSearchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MAX_ITERS
    u = report.u_star
    grid = problem.grid
    d = problem.dim
    nodal_slope = u.node_derivative()
    Ku = problem.operator.matrix @ u.values
    Kdu = problem.operator.cell_matrix @ u.deriv
    header = ["t"]
    cols = [grid.nodes]
    for label, block in (("u", u.values), ("du", nodal_slope), ("Ku", Ku), ("Kdu", Kdu)):
        for j in range(d):
            header.append(f"{label}{j}")
            cols.append(block[:, j])
    _write_csv(outdir / "solution.csv", header, cols)
    iters = np.arange(len(report.objective_trace), dtype=float)
    _write_csv(
        outdir / "trace.csv",
        ["iter", "objective", "grad_max_norm", "sobolev_norm"],
        [iters, report.objective_trace, report.grad_norm_trace, report.sobolev_norm_trace],
    )
    residual = first_integral_residual(problem, u)
    monitor = monitor_coercivity(report, problem.p)
    optimality = "stationary point"
    if spec.certificates and "convexity" in spec.certificates:
        mode, samples, cseed = convexity_request(spec)
        if mode == "full" and check_convexity(spec.lagrangian, "full", samples=samples,
                                              t_range=(grid.a, grid.b), seed=cseed).passed:
            optimality = "global minimizer (convexity-certified)"
    payload = {
        "status": report.status,
        "exit_code": _STATUS_EXIT[report.status],
        "message": report.message,
        "iterations": report.iterations,
        "objective": report.objective,
        "grad_max_norm": float(report.grad_norm_trace[-1]),
        "sup_norm": lp_norm(u.values, np.inf, grid),
        "sobolev_norm": w1p_norm(u, problem.p),
        "optimality": optimality,
        "coercivity_monitor": {
            "flag": monitor.flag,
            "initial_norm": monitor.initial_norm,
            "max_norm": monitor.max_norm,
        },
        "residual": {
            "constancy_defect": residual.constancy_defect,
            "constant_estimate": [float(x) for x in residual.constant_estimate],
            "endpoint_values": [
                [float(x) for x in residual.endpoint_values[0]],
                [float(x) for x in residual.endpoint_values[1]],
            ],
        },
    }
    with open(outdir / "report.json", "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"{report.status}: objective {report.objective:.12g}, "
          f"gradient max-norm {payload['grad_max_norm']:.3e}, "
          f"residual defect {residual.constancy_defect:.3e}")
    return _STATUS_EXIT[report.status]


def cmd_apply_op(args) -> int:
    spec = build_problem(load_spec(args.spec), n=args.n)
    problem = spec.problem
    header, arr = _read_csv(args.input)
    grid = problem.grid
    if arr.shape[0] != grid.n:
        raise SpecError(str(args.input), f"{arr.shape[0]} rows do not match the grid ({grid.n} nodes)")
    if np.abs(arr[:, 0] - grid.nodes).max() > 1e-9 * (grid.b - grid.a):
        raise SpecError(str(args.input), "first column does not match the grid nodes")
    f = arr[:, 1:]
    if f.shape[1] == 0:
        raise SpecError(str(args.input), "no sample columns after t")
    Kf = problem.operator.matrix @ f
    Kadj = problem.operator.adjoint_matrix @ f
    header_out = ["t"]
    cols = [grid.nodes]
    for label, block in (("K", Kf), ("Kstar", Kadj)):
        for j in range(block.shape[1]):
            header_out.append(f"{label}{j}")
            cols.append(block[:, j])
    _write_csv(Path(args.output), header_out, cols)
    print(f"wrote {args.output} ({f.shape[1]} column(s) through K and K*)")
    return EXIT_OK


def cmd_check(args) -> int:
    spec = build_problem(load_spec(args.spec), n=args.n)
    if spec.certificates is None:
        raise SpecError("certificates", "missing section")
    problem = spec.problem
    t_range = (problem.grid.a, problem.grid.b)
    ok = True

    certs = regularity_certificates(spec)
    reg = check_regularity(certs, problem.p, problem.q, L=spec.lagrangian, t_range=t_range)
    print(reg.summary())
    for note in reg.assumptions:
        print(f"  assumed: {note}")
    ok &= reg.passed

    c0, terms, mode = coercivity_certificate(spec)
    coer = check_coercivity(c0, terms, problem.p, problem.q, mode=mode,
                            L=spec.lagrangian, t_range=t_range)
    print(coer.summary())
    ok &= coer.certified

    mode, samples, cseed = convexity_request(spec)
    conv = check_convexity(spec.lagrangian, mode, samples=samples, t_range=t_range, seed=cseed)
    print(conv.summary())
    ok &= conv.passed

    return EXIT_OK if ok else EXIT_THRESHOLD


def cmd_residual(args) -> int:
    spec = build_problem(load_spec(args.spec), n=args.n)
    problem = spec.problem
    u = _path_from_csv(problem, args.path)
    report = first_integral_residual(problem, u)
    diff = differential_residual(problem, u)
    phi = report.first_integral
    ts = problem.grid.nodes if phi.shape[0] == problem.grid.n else problem.grid.midpoints
    header = ["t"]
    cols = [ts]
    for label, block in (("phi", phi), ("differential", diff)):
        for j in range(block.shape[1]):
            header.append(f"{label}{j}")
            cols.append(block[:, j])
    _write_csv(Path(args.output), header, cols)
    print(f"constancy_defect {report.constancy_defect:.6e} (threshold {args.threshold:g})")
    return EXIT_OK if report.constancy_defect <= args.threshold else EXIT_THRESHOLD


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varker",
        description="Variational problems with kernel operators: solve, check, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--n", type=int, default=None, help="override the grid resolution")

    sp = sub.add_parser("solve", help="minimize the objective and write solution/trace/report")
    sp.add_argument("spec", help="problem description (JSON)")
    sp.add_argument("output", help="output directory")
    common(sp)
    sp.add_argument("--tol", type=float, default=None, help="override the gradient tolerance")
    sp.add_argument("--seed", type=int, default=None, help="override the initial-guess seed")
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("apply-op", help="apply K and K* to sampled columns")
    sp.add_argument("spec")
    sp.add_argument("input", help="CSV with columns t, f0[, f1 ...]")
    sp.add_argument("output", help="CSV to write")
    common(sp)
    sp.set_defaults(fn=cmd_apply_op)

    sp = sub.add_parser("check", help="run the certificate checkers")
    sp.add_argument("spec")
    common(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("residual", help="first-integral verification of a path")
    sp.add_argument("spec")
    sp.add_argument("path", help="CSV with columns t, u0[, u1 ...]")
    sp.add_argument("output", nargs="?", default="residual.csv", help="CSV to write")
    sp.add_argument("--threshold", type=float, default=1e-4,
                    help="largest acceptable constancy defect (default 1e-4)")
    common(sp)
    sp.set_defaults(fn=cmd_residual)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

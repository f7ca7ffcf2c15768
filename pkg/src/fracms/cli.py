"""Command-line entry point.

    fracms run --problem example2 --method multiscale --dT 20 --dt 0.01 --out results/
    fracms reproduce-table table1 --out results/

Exit codes: 0 success, 2 usage error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (Trajectory, error_norms, write_report, write_table,
                       write_trajectory)
from .direct import DirectConfig, direct_solve
from .exceptions import FracMSError
from .fast import StepScheme
from .multiscale import MacroConfig, multiscale_solve
from .problems import PROBLEMS, get_problem
from .tables import TABLES, reproduce_table

EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _step(text: str) -> float:
    """Accept '0.01' as well as fractions like '1/32'."""
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _common(p):
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--avg", choices=("mean", "trapezoid"), default="mean",
                   help="cell averaging rule")
    p.add_argument("--l1", choices=("mean", "integral"), default="mean",
                   help="L1 error convention")
    p.add_argument("--cell-time", choices=("frozen", "absolute"), default="frozen",
                   help="time argument of R inside the cell average")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracms", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one solver on a catalog problem")
    run.add_argument("--problem", required=True, choices=sorted(PROBLEMS))
    run.add_argument("--method", required=True, choices=("direct", "multiscale"))
    run.add_argument("--alpha", type=float)
    run.add_argument("--eps", type=float)
    run.add_argument("--horizon", type=float)
    run.add_argument("--dt", type=_step, required=True, help="micro step, e.g. 1/32")
    run.add_argument("--dT", type=_step, help="macro step (multiscale only)")
    run.add_argument("--tol", type=float, default=1e-5, help="shooting tolerance")
    run.add_argument("--max-cycles", type=int, default=1000,
                     help="shooting cycles allowed per cell")
    run.add_argument("--scheme", choices=("explicit", "implicit"), default="implicit")
    run.add_argument("--stride", type=int, default=32,
                     help="record every k-th micro step (direct only)")
    run.add_argument("--cells", choices=("keep", "discard"), default="keep")
    _common(run)

    tab = sub.add_parser("reproduce-table", help="regenerate a published error table")
    tab.add_argument("which", choices=sorted(TABLES))
    tab.add_argument("--truncate-horizon", type=float, default=None,
                     help="shorter horizon for desk-scale runs (recorded in the file)")
    _common(tab)
    return parser


def _meta(args, **extra):
    meta = {"fracms_version": __version__}
    for key in ("problem", "method", "alpha", "eps", "horizon", "dt", "dT", "tol",
                "max_cycles", "scheme", "cell_time", "avg", "l1", "which", "truncate_horizon"):
        if hasattr(args, key):
            meta[key] = getattr(args, key)
    meta.update(extra)
    return meta


def _run(args) -> int:
    if args.method == "multiscale" and args.dT is None:
        raise _Usage("--dT is required with --method multiscale")
    try:
        problem = get_problem(args.problem, alpha=args.alpha, eps=args.eps,
                              horizon=args.horizon)
        scheme = StepScheme(args.scheme)
        if args.method == "direct":
            cfg = DirectConfig(args.dt, scheme, record_stride=args.stride)
        else:
            cfg = MacroConfig(args.dT, args.dt, args.tol, scheme,
                              cell_time=args.cell_time, averaging=args.avg,
                              keep_cells=args.cells == "keep",
                              max_cycles=args.max_cycles)
    except ValueError as exc:
        raise _Usage(str(exc)) from None

    if args.method == "direct":
        u_traj, v_traj, report = direct_solve(problem, cfg)
    else:
        state, report = multiscale_solve(problem, cfg)
        u_traj = state.slow
        # fast variable at each cell anchor T_{m-1}
        v_traj = Trajectory(state.times[:-1], [c.samples[0] for c in state.cells] if
                            state.cells else np.full(len(state.times) - 1, np.nan), "v")
    if problem.exact_u is not None and args.l1 != "mean":
        report.l1_error, report.linf_error = error_norms(u_traj, problem.exact_u, args.l1)

    meta = _meta(args, alpha=float(problem.alpha), eps=problem.eps,
                 horizon=problem.horizon)
    stem = f"{args.problem}_{args.method}"
    ext = args.format
    write_trajectory(args.out / f"{stem}_u.{ext}", u_traj, meta, ext)
    write_trajectory(args.out / f"{stem}_v.{ext}", v_traj, meta, ext)
    write_report(args.out / f"{stem}_report.{ext}", report, meta, ext)
    print(f"{stem}: l1={report.l1_error} linf={report.linf_error} "
          f"steps={report.steps} wall={report.wall_seconds:.3f}s")
    return 0


def _table(args) -> int:
    result = reproduce_table(args.which, truncate_horizon=args.truncate_horizon,
                             cell_time=args.cell_time, averaging=args.avg, l1=args.l1)
    meta = _meta(args, **result.meta)
    path = write_table(args.out / f"{args.which}.{args.format}", result.rows, meta,
                       args.format)
    for row in result.rows:
        print("{:<10} {:<11} {:>12.5g} {:>12.5g} {}".format(
            row[0], row[1], row[2], row[3], "PASS" if row[4] else "FAIL"))
    print(f"wrote {path}")
    return 0


class _Usage(Exception):
    pass


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        return _table(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"fracms: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracMSError as exc:
        print(f"fracms: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        # grid mismatches are only detected once the solver sees the problem
        parser.print_usage(sys.stderr)
        print(f"fracms: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

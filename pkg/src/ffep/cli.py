"""Command-line entry point.

    ffep <mode> --problem ID --method ID [options]

Exit status: 0 on success, 1 on a numerical failure, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys

from .exceptions import FFEPError, NumericalError
from .harness import (
    MODES,
    ExperimentConfig,
    order_study_output,
    run_energy_study,
    run_integrate,
    run_order_study,
    write_csv,
)
from .methods import METHOD_IDS
from .problems import PROBLEM_IDS


def _h_list(text):
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated step sizes, got {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("step sizes must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ffep", description="Energy-preserving integrators for Poisson systems.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--problem", required=True, choices=PROBLEM_IDS)
    p.add_argument("--method", required=True, choices=METHOD_IDS + ("legendre",))
    p.add_argument("--r", type=int, default=None, help="stage count for --method legendre")
    p.add_argument("--h", type=float, default=0.2, help="step size (integrate, energy-study)")
    p.add_argument("--h-list", type=_h_list, default=None, help="step sizes for order-study (default 0.1/2^i, i=4..7)")
    p.add_argument("--t-end", type=float, default=None, help="final time (default 10 for order-study, 1000 otherwise)")
    p.add_argument("--omega", type=float, default=None, help="fitted frequency (default: problem-specific)")
    p.add_argument("--fp-tol", type=float, default=1e-15)
    p.add_argument("--fp-max-iter", type=int, default=100)
    p.add_argument("--quad-points", type=int, default=None)
    p.add_argument("--decimate", type=int, default=10, help="energy-study: keep every N-th step")
    p.add_argument("--output", default=None, help="CSV path (default: stdout)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t_end = args.t_end
    if t_end is None:
        t_end = 10.0 if args.mode == "order-study" else 1000.0
    try:
        cfg = ExperimentConfig(
            problem=args.problem,
            method=args.method,
            r=args.r,
            h=args.h,
            t_end=t_end,
            omega=args.omega,
            fp_tol=args.fp_tol,
            fp_max_iter=args.fp_max_iter,
            quad_points=args.quad_points,
            decimate=args.decimate,
            h_values=args.h_list,
            output=args.output,
            mode=args.mode,
        )
        if cfg.mode == "integrate":
            out = run_integrate(cfg)
        elif cfg.mode == "energy-study":
            out = run_energy_study(cfg)
        else:
            out = order_study_output(cfg, run_order_study(cfg))
    except NumericalError as exc:
        print(f"ffep: numerical failure: {exc}", file=sys.stderr)
        return 1
    except FFEPError as exc:
        print(f"ffep: {exc}", file=sys.stderr)
        return 2

    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            write_csv(out, fh)
    else:
        write_csv(out, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())

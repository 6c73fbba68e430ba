"""Command line driver for the iteration-count/energy-error tables.

Example::

    fracmg --dim 1 --s 0.15 0.3 --nx 16 32 64 --grading both --out t5.csv
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import ExperimentConfig, run_comparison, run_table, write_results


def _floats(values):
    return [float(v) for item in values for v in str(item).split(",") if v]


def _ints(values):
    return [int(v) for item in values for v in str(item).split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fracmg",
        description="V-cycle multigrid for the weighted extension problem of the "
                    "fractional Laplacian on graded tensor meshes.")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--s", nargs="+", default=["0.15", "0.3", "0.6", "0.8"],
                   help="fractional orders (space or comma separated)")
    p.add_argument("--nx", nargs="+", default=["16", "32", "64", "128", "256", "512"],
                   help="finest Omega intervals per direction")
    p.add_argument("--grading", choices=("original", "modified", "both", "uniform"),
                   default="original")
    p.add_argument("--smoother", choices=("point", "line"), default="line")
    p.add_argument("--m", type=int, default=3, help="pre/post smoothing steps")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--xi-star", type=float, default=0.75)
    p.add_argument("--out", default=None, help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--export-matrices", default=None, metavar="DIR",
                   help="write finest operators and loads in Matrix Market format")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config = ExperimentConfig(
        dim=args.dim, s_values=_floats(args.s), nx_values=_ints(args.nx),
        grading=args.grading, smoother=args.smoother, m=args.m, tol=args.tol,
        max_iter=args.max_iter, xi_star=args.xi_star, seed=args.seed,
        output=args.out, export_matrices=args.export_matrices)
    rows = run_comparison(config) if config.grading == "both" else run_table(config)
    text = write_results(rows, config, args.format)
    if not args.out:
        sys.stdout.write(text)
    return 0 if all(r["converged"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())

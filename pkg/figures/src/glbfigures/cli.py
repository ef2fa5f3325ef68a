"""Batch entry points: plot-regret, plot-runtime, preprocess-covertype."""

import argparse
import sys

from .covertype import preprocess_covertype
from .plots import plot_regret, plot_runtime


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glbfigures",
        description="Figures and arm-set preprocessing for glbandit run CSVs",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    regret_p = subs.add_parser("plot-regret", help="mean regret curves with std bands")
    regret_p.add_argument("csvs", nargs="+")
    regret_p.add_argument("--out", required=True)
    regret_p.add_argument("--title")

    runtime_p = subs.add_parser("plot-runtime", help="log-scale total runtime bars")
    runtime_p.add_argument("csvs", nargs="+")
    runtime_p.add_argument("--out", required=True)
    runtime_p.add_argument("--title")

    cover_p = subs.add_parser(
        "preprocess-covertype", help="cluster raw Cover Type rows into an arm file"
    )
    cover_p.add_argument("raw_csv")
    cover_p.add_argument("out_arm_file")
    cover_p.add_argument("--k", type=int, default=60)
    cover_p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        if args.command == "plot-regret":
            plot_regret(args.csvs, args.out, title=args.title)
        elif args.command == "plot-runtime":
            plot_runtime(args.csvs, args.out, title=args.title)
        elif args.command == "preprocess-covertype":
            preprocess_covertype(args.raw_csv, args.out_arm_file, k=args.k,
                                 seed=args.seed)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

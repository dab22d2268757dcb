"""Command-line front end: `gpj-plot conv` and `gpj-plot density`."""
from __future__ import annotations

import argparse
import sys

from .io import PlotInputError
from .plots import plot_convergence, plot_density


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gpj-plot", description="render solver CSV outputs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_conv = sub.add_parser("conv", help="semilog residual-vs-iteration curves")
    p_conv.add_argument("csvs", nargs="+", help="run-history CSV files")
    p_conv.add_argument("-o", "--out", default="convergence.png")
    p_conv.add_argument("--labels", nargs="*", help="legend labels (one per CSV)")

    p_dens = sub.add_parser("density", help="density heatmap from a field CSV")
    p_dens.add_argument("csv", help="field CSV file")
    p_dens.add_argument("-o", "--out", default="density.png")

    args = parser.parse_args(argv)
    try:
        if args.command == "conv":
            out = plot_convergence(args.csvs, labels=args.labels, out_path=args.out)
        else:
            out = plot_density(args.csv, out_path=args.out)
    except (PlotInputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

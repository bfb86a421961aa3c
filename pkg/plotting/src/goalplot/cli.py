"""Command-line interface: plot curves / plot traj."""

from __future__ import annotations

import argparse
import sys

from .csvio import PlotInputError
from .curves import plot_learning_curves
from .traj import plot_trajectory


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plot", description="Figures from goalbench CSV logs.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curves", help="smoothed learning curves per environment")
    c.add_argument("--in", dest="indir", required=True, help="run directory")
    c.add_argument("--out", required=True, help="output vector image (.svg)")
    c.add_argument("--window", type=int, default=1, help="odd smoothing window")

    t = sub.add_parser("traj", help="state/action trajectory of one episode")
    t.add_argument("--in", dest="infile", required=True, help="episode CSV")
    t.add_argument("--out", required=True, help="output vector image (.svg)")
    t.add_argument("--env", default=None,
                   help="environment name for the goal bands (inferred from "
                        "the run layout when omitted)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "curves":
            written = plot_learning_curves(args.indir, args.out,
                                           window=args.window)
            for path in written:
                print(f"wrote {path}")
        else:
            path, bands = plot_trajectory(args.infile, args.out, env=args.env)
            print(f"wrote {path} ({bands} goal bands)")
    except PlotInputError as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

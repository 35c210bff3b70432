"""Standalone script: trajectory CSVs -> multi-panel Bloch figure."""
from __future__ import annotations

import argparse
import sys

from .csvread import InputError
from .figures import FigureSpec, build_trajectory_figure, save_figure


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-trajectories",
        description="Plot Bloch components from trajectory CSVs",
    )
    parser.add_argument("inputs", nargs="+", help="trajectory CSV paths")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--panels", default="sz,sx",
        help="comma-separated Bloch components, one panel each",
    )
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(
            inputs=tuple(args.inputs),
            output=args.out,
            panels=tuple(p.strip() for p in args.panels.split(",") if p),
        )
        save_figure(build_trajectory_figure(spec), spec.output)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

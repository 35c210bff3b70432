"""Standalone script: distance CSVs -> D(t) figure with shaded backflow."""
from __future__ import annotations

import argparse
import sys

from .csvread import InputError
from .figures import FigureSpec, build_distance_figure, save_figure


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-distance",
        description="Plot trace-distance series from distance CSVs",
    )
    parser.add_argument("inputs", nargs="+", help="distance CSV paths")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(inputs=tuple(args.inputs), output=args.out)
        save_figure(build_distance_figure(spec), spec.output)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

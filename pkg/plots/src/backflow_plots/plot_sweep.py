"""Standalone script: sweep CSVs -> N versus alpha figure."""
from __future__ import annotations

import argparse
import sys

from .csvread import InputError
from .figures import FigureSpec, build_sweep_figure, save_figure


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-sweep",
        description="Plot N(alpha) curves, one per omega_c, from sweep CSVs",
    )
    parser.add_argument("inputs", nargs="+", help="sweep CSV paths")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(inputs=tuple(args.inputs), output=args.out)
        save_figure(build_sweep_figure(spec), spec.output)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

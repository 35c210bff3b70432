#!/usr/bin/env python3
"""Analytic-model regime map: N(alpha) tables for several omega_c.

Drives the CLI sweep so the output CSV is exactly what plot-sweep
consumes, then prints the alpha -> 0 limit for each omega_c.
"""
import argparse
import pathlib
import sys

from backflow.cli import main as backflow

DEFAULT_ALPHAS = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", default=DEFAULT_ALPHAS)
    ap.add_argument("--omega-cs", default="10,20,40", dest="omega_cs")
    ap.add_argument("--out", default="regime_map.csv")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    rc = backflow([
        "sweep", "--solver", "analytic", "--alphas", args.alphas,
        "--omega-cs", args.omega_cs, "--jobs", str(args.jobs),
        "--out", args.out,
    ])
    if rc != 0:
        sys.exit(rc)
    print(f"sweep table written to {pathlib.Path(args.out).resolve()}")
    for omega_c in args.omega_cs.split(","):
        print(f"--- omega_c = {omega_c} ---")
        rc = backflow(["limit", "--omega-c", omega_c])
        if rc != 0:
            sys.exit(rc)


if __name__ == "__main__":
    main()

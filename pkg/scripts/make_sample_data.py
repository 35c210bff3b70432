#!/usr/bin/env python3
"""Regenerate the sample CSVs shipped under plots/sample_data.

Everything goes through the backflow CLI so the files are exactly what
a user would produce: three trajectory files spanning the coherent,
incoherent, and localized regimes, one measured distance file, and one
analytic sweep table. Runtime is a few minutes (two exact runs at
n_modes = 200).
"""
import argparse
import pathlib
import sys

from backflow.cli import main as backflow

EXACT_ARGS = [
    "--omega-c", "20", "--t-max", "10", "--dt", "0.1",
    "--modes", "200", "--n-exc", "2",
]


def run(argv):
    rc = backflow(argv)
    if rc != 0:
        sys.exit(f"backflow {' '.join(argv)} exited with {rc}")


def main():
    default_dest = (
        pathlib.Path(__file__).resolve().parents[1] / "plots" / "sample_data"
    )
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default=str(default_dest))
    args = parser.parse_args()
    dest = pathlib.Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)

    coherent = dest / "sample_traj_coherent.csv"
    run([
        "simulate", "--solver", "analytic", "--alpha", "0.1",
        "--omega-c", "20", "--t-max", "10", "--out", str(coherent),
    ])
    run([
        "simulate", "--solver", "exact", "--alpha", "0.7", *EXACT_ARGS,
        "--out", str(dest / "sample_traj_incoherent.csv"),
    ])
    run([
        "simulate", "--solver", "exact", "--alpha", "1.4", *EXACT_ARGS,
        "--out", str(dest / "sample_traj_localized.csv"),
    ])
    run([
        "measure", str(coherent),
        "--out", str(dest / "sample_distance.csv"),
    ])
    run([
        "sweep", "--solver", "analytic",
        "--alphas", "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45",
        "--omega-cs", "10,20,40",
        "--out", str(dest / "sample_sweep.csv"),
    ])
    print(f"sample data written to {dest}")


if __name__ == "__main__":
    main()

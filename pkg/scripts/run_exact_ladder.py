#!/usr/bin/env python3
"""Excitation-ladder convergence experiment for the exact backend.

Propagates a rung table at one (alpha, omega_c), prints per-rung N,
adjacent-rung sigma_z deviations, and the ladder verdict (same rule as
convergence_scan, computed here so each rung propagates only once).
Each rung keeps the horizon below its own bath recurrence time
2 pi n_modes / omega_max; the default ladder refines the excitation
cap first (the dominant error axis), then the discretization span at
fixed mode density.

The default point (0.1, 20) takes roughly 15 minutes single-core.
"""
import argparse
import math
import time

import numpy as np

from backflow.analytic import weak_coupling_params
from backflow.exact import FockTruncation, PropagatorConfig, propagate
from backflow.measure import nonmarkovianity, trace_distance_sigma_z
from backflow.model import ModelConfig, OhmicSpectralDensity, discretize_bath

# (n_modes, omega_max multiplier of omega_c, n_exc)
DEFAULT_RUNGS = [(150, 4.5, 2), (150, 4.5, 3), (200, 6.0, 3)]


def build_rung(alpha, omega_c, n_modes, span, n_exc, dt, t_max):
    bath = discretize_bath(
        OhmicSpectralDensity(alpha=alpha, omega_c=omega_c),
        n_modes, span * omega_c,
    )
    return (
        ModelConfig(delta=1.0, bath=bath),
        FockTruncation(max_total_excitations=n_exc),
        PropagatorConfig(dt=dt, t_max=t_max),
    )


def sigma_z_deviation(a, b):
    horizon = min(a.t[-1], b.t[-1])
    coarse, fine = (a, b) if len(a.t) <= len(b.t) else (b, a)
    keep = coarse.t <= horizon + 1e-12
    interp = np.interp(coarse.t[keep], fine.t, fine.sz)
    return float(np.max(np.abs(coarse.sz[keep] - interp)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--omega-c", type=float, default=20.0, dest="omega_c")
    ap.add_argument("--t-max", type=float, default=10.0, dest="t_max")
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--tol", type=float, default=5e-3)
    args = ap.parse_args()

    tail = None
    if 0.0 < args.alpha < 0.5:
        p = weak_coupling_params(args.alpha, args.omega_c)
        tail = (p.gamma, p.delta_tilde)

    trajectories = []
    for m, span, nx in DEFAULT_RUNGS:
        t_rec = 2.0 * math.pi * m / (span * args.omega_c)
        note = ""
        if t_rec < args.t_max:
            note = "  [warning: horizon exceeds t_rec, late data unphysical]"
        print(f"rung ({m} modes, omega_max = {span:g} omega_c, "
              f"n_exc = {nx}): t_rec = {t_rec:.2f}{note}", flush=True)
        rung = build_rung(
            args.alpha, args.omega_c, m, span, nx, args.dt, args.t_max
        )
        t0 = time.time()
        traj = propagate(*rung)
        trajectories.append(traj)
        series, _ = trace_distance_sigma_z(traj, 1.0)
        rep = nonmarkovianity(series, eps=args.eps, tail_model=tail)
        print(f"  {time.time() - t0:6.0f} s   N = {rep.n_value:.5f} "
              f"({len(rep.intervals)} intervals)", flush=True)

    deviations = [
        sigma_z_deviation(a, b)
        for a, b in zip(trajectories, trajectories[1:])
    ]
    print(f"adjacent-rung sigma_z deviations: "
          f"{[f'{d:.2e}' for d in deviations]}")
    hits = [i for i, d in enumerate(deviations) if d < args.tol]
    if hits:
        print(f"ladder converged at rung {hits[0] + 1} (tol = {args.tol:g})")
    else:
        print(f"ladder NOT converged at tol = {args.tol:g}; "
              "the last rung is the best effort")


if __name__ == "__main__":
    main()

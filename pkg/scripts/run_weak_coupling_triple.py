#!/usr/bin/env python3
"""Three-route comparison of the backflow measure at one (alpha, omega_c).

Prints N from the resummed closed form, the sampled analytic
trajectory, and TCL2; --exact adds the excitation-truncated run
(minutes at the default n_modes=200, n_exc=3). The default point
(0.1, 20) is the weak-coupling benchmark.
"""
import argparse

from backflow.analytic import (
    analytic_trajectory,
    resummed_nonmarkovianity,
    weak_coupling_params,
)
from backflow.measure import nonmarkovianity, trace_distance_sigma_z
from backflow.tcl2 import tcl2_propagate


def measured(traj, eps, tail):
    series, _ = trace_distance_sigma_z(traj, 1.0)
    return nonmarkovianity(series, eps=eps, tail_model=tail)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--omega-c", type=float, default=20.0, dest="omega_c")
    ap.add_argument("--t-max", type=float, default=30.0, dest="t_max")
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument(
        "--exact", action="store_true",
        help="include the exact run (minutes)",
    )
    ap.add_argument("--modes", type=int, default=200)
    ap.add_argument("--omega-max", type=float, default=None, dest="omega_max")
    ap.add_argument("--n-exc", type=int, default=3, dest="n_exc")
    ap.add_argument(
        "--exact-t-max", type=float, default=10.0, dest="exact_t_max",
        help="separate horizon for the exact run (mind the bath "
        "recurrence time 2 pi n_modes / omega_max)",
    )
    args = ap.parse_args()

    p = weak_coupling_params(args.alpha, args.omega_c)
    tail = (p.gamma, p.delta_tilde)
    resummed, window = resummed_nonmarkovianity(p)
    print(f"alpha = {args.alpha}, omega_c = {args.omega_c}, "
          f"delta_tilde = {p.delta_tilde:.6f}, gamma = {p.gamma:.6f}")
    print(f"{'route':<22} {'N':>12} {'intervals':>10} {'horizon':>9} "
          f"{'converged':>10}")
    print(f"{'resummed closed form':<22} {resummed:>12.6f} {'-':>10} "
          f"{'inf':>9} {'-':>10}")

    rep = measured(
        analytic_trajectory(p, dt=0.01, t_max=args.t_max), args.eps, tail
    )
    print(f"{'analytic trajectory':<22} {rep.n_value:>12.6f} "
          f"{len(rep.intervals):>10} {rep.horizon:>9.1f} "
          f"{str(rep.converged):>10}")

    rep = measured(
        tcl2_propagate(1.0, args.alpha, args.omega_c, t_max=args.t_max),
        args.eps, tail,
    )
    print(f"{'TCL2':<22} {rep.n_value:>12.6f} {len(rep.intervals):>10} "
          f"{rep.horizon:>9.1f} {str(rep.converged):>10}")

    if args.exact:
        from backflow.exact import FockTruncation, PropagatorConfig, propagate
        from backflow.model import (
            ModelConfig,
            OhmicSpectralDensity,
            discretize_bath,
        )

        bath = discretize_bath(
            OhmicSpectralDensity(alpha=args.alpha, omega_c=args.omega_c),
            args.modes, args.omega_max,
        )
        traj = propagate(
            ModelConfig(delta=1.0, bath=bath),
            FockTruncation(max_total_excitations=args.n_exc),
            PropagatorConfig(dt=0.1, t_max=args.exact_t_max),
        )
        rep = measured(traj, args.eps, tail)
        label = f"exact ({args.modes}, {args.n_exc})"
        print(f"{label:<22} {rep.n_value:>12.6f} {len(rep.intervals):>10} "
              f"{rep.horizon:>9.1f} {str(rep.converged):>10}")


if __name__ == "__main__":
    main()

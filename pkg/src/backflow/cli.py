"""Command line driver.

Four subcommands: `simulate` writes a Bloch trajectory CSV for the
spin-up initial state, `measure` turns a trajectory CSV into a trace
distance CSV plus a JSON summary, `sweep` tabulates N over a (omega_c,
alpha) grid, and `limit` prints the alpha -> 0 closed form next to the
resummed value at alpha = 1e-4.

Configuration comes from an optional `key = value` file plus flags
(flags win). Exit codes: 0 success, 2 configuration or domain error,
3 numerical failure, 4 I/O or schema error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .analytic import (
    analytic_trajectory,
    nonmarkovianity_alpha_zero,
    resummed_nonmarkovianity,
    weak_coupling_params,
)
from .csvio import (
    format_float,
    read_trajectory,
    write_distance,
    write_sweep,
    write_trajectory,
)
from .errors import (
    ConfigError,
    DomainError,
    NumericalError,
    ResourceError,
    SchemaError,
    ShapeError,
)
from .measure import BlochTrajectory, nonmarkovianity, trace_distance_sigma_z
from .tcl2 import tcl2_propagate

__all__ = [
    "RunConfig",
    "SweepSpec",
    "parse_config",
    "cmd_simulate",
    "cmd_measure",
    "cmd_sweep",
    "cmd_limit",
    "main",
]

SOLVERS = ("exact", "tcl2", "analytic")

# only the exact backend reads these; others warn when they are set
EXACT_ONLY_FIELDS = ("n_modes", "omega_max", "n_exc", "krylov_dim")

# grid defaults per solver: exact runs are priced per step, the closed
# forms are cheap enough for a long horizon and a fine grid
_T_MAX_DEFAULT = {"analytic": 30.0, "tcl2": 30.0, "exact": 10.0}
_DT_DEFAULT = {"analytic": 0.01, "tcl2": 1e-3, "exact": 0.1}


@dataclass
class RunConfig:
    """Resolved configuration for one simulation run.

    t_max, dt and omega_max stay None until parse_config fills in the
    solver-dependent defaults (omega_max None means 6 omega_c, resolved
    by the bath discretizer).
    """

    solver: str
    alpha: float | None = None
    omega_c: float | None = None
    delta: float = 1.0
    t_max: float | None = None
    dt: float | None = None
    n_modes: int = 200
    omega_max: float | None = None
    n_exc: int = 2
    krylov_dim: int = 20
    eps_sigma: float = 1e-4
    out: str | None = None


@dataclass
class SweepSpec:
    """Grid for cmd_sweep: omega_c outer, alpha inner (row-major)."""

    alphas: tuple[float, ...]
    omega_cs: tuple[float, ...]
    solver: str
    base: RunConfig

    def __post_init__(self):
        if len(self.alphas) == 0:
            raise ConfigError("sweep requires a non-empty alphas list")
        if len(self.omega_cs) == 0:
            raise ConfigError("sweep requires a non-empty omega_cs list")

    def points(self) -> list[tuple[float, float]]:
        return [(a, w) for w in self.omega_cs for a in self.alphas]


_CONFIG_TYPES = {
    "solver": str,
    "alpha": float,
    "omega_c": float,
    "delta": float,
    "t_max": float,
    "dt": float,
    "n_modes": int,
    "omega_max": float,
    "n_exc": int,
    "krylov_dim": int,
    "eps_sigma": float,
    "out": str,
}


def _read_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: dict = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(
                f"{path}:{lineno}: expected `key = value`, got {line.strip()!r}"
            )
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_TYPES:
            raise ConfigError(
                f"{path}:{lineno}: unknown key {key!r}; valid keys: "
                + ", ".join(sorted(_CONFIG_TYPES))
            )
        caster = _CONFIG_TYPES[key]
        try:
            values[key] = caster(value)
        except ValueError as exc:
            raise ConfigError(
                f"{path}:{lineno}: value for {key!r} must be "
                f"{caster.__name__}, got {value!r}"
            ) from exc
    return values


def _validate_config(cfg: RunConfig, require_point: bool) -> None:
    if cfg.solver not in SOLVERS:
        raise ConfigError(
            f"unknown solver {cfg.solver!r}; valid solvers: "
            + ", ".join(SOLVERS)
        )
    if require_point:
        if cfg.alpha is None:
            raise ConfigError("alpha is required (config key or --alpha)")
        if cfg.omega_c is None:
            raise ConfigError("omega_c is required (config key or --omega-c)")
    if cfg.alpha is not None and not cfg.alpha >= 0:
        raise ConfigError(f"alpha must be >= 0, got {cfg.alpha}")
    if cfg.omega_c is not None and not cfg.omega_c > 0:
        raise ConfigError(f"omega_c must be > 0, got {cfg.omega_c}")
    if not cfg.delta > 0:
        raise ConfigError(f"delta must be > 0, got {cfg.delta}")
    if not cfg.dt > 0:
        raise ConfigError(f"dt must be > 0, got {cfg.dt}")
    if not cfg.t_max >= cfg.dt:
        raise ConfigError(f"t_max must be >= dt, got t_max={cfg.t_max}")
    if cfg.n_modes < 1:
        raise ConfigError(f"n_modes must be >= 1, got {cfg.n_modes}")
    if cfg.omega_max is not None and not cfg.omega_max > 0:
        raise ConfigError(f"omega_max must be > 0, got {cfg.omega_max}")
    if cfg.n_exc < 0:
        raise ConfigError(f"n_exc must be >= 0, got {cfg.n_exc}")
    if cfg.krylov_dim < 2:
        raise ConfigError(f"krylov_dim must be >= 2, got {cfg.krylov_dim}")
    if not cfg.eps_sigma >= 0:
        raise ConfigError(f"eps_sigma must be >= 0, got {cfg.eps_sigma}")


def parse_config(
    path: str | None,
    overrides: dict | None = None,
    *,
    require_point: bool = True,
) -> RunConfig:
    """Merge a config file with flag overrides into a RunConfig.

    Flags override file values; t_max and dt defaults are filled in per
    solver. Fields only read by other solvers trigger a warning on the
    diagnostic stream. require_point=False skips the alpha/omega_c
    presence check (sweeps supply them per grid point).

    Raises
    ------
    ConfigError
        Malformed line, unknown key, bad value (with line number),
        missing solver, or out-of-range field.
    """
    values = _read_config_file(path) if path else {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    values.update(overrides)
    if "solver" not in values:
        raise ConfigError(
            "no solver configured; pick one of exact, tcl2, analytic "
            "(config key `solver` or --solver)"
        )
    cfg = RunConfig(**values)
    if cfg.t_max is None and cfg.solver in _T_MAX_DEFAULT:
        cfg.t_max = _T_MAX_DEFAULT[cfg.solver]
    if cfg.dt is None and cfg.solver in _DT_DEFAULT:
        cfg.dt = _DT_DEFAULT[cfg.solver]
    _validate_config(cfg, require_point)
    if cfg.solver != "exact":
        for key in EXACT_ONLY_FIELDS:
            if key in values:
                sys.stderr.write(
                    f"warning: {key} is only read by the exact solver "
                    f"and is ignored for solver={cfg.solver}\n"
                )
    return cfg


def _run_solver(cfg: RunConfig) -> BlochTrajectory:
    """Dispatch one spin-up simulation to the configured backend."""
    if cfg.solver == "analytic":
        p = weak_coupling_params(cfg.alpha, cfg.omega_c, cfg.delta)
        return analytic_trajectory(p, dt=cfg.dt, t_max=cfg.t_max)
    if cfg.solver == "tcl2":
        return tcl2_propagate(
            cfg.delta, cfg.alpha, cfg.omega_c, dt=cfg.dt, t_max=cfg.t_max
        )
    # exact backend imported lazily: it drags in the jit compiler
    from .exact import FockTruncation, PropagatorConfig, propagate
    from .model import ModelConfig, OhmicSpectralDensity, discretize_bath

    bath = discretize_bath(
        OhmicSpectralDensity(alpha=cfg.alpha, omega_c=cfg.omega_c),
        cfg.n_modes,
        cfg.omega_max,
    )
    model = ModelConfig(delta=cfg.delta, bath=bath)
    trunc = FockTruncation(max_total_excitations=cfg.n_exc)
    pcfg = PropagatorConfig(
        dt=cfg.dt, t_max=cfg.t_max, krylov_dim=cfg.krylov_dim
    )
    return propagate(model, trunc, pcfg)


def _tail_model_from_meta(meta) -> tuple[float, float] | None:
    """Weak-coupling (gamma, delta_tilde) when the metadata supports it."""
    alpha = meta.get("alpha")
    omega_c = meta.get("omega_c")
    delta = meta.get("delta", 1.0)
    if not isinstance(alpha, (int, float)) or not isinstance(
        omega_c, (int, float)
    ):
        return None
    if not (0.0 < float(alpha) < 0.5 and float(omega_c) > 0):
        return None
    p = weak_coupling_params(float(alpha), float(omega_c), float(delta))
    return (p.gamma, p.delta_tilde)


def cmd_simulate(cfg: RunConfig) -> int:
    """Run one simulation and write the trajectory CSV; returns 0."""
    if cfg.out is None:
        raise ConfigError(
            "simulate needs an output path (config key `out` or --out)"
        )
    traj = _run_solver(cfg)
    write_trajectory(cfg.out, traj)
    return 0


def cmd_measure(
    path: str,
    out: str,
    delta: float | None = None,
    eps: float = 1e-4,
    tail_gamma: float | None = None,
    tail_delta_tilde: float | None = None,
) -> int:
    """Measure a trajectory CSV: distance CSV plus a JSON summary line.

    delta falls back to the trajectory metadata; the geometric tail
    model is taken from the explicit pair of flags when given, else
    inferred from the metadata when 0 < alpha < 0.5, else the crude
    D(horizon) bound is used.
    """
    if out is None:
        raise ConfigError("measure needs an output path (--out)")
    if (tail_gamma is None) != (tail_delta_tilde is None):
        raise ConfigError(
            "tail model needs both --tail-gamma and --tail-delta-tilde"
        )
    traj = read_trajectory(path)
    if delta is None:
        delta = traj.meta.get("delta")
        if not isinstance(delta, (int, float)):
            raise ConfigError(
                "delta not found in the trajectory metadata; pass --delta"
            )
    if tail_gamma is not None:
        tail = (tail_gamma, tail_delta_tilde)
    else:
        tail = _tail_model_from_meta(traj.meta)
    series, diagnostic = trace_distance_sigma_z(traj, float(delta))
    report = nonmarkovianity(series, eps=eps, tail_model=tail)
    meta = dict(traj.meta)
    meta["eps_sigma"] = eps
    write_distance(out, series, meta)
    summary = {
        "n_value": report.n_value,
        "n_intervals": len(report.intervals),
        "horizon": report.horizon,
        "tail_estimate": report.tail_estimate,
        "converged": report.converged,
        "sigma_y_diagnostic": diagnostic,
    }
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def _sweep_point(payload: dict) -> dict:
    """One sweep grid point; failures land in the status column."""
    cfg = RunConfig(**payload)
    row = {
        "alpha": cfg.alpha,
        "omega_c": cfg.omega_c,
        "solver": cfg.solver,
        "n_value": math.nan,
        "n_intervals": math.nan,
        "horizon": math.nan,
        "converged": False,
        "status": "ok",
    }
    try:
        traj = _run_solver(cfg)
        series, _ = trace_distance_sigma_z(traj, cfg.delta)
        report = nonmarkovianity(
            series, eps=cfg.eps_sigma, tail_model=_tail_model_from_meta(traj.meta)
        )
    except Exception as exc:
        row["status"] = f"{type(exc).__name__}: {exc}"
        return row
    row["n_value"] = report.n_value
    row["n_intervals"] = len(report.intervals)
    row["horizon"] = report.horizon
    row["converged"] = report.converged
    return row


def cmd_sweep(spec: SweepSpec, jobs: int = 1) -> int:
    """Tabulate N over the grid; rows in enumeration order; returns 0."""
    if spec.base.out is None:
        raise ConfigError(
            "sweep needs an output path (config key `out` or --out)"
        )
    if jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {jobs}")
    payloads = []
    for alpha, omega_c in spec.points():
        d = dataclasses.asdict(spec.base)
        d["alpha"] = alpha
        d["omega_c"] = omega_c
        d["out"] = None
        payloads.append(d)
    if jobs == 1:
        rows = [_sweep_point(p) for p in payloads]
    else:
        # executor.map preserves input order, keeping rows deterministic
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    meta = {
        "solver": spec.base.solver,
        "delta": spec.base.delta,
        "t_max": spec.base.t_max,
        "dt": spec.base.dt,
        "eps_sigma": spec.base.eps_sigma,
    }
    if spec.base.solver == "exact":
        meta.update(
            n_modes=spec.base.n_modes,
            omega_max=spec.base.omega_max,
            n_exc=spec.base.n_exc,
            krylov_dim=spec.base.krylov_dim,
        )
    write_sweep(spec.base.out, rows, meta)
    return 0


def cmd_limit(omega_c: float, delta: float = 1.0) -> int:
    """Print the alpha -> 0 closed form and the resummed N at 1e-4."""
    limit = nonmarkovianity_alpha_zero(omega_c, delta)
    p = weak_coupling_params(1e-4, omega_c, delta)
    resummed, _ = resummed_nonmarkovianity(p)
    sys.stdout.write(f"alpha_zero_limit = {format_float(limit)}\n")
    sys.stdout.write(f"resummed_alpha_1e-4 = {format_float(resummed)}\n")
    return 0


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--solver", choices=SOLVERS)
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--omega-c", type=float, dest="omega_c")
    sub.add_argument("--delta", type=float)
    sub.add_argument("--t-max", type=float, dest="t_max")
    sub.add_argument("--dt", type=float)
    sub.add_argument("--modes", type=int, dest="n_modes")
    sub.add_argument("--omega-max", type=float, dest="omega_max")
    sub.add_argument("--n-exc", type=int, dest="n_exc")
    sub.add_argument("--krylov-dim", type=int, dest="krylov_dim")
    sub.add_argument("--eps", type=float, dest="eps_sigma")
    sub.add_argument("--out")


def _overrides_from_args(args: argparse.Namespace) -> dict:
    keys = (
        "solver alpha omega_c delta t_max dt n_modes omega_max n_exc "
        "krylov_dim eps_sigma out"
    ).split()
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def _parse_list(text: str, flag: str) -> tuple[float, ...]:
    items = [s for s in (part.strip() for part in text.split(",")) if s]
    try:
        return tuple(float(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated numbers") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="backflow",
        description="Trace-distance non-Markovianity toolkit "
        "for the unbiased spin-boson model",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_sim = subs.add_parser("simulate", help="run one solver, write a CSV")
    _add_run_flags(p_sim)

    p_meas = subs.add_parser("measure", help="trajectory CSV -> distance CSV")
    p_meas.add_argument("input", help="trajectory CSV path")
    p_meas.add_argument("--delta", type=float)
    p_meas.add_argument("--eps", type=float, dest="eps_sigma", default=1e-4)
    p_meas.add_argument("--out")
    p_meas.add_argument("--tail-gamma", type=float, dest="tail_gamma")
    p_meas.add_argument(
        "--tail-delta-tilde", type=float, dest="tail_delta_tilde"
    )

    p_sweep = subs.add_parser("sweep", help="tabulate N over a grid")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--alphas", help="comma-separated alpha list")
    p_sweep.add_argument(
        "--omega-cs", dest="omega_cs", help="comma-separated omega_c list"
    )
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_lim = subs.add_parser("limit", help="print the alpha -> 0 limit")
    p_lim.add_argument("--omega-c", type=float, dest="omega_c", required=True)
    p_lim.add_argument("--delta", type=float, default=1.0)

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "simulate":
        cfg = parse_config(args.config, _overrides_from_args(args))
        return cmd_simulate(cfg)
    if args.command == "measure":
        return cmd_measure(
            args.input,
            out=args.out,
            delta=args.delta,
            eps=args.eps_sigma,
            tail_gamma=args.tail_gamma,
            tail_delta_tilde=args.tail_delta_tilde,
        )
    if args.command == "sweep":
        if args.alphas is None:
            raise ConfigError("sweep requires --alphas")
        if args.omega_cs is None:
            raise ConfigError("sweep requires --omega-cs")
        overrides = _overrides_from_args(args)
        base = parse_config(args.config, overrides, require_point=False)
        spec = SweepSpec(
            alphas=_parse_list(args.alphas, "--alphas"),
            omega_cs=_parse_list(args.omega_cs, "--omega-cs"),
            solver=base.solver,
            base=base,
        )
        return cmd_sweep(spec, jobs=args.jobs)
    if args.command == "limit":
        if not args.omega_c > 0:
            raise ConfigError(f"omega_c must be > 0, got {args.omega_c}")
        return cmd_limit(args.omega_c, args.delta)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    """Console entry point; maps error classes onto exit codes."""
    try:
        args = _build_parser().parse_args(argv)
        return _dispatch(args)
    except (ConfigError, DomainError, ResourceError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (NumericalError, ShapeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except (SchemaError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 4

"""Time propagation of the joint spin-bath state and Bloch recording.

Observables are evaluated on the fly from the two spin blocks
(u = up, d = down amplitudes over bath configurations):

    <sigma_x> = 2 Re <u|d>,  <sigma_y> = 2 Im <u|d>,
    <sigma_z> = |u|^2 - |d|^2

so the full state history is never stored. With H = delta sigma_x
(decoupled bath) this yields sigma_z = cos(2 delta t) and
sigma_y = -sin(2 delta t), fixing the sigma_z' = 2 delta sigma_y
convention shared with the other backends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, NumericalError, ResourceError, ShapeError
from ..measure import BlochTrajectory
from ..model import ModelConfig
from .basis import ExcitationBasis, FockTruncation
from .hamiltonian import MEMORY_BUDGET_BYTES, HamiltonianAction, build_hamiltonian_action
from .steppers import ChebyshevStepper, _krylov_step_raw

__all__ = [
    "JointState",
    "PropagatorConfig",
    "ScanReport",
    "initial_state",
    "propagate",
    "convergence_scan",
    "KRYLOV_DIM_CROSSOVER",
]

# above this joint dimension the reorthogonalization cost of the Krylov
# stepper loses to the Chebyshev recurrence
KRYLOV_DIM_CROSSOVER = 200_000


class JointState:
    """Joint amplitudes over (spin block, bath configuration).

    Spin-major layout: the first basis.dimension entries are the
    spin-up block, the rest spin-down. Construction checks the unit
    norm (1e-9) and the length, keeping every propagated state inside
    the unitary contract.
    """

    __slots__ = ("amplitudes", "basis")

    def __init__(self, amplitudes, basis: ExcitationBasis, _validate: bool = True):
        amp = np.asarray(amplitudes, dtype=np.complex128)
        if _validate:
            if amp.shape != (2 * basis.dimension,):
                raise ShapeError(
                    f"amplitudes must have length {2 * basis.dimension}, "
                    f"got {amp.shape}"
                )
            nrm = float(np.linalg.norm(amp))
            if not math.isfinite(nrm) or abs(nrm - 1.0) > 1e-9:
                raise NumericalError(f"state norm {nrm!r} deviates from 1")
        self.amplitudes = amp
        self.basis = basis

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def bloch(self) -> tuple[float, float, float]:
        """(sigma_x, sigma_y, sigma_z) expectation values."""
        nb = self.basis.dimension
        u = self.amplitudes[:nb]
        d = self.amplitudes[nb:]
        ud = np.vdot(u, d)
        return (
            2.0 * ud.real,
            2.0 * ud.imag,
            float(np.vdot(u, u).real - np.vdot(d, d).real),
        )


@dataclass(frozen=True)
class PropagatorConfig:
    """Grid and stepper parameters for one propagation.

    stepper: "auto" picks Krylov below KRYLOV_DIM_CROSSOVER joint
    dimensions and Chebyshev above; "krylov"/"chebyshev" force the
    choice. chebyshev_tol bounds the series truncation per step.
    """

    dt: float
    t_max: float
    krylov_dim: int = 20
    krylov_tol: float = 1e-10
    stepper: str = "auto"
    chebyshev_tol: float = 1e-12

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.t_max >= self.dt:
            raise ConfigError(f"t_max must be >= dt, got {self.t_max}")
        if self.krylov_dim < 2:
            raise ConfigError(f"krylov_dim must be >= 2, got {self.krylov_dim}")
        if not self.krylov_tol > 0 or not self.chebyshev_tol > 0:
            raise ConfigError("stepper tolerances must be > 0")
        if self.stepper not in ("auto", "krylov", "chebyshev"):
            raise ConfigError(
                f"stepper must be one of auto/krylov/chebyshev, got {self.stepper!r}"
            )


def initial_state(spin_up: bool, basis: ExcitationBasis) -> JointState:
    """Factorized spin (up/down) x bath-vacuum state."""
    amp = np.zeros(2 * basis.dimension, dtype=np.complex128)
    amp[0 if spin_up else basis.dimension] = 1.0
    return JointState(amp, basis, _validate=False)


def propagate(
    cfg: ModelConfig,
    trunc: FockTruncation,
    pcfg: PropagatorConfig,
    spin_up: bool = True,
    track_energy: bool = False,
    memory_budget: float = MEMORY_BUDGET_BYTES,
) -> BlochTrajectory:
    """Unitary propagation on the truncated sector, Bloch recording.

    Records (sigma_x, sigma_y, sigma_z) on the uniform grid k*dt,
    k = 0..round(t_max/dt). track_energy adds one extra H application
    per grid point and reports max |<H>(t) - <H>(0)| in the metadata
    (key "energy_drift") alongside "norm_drift".

    Raises
    ------
    ResourceError
        If the truncated working set exceeds the memory budget.
    NumericalError
        On norm loss beyond 1e-8 or non-finite amplitudes.
    """
    h = build_hamiltonian_action(cfg, trunc, memory_budget=memory_budget)
    stepper = pcfg.stepper
    if stepper == "auto":
        stepper = "krylov" if h.dim <= KRYLOV_DIM_CROSSOVER else "chebyshev"
    if stepper == "krylov":
        krylov_bytes = (pcfg.krylov_dim + 1) * h.dim * 16
        if krylov_bytes > memory_budget:
            raise ResourceError(
                f"krylov workspace for joint dimension {h.dim} needs "
                f"~{krylov_bytes / 1e9:.2f} GB (budget "
                f"{memory_budget / 1e9:.2f} GB); use stepper='chebyshev'"
            )

    n_steps = int(round(pcfg.t_max / pcfg.dt))
    t = np.arange(n_steps + 1) * pcfg.dt
    nb = h.basis.dimension
    psi = initial_state(spin_up, h.basis).amplitudes

    sx = np.empty(n_steps + 1)
    sy = np.empty(n_steps + 1)
    sz = np.empty(n_steps + 1)
    norm_dev = 0.0
    energy0 = h.expectation(psi) if track_energy else 0.0
    energy_drift = 0.0

    cheb = ChebyshevStepper(h, pcfg.dt, tol=pcfg.chebyshev_tol) \
        if stepper == "chebyshev" else None

    for k in range(n_steps + 1):
        if k > 0:
            if cheb is not None:
                psi = cheb.step(psi)
            else:
                psi = _krylov_step_raw(h, psi, pcfg.dt, pcfg.krylov_dim,
                                       pcfg.krylov_tol)
        u = psi[:nb]
        d = psi[nb:]
        ud = np.vdot(u, d)
        nu = np.vdot(u, u).real
        nd = np.vdot(d, d).real
        sx[k] = 2.0 * ud.real
        sy[k] = 2.0 * ud.imag
        sz[k] = nu - nd
        dev = abs(nu + nd - 1.0)
        if not math.isfinite(dev) or dev > 1e-8:
            raise NumericalError(
                f"norm deviated by {dev:.3e} at t={t[k]:.6g} (unitarity lost)"
            )
        norm_dev = max(norm_dev, dev)
        if track_energy:
            energy_drift = max(energy_drift, abs(h.expectation(psi) - energy0))

    sd = cfg.bath.source
    meta = {
        "solver": "exact",
        "alpha": sd.alpha,
        "omega_c": sd.omega_c,
        "delta": cfg.delta,
        "n_modes": len(cfg.bath.modes),
        "omega_max": cfg.bath.omega_max,
        "n_exc": trunc.max_total_excitations,
        "per_mode_cap": trunc.per_mode_cap,
        "dt": pcfg.dt,
        "stepper": stepper,
        "spin_up": spin_up,
        "norm_drift": norm_dev,
    }
    if track_energy:
        meta["energy_drift"] = energy_drift
    return BlochTrajectory(t=t, sx=sx, sy=sy, sz=sz, meta=meta)


@dataclass(frozen=True)
class ScanReport:
    """Per-rung deviations and the convergence verdict of a ladder scan."""

    deviations: tuple[float, ...]
    converged: bool
    rung_index: int
    tol: float


def _rung_deviation(coarse: BlochTrajectory, fine: BlochTrajectory) -> float:
    """max_t |sigma_z difference| on the common grid (finer trajectory
    interpolated onto the coarser one, horizons intersected)."""
    if coarse.grid_step < fine.grid_step:
        coarse, fine = fine, coarse
    horizon = min(coarse.t[-1], fine.t[-1])
    tq = coarse.t[coarse.t <= horizon + 1e-12]
    return float(np.max(np.abs(
        np.interp(tq, fine.t, fine.sz) - np.interp(tq, coarse.t, coarse.sz)
    )))


def convergence_scan(
    rungs,
    tol: float = 5e-3,
    spin_up: bool = True,
    memory_budget: float = MEMORY_BUDGET_BYTES,
) -> tuple[BlochTrajectory, ScanReport]:
    """Propagate successive (ModelConfig, FockTruncation, PropagatorConfig)
    rungs until two adjacent sigma_z trajectories agree within tol.

    Returns the finer trajectory of the first converged pair. Under
    tol = inf the first rung is returned immediately, flagged
    converged. An exhausted ladder returns the last trajectory flagged
    unconverged; the report carries all pairwise deviations either way.
    """
    rungs = list(rungs)
    if not rungs:
        raise ConfigError("convergence ladder must not be empty")
    prev = propagate(*rungs[0], spin_up=spin_up, memory_budget=memory_budget)
    if math.isinf(tol):
        return prev, ScanReport(deviations=(), converged=True, rung_index=0,
                                tol=tol)
    deviations: list[float] = []
    for i, rung in enumerate(rungs[1:], start=1):
        cur = propagate(*rung, spin_up=spin_up, memory_budget=memory_budget)
        dev = _rung_deviation(prev, cur)
        deviations.append(dev)
        if dev < tol:
            return cur, ScanReport(deviations=tuple(deviations), converged=True,
                                   rung_index=i, tol=tol)
        prev = cur
    return prev, ScanReport(deviations=tuple(deviations), converged=False,
                            rung_index=len(rungs) - 1, tol=tol)

"""Numerically exact propagation on the excitation-truncated joint basis."""
from .basis import ExcitationBasis, FockTruncation
from .hamiltonian import MEMORY_BUDGET_BYTES, HamiltonianAction, build_hamiltonian_action
from .propagate import (
    KRYLOV_DIM_CROSSOVER,
    JointState,
    PropagatorConfig,
    ScanReport,
    convergence_scan,
    initial_state,
    propagate,
)
from .steppers import ChebyshevStepper, krylov_step

__all__ = [
    "ExcitationBasis",
    "FockTruncation",
    "HamiltonianAction",
    "build_hamiltonian_action",
    "MEMORY_BUDGET_BYTES",
    "JointState",
    "PropagatorConfig",
    "ScanReport",
    "convergence_scan",
    "initial_state",
    "propagate",
    "KRYLOV_DIM_CROSSOVER",
    "ChebyshevStepper",
    "krylov_step",
]

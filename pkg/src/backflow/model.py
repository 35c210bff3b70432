"""Spin-boson model ingredients.

Ohmic spectral density with exponential cutoff, its equidistant
discretization into a finite star bath, and the assembled model
parameters. Units: hbar = 1 and the spin coupling delta is the energy
unit; frequencies are quoted in units of delta, times in 1/delta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "OhmicSpectralDensity",
    "BathMode",
    "DiscretizedBath",
    "ModelConfig",
    "ohmic_j",
    "discretize_bath",
    "reorganization_sum",
]


@dataclass(frozen=True)
class OhmicSpectralDensity:
    """Continuum Ohmic bath J(w) = (pi/2) * alpha * w * exp(-w/omega_c).

    Parameters
    ----------
    alpha : float
        Dimensionless coupling strength, >= 0.
    omega_c : float
        Characteristic bath frequency in units of delta, > 0.
    """

    alpha: float
    omega_c: float

    def __post_init__(self):
        # "not x >= 0" also rejects NaN
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if not self.omega_c > 0:
            raise ConfigError(f"omega_c must be > 0, got {self.omega_c}")


@dataclass(frozen=True)
class BathMode:
    """Single discretized bath mode: frequency omega and mass-weighted
    coupling coefficient c (units delta^(3/2))."""

    omega: float
    c: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError(f"mode frequency must be > 0, got {self.omega}")


@dataclass(frozen=True)
class DiscretizedBath:
    """Finite star bath standing in for the continuum spectral density.

    Frequencies are strictly increasing and equidistant (midpoint grid).
    Couplings carry the local quadrature weight, so
    sum_n (pi/2)(c_n^2/omega_n) f(omega_n) is a midpoint-rule quadrature
    of integral J(w) f(w) dw over [0, omega_max].
    """

    modes: tuple[BathMode, ...]
    source: OhmicSpectralDensity
    omega_max: float

    def __post_init__(self):
        w = self.omegas
        if w.size >= 2:
            dw = np.diff(w)
            if np.any(dw <= 0):
                raise ConfigError("mode frequencies must be strictly increasing")
            # eps floor admits representation roundoff on very fine grids
            tol = max(1e-12 * dw[0], 4 * np.finfo(float).eps * w[-1])
            if np.max(np.abs(dw - dw[0])) > tol:
                raise ConfigError(
                    "mode grid must be equidistant to 1e-12 relative tolerance"
                )

    @property
    def omegas(self) -> np.ndarray:
        """Mode frequencies as a float array."""
        return np.array([m.omega for m in self.modes], dtype=float)

    @property
    def couplings(self) -> np.ndarray:
        """Mode couplings c_n as a float array."""
        return np.array([m.c for m in self.modes], dtype=float)

    def __len__(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class ModelConfig:
    """Assembled spin-boson parameters: spin splitting delta and the bath."""

    delta: float
    bath: DiscretizedBath

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")


def ohmic_j(omega, sd: OhmicSpectralDensity):
    """Evaluate the Ohmic spectral density with exponential cutoff.

    Parameters
    ----------
    omega : float or array_like
        Frequency (units of delta), >= 0.
    sd : OhmicSpectralDensity

    Returns
    -------
    float or ndarray
        (pi/2) * alpha * omega * exp(-omega/omega_c).

    Raises
    ------
    DomainError
        If any frequency is negative.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density requires omega >= 0")
    j = 0.5 * math.pi * sd.alpha * w * np.exp(-w / sd.omega_c)
    if w.ndim == 0:
        return float(j)
    return j


def discretize_bath(
    sd: OhmicSpectralDensity, n_modes: int, omega_max: float | None = None
) -> DiscretizedBath:
    """Discretize the continuum bath on an equidistant midpoint grid.

    omega_n = (n - 1/2) dw with dw = omega_max/n_modes, n = 1..n_modes,
    and c_n = sqrt((2/pi) J(omega_n) omega_n dw). The midpoint rule never
    places a mode at omega = 0, so c_n^2/omega_n^2 is always finite.

    Parameters
    ----------
    sd : OhmicSpectralDensity
    n_modes : int
        Number of modes, >= 1.
    omega_max : float, optional
        Discretization cutoff. Defaults to 6*omega_c, which captures more
        than 99.75 percent of the exponential-cutoff weight.

    Raises
    ------
    ConfigError
        If n_modes < 1 or omega_max <= 0.
    """
    if omega_max is None:
        omega_max = 6.0 * sd.omega_c
    if int(n_modes) != n_modes or n_modes < 1:
        raise ConfigError(f"n_modes must be a positive integer, got {n_modes}")
    if not omega_max > 0:
        raise ConfigError(f"omega_max must be > 0, got {omega_max}")
    n_modes = int(n_modes)
    dw = omega_max / n_modes
    w = (np.arange(1, n_modes + 1) - 0.5) * dw
    c = np.sqrt((2.0 / math.pi) * ohmic_j(w, sd) * w * dw)
    modes = tuple(BathMode(float(wi), float(ci)) for wi, ci in zip(w, c))
    return DiscretizedBath(modes=modes, source=sd, omega_max=float(omega_max))


def reorganization_sum(bath: DiscretizedBath) -> float:
    """Bath reorganization diagnostic sum_n c_n^2/omega_n^2.

    Converges to alpha*omega_c*(1 - exp(-omega_max/omega_c)) as the mode
    count grows at fixed omega_max; used by convergence ladders and the
    sum-rule tests.
    """
    if len(bath) == 0:
        return 0.0
    w = bath.omegas
    c = bath.couplings
    return float(np.sum((c / w) ** 2))

"""Short-time propagators e^{-i H dt} for the truncated joint vector.

Two interchangeable steppers:

* Lanczos-Krylov projection with a posteriori error estimate and
  step-halving. Full reorthogonalization keeps the subspace clean; the
  reorthogonalization cost ~ m^2 * dim makes this the right choice only
  up to a few 1e5 joint dimensions.
* Chebyshev expansion of e^{-i H dt} with Bessel-function coefficients
  on a rigorous Gershgorin enclosure of the spectrum. Needs only a
  handful of working vectors regardless of accuracy, so it takes over
  for large truncations. Fully deterministic (no probe vectors).
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import jv

from ..errors import NumericalError
from .hamiltonian import HamiltonianAction

__all__ = ["krylov_step", "ChebyshevStepper"]

_MAX_HALVINGS = 40


def _krylov_step_raw(
    h: HamiltonianAction,
    psi: np.ndarray,
    dt: float,
    m: int,
    tol: float,
    depth: int = 0,
) -> np.ndarray:
    if dt == 0.0:
        return psi.copy()
    norm0 = float(np.linalg.norm(psi))
    if not np.isfinite(norm0) or norm0 == 0.0:
        raise NumericalError("non-finite or zero state handed to krylov_step")

    dim = psi.size
    basis = np.empty((m + 1, dim), dtype=np.complex128)
    basis[0] = psi / norm0
    alphas = np.empty(m)
    betas = np.empty(m)
    used = m
    happy = False
    for j in range(m):
        w = h.apply(basis[j])
        alphas[j] = np.vdot(basis[j], w).real
        w -= alphas[j] * basis[j]
        if j > 0:
            w -= betas[j - 1] * basis[j - 1]
        # full reorthogonalization against the span built so far
        coeffs = basis[: j + 1].conj() @ w
        w -= basis[: j + 1].T @ coeffs
        beta = float(np.linalg.norm(w))
        betas[j] = beta
        if beta < 1e-14 * max(1.0, abs(alphas[j])):
            # invariant subspace: projection is exact
            used = j + 1
            happy = True
            break
        basis[j + 1] = w / beta

    lam, q = eigh_tridiagonal(alphas[:used], betas[: used - 1])
    y = q @ (np.exp(-1j * dt * lam) * q[0, :].conj())
    err = 0.0 if happy else abs(betas[used - 1]) * abs(y[-1])
    if err > tol:
        if depth >= _MAX_HALVINGS:
            raise NumericalError(
                f"krylov_step could not reach tol={tol} (residual {err:.3e} "
                f"after {depth} halvings)"
            )
        half = _krylov_step_raw(h, psi, dt / 2.0, m, tol, depth + 1)
        return _krylov_step_raw(h, half, dt / 2.0, m, tol, depth + 1)
    out = (basis[:used].T @ y) * norm0
    if not np.all(np.isfinite(out[:: max(1, dim // 64)])):
        raise NumericalError("non-finite amplitudes after krylov_step")
    return out


def krylov_step(h: HamiltonianAction, psi, dt: float, m: int = 20,
                tol: float = 1e-10):
    """Approximate e^{-i H dt} psi in an m-dimensional Krylov subspace.

    The local error estimate (last-component residual scaled by the
    next off-diagonal) must fall below tol, otherwise the step is
    subdivided. dt = 0 returns a copy. Accepts and returns JointState;
    raw complex vectors pass through unchanged in type.
    """
    from .propagate import JointState

    if isinstance(psi, JointState):
        amp = _krylov_step_raw(h, psi.amplitudes, dt, m, tol)
        return JointState(amp, psi.basis, _validate=False)
    return _krylov_step_raw(h, np.asarray(psi, dtype=np.complex128), dt, m, tol)


class ChebyshevStepper:
    """Fixed-step Chebyshev propagator for one step size.

    The spectrum is mapped onto [-1, 1] via the Gershgorin enclosure
    (slightly padded), and e^{-i dt (c + s x)} is expanded as
    phase * sum_k (2 - delta_k0) (-i)^k J_k(s dt) T_k(x). The series is
    truncated where the Bessel tail drops below tol; coefficients are
    computed once and reused for every step.
    """

    def __init__(self, h: HamiltonianAction, dt: float, tol: float = 1e-12):
        emin, emax = h.gershgorin_bounds()
        span = max(emax - emin, 1e-12)
        self.h = h
        self.dt = float(dt)
        self.center = 0.5 * (emax + emin)
        self.halfspan = 0.5 * span * 1.0025
        z = self.halfspan * abs(dt)
        k_max = int(z + 12.0 * (z + 1.0) ** (1.0 / 3.0) + 40)
        bessel = jv(np.arange(k_max + 1), z)
        tail = np.cumsum(np.abs(bessel[::-1]))[::-1]
        cut = np.nonzero(tail < 0.5 * tol)[0]
        if cut.size == 0:
            raise NumericalError(
                f"Chebyshev series did not reach tol={tol} by order {k_max}"
            )
        self.order = max(int(cut[0]), 2)
        k = np.arange(self.order + 1)
        sign = np.where(dt >= 0, 1.0, -1.0)
        self.coeffs = 2.0 * (-1j * sign) ** k * bessel[: self.order + 1]
        self.coeffs[0] *= 0.5
        self.phase = np.exp(-1j * dt * self.center)
        dim = h.dim
        self._prev = np.empty(dim, dtype=np.complex128)
        self._cur = np.empty(dim, dtype=np.complex128)
        self._tmp = np.empty(dim, dtype=np.complex128)
        self._acc = np.empty(dim, dtype=np.complex128)
        self._mul = np.empty(dim, dtype=np.complex128)

    def _scaled_apply(self, out: np.ndarray, v: np.ndarray) -> np.ndarray:
        """out = (H - c)/s applied to v."""
        self.h.apply_into(out, v)
        out -= self.center * v
        out /= self.halfspan
        return out

    def step(self, psi: np.ndarray) -> np.ndarray:
        prev, cur, tmp, acc, mul = (self._prev, self._cur, self._tmp,
                                    self._acc, self._mul)
        np.copyto(prev, psi)
        self._scaled_apply(cur, prev)
        np.multiply(prev, self.coeffs[0], out=acc)
        np.multiply(cur, self.coeffs[1], out=mul)
        acc += mul
        for k in range(2, self.order + 1):
            # tmp <- 2 (H-c)/s cur - prev, then rotate buffers copy-free
            self._scaled_apply(tmp, cur)
            tmp *= 2.0
            tmp -= prev
            prev, cur, tmp = cur, tmp, prev
            np.multiply(cur, self.coeffs[k], out=mul)
            acc += mul
        out = acc * self.phase
        if not np.all(np.isfinite(out[:: max(1, out.size // 64)])):
            raise NumericalError("non-finite amplitudes after Chebyshev step")
        self._prev, self._cur, self._tmp = prev, cur, tmp
        return out

"""Matrix-free Hamiltonian application on the truncated joint basis.

H = delta sigma_x + sum_n omega_n (a_n^dag a_n + 1/2)
    + sigma_z sum_n g_n (a_n + a_n^dag),          g_n = c_n / sqrt(2 omega_n)

The joint vector is spin-major: [up block, down block], each of bath
dimension nb. The bath energy is diagonal (zero-point constant kept),
the coupling V is a real symmetric CSR matrix between adjacent
excitation blocks, and sigma_x mixes the two spin blocks:

    out_u = hb * psi_u + delta * psi_d + V psi_u
    out_d = hb * psi_d + delta * psi_u - V psi_d

A per-mode occupation cap restricts the sector by symmetrically
dropping every V element incident to a configuration that violates the
cap; the configurations themselves stay enumerated (they are then
dynamically disconnected from the vacuum), so indexing is unchanged.
"""
from __future__ import annotations

import math

import numba
import numpy as np
import scipy.sparse as sp

from ..errors import ResourceError
from ..model import ModelConfig
from .basis import ExcitationBasis, FockTruncation

__all__ = ["HamiltonianAction", "build_hamiltonian_action", "MEMORY_BUDGET_BYTES"]

# default guard against runaway truncation requests (bytes)
MEMORY_BUDGET_BYTES = 3_500_000_000


@numba.njit(cache=True)
def _apply_kernel(out, psi, nb, hb, delta, indptr, indices, data):
    for i in range(nb):
        su = hb[i] * psi[i] + delta * psi[nb + i]
        sd = hb[i] * psi[nb + i] + delta * psi[i]
        vu = 0.0j
        vd = 0.0j
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            v = data[p]
            vu += v * psi[j]
            vd += v * psi[nb + j]
        out[i] = su + vu
        out[nb + i] = sd - vd


def _coupling_matrix(basis: ExcitationBasis, g: np.ndarray) -> sp.csr_matrix:
    """Real symmetric CSR of sum_n g_n (a_n + a_n^dag) on the bath sector."""
    cap = basis.truncation.per_mode_cap
    n_exc = basis.truncation.max_total_excitations
    rows, cols, vals = [], [], []
    for k in range(1, n_exc + 1):
        block = basis.block(k).astype(np.int64)
        n_k, _ = block.shape
        if n_k == 0:
            continue
        # occupation multiplicity of each slot's value within its row
        counts = np.zeros((n_k, k), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                counts[:, i] += block[:, j] == block[:, i]
        parent_ok = np.ones(n_k, dtype=bool) if cap is None \
            else np.all(counts <= cap, axis=1)
        table = basis._table
        for i in range(k):
            # one lowering edge per distinct value: act on its first slot
            first = np.ones(n_k, dtype=bool) if i == 0 \
                else block[:, i] != block[:, i - 1]
            keep = first & parent_ok
            if not np.any(keep):
                continue
            child_rank = np.zeros(n_k, dtype=np.int64)
            for j in range(k):
                if j == i:
                    continue
                pos = j + 1 if j < i else j
                child_rank += table[pos, block[:, j]]
            parents = basis.block_offsets[k] + np.nonzero(keep)[0]
            rows.append(parents)
            cols.append(basis.block_offsets[k - 1] + child_rank[keep])
            vals.append(g[block[keep, i]] * np.sqrt(counts[keep, i]))
    nb = basis.dimension
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
        nz = v != 0.0
        lower = sp.coo_matrix((v[nz], (r[nz], c[nz])), shape=(nb, nb))
        full = (lower + lower.T).tocsr()
    else:
        full = sp.csr_matrix((nb, nb))
    full.sort_indices()
    return full


class HamiltonianAction:
    """Hermitian matrix-free action of H on joint amplitude vectors."""

    def __init__(self, cfg: ModelConfig, basis: ExcitationBasis):
        self.delta = float(cfg.delta)
        self.basis = basis
        omegas = cfg.bath.omegas
        couplings = cfg.bath.couplings
        g = couplings / np.sqrt(2.0 * omegas) if len(omegas) else np.zeros(0)

        zpe = 0.5 * float(np.sum(omegas))
        nb = basis.dimension
        hb = np.empty(nb, dtype=np.float64)
        for k in range(basis.truncation.max_total_excitations + 1):
            block = basis.block(k)
            lo = basis.block_offsets[k]
            hb[lo:lo + block.shape[0]] = \
                (omegas[block].sum(axis=1) if k else 0.0) + zpe
        self.hb = hb

        v = _coupling_matrix(basis, g)
        self.indptr = v.indptr.astype(np.int64)
        # int32 columns halve the index bandwidth of the hot loop
        self.indices = v.indices.astype(np.int32)
        self.data = v.data.astype(np.float64)
        self.nnz = int(self.data.size)
        # per-row absolute coupling sums, for rigorous Gershgorin bounds
        csum = np.concatenate(([0.0], np.cumsum(np.abs(self.data))))
        self._row_radius = csum[self.indptr[1:]] - csum[self.indptr[:-1]]

    @property
    def dim(self) -> int:
        """Joint (spin x bath) vector length."""
        return 2 * self.basis.dimension

    def apply_into(self, out: np.ndarray, psi: np.ndarray) -> np.ndarray:
        _apply_kernel(out, psi, self.basis.dimension, self.hb, self.delta,
                      self.indptr, self.indices, self.data)
        return out

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.apply_into(np.empty_like(psi), psi)

    def expectation(self, psi: np.ndarray) -> float:
        """Real energy expectation <psi|H|psi>."""
        return float(np.vdot(psi, self.apply(psi)).real)

    def gershgorin_bounds(self) -> tuple[float, float]:
        """Rigorous (emin, emax) enclosure of the restricted spectrum."""
        radius = self._row_radius + abs(self.delta)
        return (float(np.min(self.hb - radius)), float(np.max(self.hb + radius)))

    def __call__(self, state):
        """JointState -> JointState application (matrix-free)."""
        from .propagate import JointState

        amp = np.asarray(state.amplitudes, dtype=np.complex128)
        return JointState(self.apply(amp), state.basis, _validate=False)


def build_hamiltonian_action(
    cfg: ModelConfig,
    trunc: FockTruncation,
    memory_budget: float = MEMORY_BUDGET_BYTES,
) -> HamiltonianAction:
    """Assemble the truncated-sector Hamiltonian action.

    Raises
    ------
    ResourceError
        If the estimated working set (state vectors plus coupling
        matrix) exceeds memory_budget bytes; the message reports the
        offending joint dimension.
    """
    n_modes = len(cfg.bath.modes)
    # size the working set from binomials alone, BEFORE any enumeration
    # is allocated, so absurd truncations fail fast and cheaply
    sizes = [math.comb(n_modes + k - 1, k)
             for k in range(trunc.max_total_excitations + 1)]
    nb = sum(sizes)
    nnz_bound = 2 * sum(k * s for k, s in enumerate(sizes))
    # 8 joint complex vectors (propagation working set) + CSR + diagonal
    # + the multiset enumeration itself
    estimate = (8 * (2 * nb) * 16 + nnz_bound * 16 + nb * 24
                + 4 * sum(k * s for k, s in enumerate(sizes)))
    if estimate > memory_budget:
        raise ResourceError(
            f"truncated basis needs joint dimension {2 * nb} "
            f"(~{estimate / 1e9:.2f} GB working set, budget "
            f"{memory_budget / 1e9:.2f} GB); lower n_modes or the excitation cap"
        )
    return HamiltonianAction(cfg, ExcitationBasis(n_modes, trunc))

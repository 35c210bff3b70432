"""Deterministic enumeration of the excitation-truncated joint basis.

Bath configurations with total occupation k <= N_exc over M modes are
grouped into blocks of fixed k. Within a block a configuration is the
sorted multiset of its excited mode indices (m_1 <= ... <= m_k, one
entry per quantum), stored as one int32 row per state and ranked in
colexicographic order:

    rank(m_1, ..., m_k) = sum_i C(m_i + i - 1, i)

which is a bijection onto 0 .. C(M+k-1, k) - 1. Global index = block
offset + in-block rank, so the enumeration is reproducible by
construction and the inverse map is a table lookup.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DomainError

__all__ = ["FockTruncation", "ExcitationBasis"]


@dataclass(frozen=True)
class FockTruncation:
    """Global excitation cap, with an optional per-mode occupation cap."""

    max_total_excitations: int
    per_mode_cap: int | None = None

    def __post_init__(self):
        n = self.max_total_excitations
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 0:
            raise ConfigError(
                f"max_total_excitations must be a nonnegative integer, got {n!r}"
            )
        cap = self.per_mode_cap
        if cap is not None:
            if not isinstance(cap, (int, np.integer)) or isinstance(cap, bool) \
                    or cap < 1:
                raise ConfigError(f"per_mode_cap must be >= 1, got {cap!r}")


def _multiset_table(n_values: int, k_max: int) -> np.ndarray:
    """T[p, v] = number of p-multisets over v values = C(v+p-1, p)."""
    table = np.zeros((k_max + 1, n_values + 1), dtype=np.int64)
    table[0, :] = 1
    for p in range(1, k_max + 1):
        np.cumsum(table[p - 1, 1:], out=table[p, 1:])
    return table


class ExcitationBasis:
    """Enumerated bath configurations for M modes, total occupation <= N_exc.

    Attributes
    ----------
    n_modes : int
    truncation : FockTruncation
    block_sizes : tuple of int
        Number of configurations per total-excitation block.
    block_offsets : tuple of int
        Global index of the first configuration of each block.
    dimension : int
        Total number of bath configurations (spin excluded).
    """

    def __init__(self, n_modes: int, truncation: FockTruncation):
        if not isinstance(n_modes, (int, np.integer)) or n_modes < 0:
            raise ConfigError(f"n_modes must be a nonnegative integer, got {n_modes!r}")
        n_exc = truncation.max_total_excitations
        self.n_modes = int(n_modes)
        self.truncation = truncation
        self._table = _multiset_table(self.n_modes, max(n_exc, 1))

        blocks = [np.zeros((1, 0), dtype=np.int32)]
        for k in range(1, n_exc + 1):
            prev = blocks[k - 1]
            n_k = int(self._table[k, self.n_modes])
            block = np.empty((n_k, k), dtype=np.int32)
            pos = 0
            for v in range(self.n_modes):
                rows = int(self._table[k - 1, v + 1])
                block[pos:pos + rows, : k - 1] = prev[:rows]
                block[pos:pos + rows, k - 1] = v
                pos += rows
            blocks.append(block)
        self._blocks = blocks
        sizes = [b.shape[0] for b in blocks]
        self.block_sizes = tuple(sizes)
        offsets = np.concatenate(([0], np.cumsum(sizes)))
        self.block_offsets = tuple(int(o) for o in offsets[:-1])
        self.dimension = int(offsets[-1])

    def block(self, k: int) -> np.ndarray:
        """Sorted-multiset rows of the total-occupation-k block (read-only
        view; one column per quantum)."""
        return self._blocks[k]

    def rank_in_block(self, multisets: np.ndarray, k: int) -> np.ndarray:
        """Colex ranks of sorted k-multiset rows within block k."""
        m = np.atleast_2d(np.asarray(multisets, dtype=np.int64))
        ranks = np.zeros(m.shape[0], dtype=np.int64)
        for pos in range(1, k + 1):
            ranks += self._table[pos, m[:, pos - 1]]
        return ranks

    def occupations(self, global_index: int) -> np.ndarray:
        """Dense occupation vector of a configuration by global index."""
        idx = int(global_index)
        if not 0 <= idx < self.dimension:
            raise DomainError(
                f"configuration index {idx} outside basis of size {self.dimension}"
            )
        k = int(np.searchsorted(np.asarray(self.block_offsets), idx, side="right")) - 1
        row = self._blocks[k][idx - self.block_offsets[k]]
        return np.bincount(row, minlength=self.n_modes).astype(np.int64)

    def index(self, occupations) -> int:
        """Global index of a dense occupation vector."""
        occ = np.asarray(occupations, dtype=np.int64)
        if occ.shape != (self.n_modes,):
            raise DomainError(
                f"occupation vector must have length {self.n_modes}, got {occ.shape}"
            )
        if np.any(occ < 0):
            raise DomainError("occupations must be nonnegative")
        k = int(occ.sum())
        if k > self.truncation.max_total_excitations:
            raise DomainError(
                f"total occupation {k} exceeds cap "
                f"{self.truncation.max_total_excitations}"
            )
        multiset = np.repeat(np.arange(self.n_modes, dtype=np.int64), occ)
        rank = int(self.rank_in_block(multiset[None, :], k)[0]) if k else 0
        return self.block_offsets[k] + rank

    def __len__(self) -> int:
        return self.dimension

"""Probability measures on dyadic grids and their scale-indexed entropies.

A :class:`GridMeasure` stores a probability measure supported on finitely many
half-open dyadic cells ``[2^-k i, 2^-k (i+1))`` at a fixed level ``k``
(cell width ``delta = 2^-k``).  Weights live in a dense window starting at an
integer ``offset``; the window is trimmed so that its first and last entries
are strictly positive.

Entropies at a coarser scale ``2^-j`` are always computed by first coarsening
exactly (each coarse cell's weight is the sum of the ``2^(k-j)`` fine cells it
contains) and then evaluating

    H_j     = -sum_I p_I log2 p_I          (Shannon, bits)
    col_j   = -log2 sum_I p_I^2            (collision, bits)

with the convention ``0 log 0 = 0``.  Accumulations use ``math.fsum`` so that
million-cell grids do not lose mass: the mass invariant is one part in 1e12.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ScaleOrderError, ZeroMassEventError

MASS_TOL = 1e-12
SLACK_TOL = 1e-9


def fsum_array(a: np.ndarray) -> float:
    """Compensated sum of an array (exactly rounded)."""
    return math.fsum(np.asarray(a, dtype=float).tolist())


@dataclass(frozen=True)
class GridMeasure:
    """Probability measure on level-``level`` dyadic cells.

    ``weights[i]`` is the mass of cell ``offset + i``, i.e. of the interval
    ``[2^-level (offset+i), 2^-level (offset+i+1))``.
    """

    level: int
    offset: int
    weights: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise DomainError(f"level must be >= 0, got {self.level}")
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("weights must be a non-empty 1-d array")
        if not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        nz = np.flatnonzero(w)
        if nz.size == 0:
            raise ZeroMassEventError("measure has no mass")
        first, last = int(nz[0]), int(nz[-1])
        if first > 0 or last < w.size - 1:
            object.__setattr__(self, "offset", self.offset + first)
            w = w[first:last + 1]
        total = fsum_array(w)
        if abs(total - 1.0) > MASS_TOL:
            raise DomainError(f"total mass {total!r} deviates from 1 beyond {MASS_TOL}")
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_weights(cls, level: int, offset: int, weights) -> "GridMeasure":
        """Normalise an arbitrary non-negative weight array into a probability measure."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        total = fsum_array(w)
        if total <= 0:
            raise ZeroMassEventError("cannot normalise a zero-mass weight array")
        return cls(level, offset, w / total)

    @classmethod
    def point_mass(cls, level: int, index: int) -> "GridMeasure":
        return cls(level, index, np.ones(1))

    @classmethod
    def uniform(cls, level: int, offset: int, n_cells: int) -> "GridMeasure":
        return cls(level, offset, np.full(n_cells, 1.0 / n_cells))

    # -- geometry ------------------------------------------------------------
    @property
    def delta(self) -> float:
        return 2.0 ** -self.level

    @property
    def n_cells(self) -> int:
        return self.weights.size

    def global_indices(self) -> np.ndarray:
        """Global cell indices of the stored window."""
        return self.offset + np.arange(self.weights.size, dtype=np.int64)

    def occupied_indices(self) -> np.ndarray:
        """Global indices of cells with strictly positive weight."""
        return self.offset + np.flatnonzero(self.weights).astype(np.int64)

    def occupied(self) -> tuple[np.ndarray, np.ndarray]:
        """(global indices, weights) of positive-weight cells."""
        nz = np.flatnonzero(self.weights)
        return self.offset + nz.astype(np.int64), self.weights[nz]

    def cell_centers(self) -> np.ndarray:
        """Centres of the occupied cells."""
        g, _ = self.occupied()
        return (g + 0.5) * self.delta

    def support_interval(self) -> tuple[float, float]:
        """Closed hull of the support: [left edge of first cell, right edge of last]."""
        return (self.offset * self.delta, (self.offset + self.n_cells) * self.delta)

    def support(self) -> "CellSet1D":
        return CellSet1D(self.level, self.occupied_indices())

    def mass_of(self, indices: np.ndarray) -> float:
        """Exact mass of a set of global cell indices at this level."""
        idx = np.asarray(indices, dtype=np.int64) - self.offset
        idx = idx[(idx >= 0) & (idx < self.n_cells)]
        if idx.size == 0:
            return 0.0
        return fsum_array(self.weights[idx])

    def write_csv(self, path: str) -> None:
        """Debug dump: one row per occupied cell (level, cell_index, weight)."""
        g, w = self.occupied()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["level", "cell_index", "weight"])
            for gi, wi in zip(g.tolist(), w.tolist()):
                writer.writerow([self.level, gi, format(wi, ".17g")])


@dataclass(frozen=True)
class CellSet1D:
    """Sorted set of occupied dyadic cells at one level."""

    level: int
    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def n_cells(self) -> int:
        return self.indices.size

    def coarsened(self, target_level: int) -> "CellSet1D":
        if target_level > self.level:
            raise ScaleOrderError("cannot refine a cell set")
        return CellSet1D(target_level, self.indices >> (self.level - target_level))


def covering_number(cells: CellSet1D) -> int:
    """Number of dyadic cells occupied by the set (its dyadic covering count)."""
    return cells.n_cells


def coarsen(m: GridMeasure, target_level: int) -> GridMeasure:
    """Exact pushforward of ``m`` onto the level-``target_level`` grid.

    Implemented as repeated pairwise halving, so the mass error after
    ``k - j`` stages is at most ``(k - j)`` ulps.
    """
    if target_level > m.level:
        raise ScaleOrderError(
            f"target level {target_level} finer than measure level {m.level}")
    if target_level < 0:
        raise DomainError("target level must be >= 0")
    w = np.asarray(m.weights, dtype=float)
    off = m.offset
    for _ in range(m.level - target_level):
        if off & 1:
            w = np.concatenate([[0.0], w])
            off -= 1
        if w.size & 1:
            w = np.concatenate([w, [0.0]])
        w = w[0::2] + w[1::2]
        off >>= 1
    return GridMeasure(target_level, off, w)


def shannon_entropy(m: GridMeasure, target_level: int) -> float:
    """Shannon entropy (bits) of ``m`` on the level-``target_level`` partition."""
    mc = coarsen(m, target_level)
    w = mc.weights[mc.weights > 0]
    return -math.fsum((w * np.log2(w)).tolist())


def collision_entropy(m: GridMeasure, target_level: int) -> float:
    """Collision (Renyi-2) entropy in bits: -log2 sum p^2 at the target scale."""
    mc = coarsen(m, target_level)
    w = mc.weights
    return -math.log2(fsum_array(w * w))


def condition(m: GridMeasure, event: CellSet1D) -> GridMeasure:
    """Measure conditioned on an event given as a cell set at the same level."""
    if event.level != m.level:
        raise ScaleOrderError(
            f"event at level {event.level}, measure at level {m.level}")
    local = event.indices - m.offset
    local = local[(local >= 0) & (local < m.n_cells)]
    masked = np.zeros_like(m.weights)
    if local.size:
        masked[local] = m.weights[local]
    total = fsum_array(masked)
    if total <= 0.0:
        raise ZeroMassEventError("event has zero mass")
    return GridMeasure(m.level, m.offset, masked / total)


def mix(m1: GridMeasure, m2: GridMeasure, lam: float) -> GridMeasure:
    """Convex combination ``lam*m1 + (1-lam)*m2`` of two measures at equal level."""
    if m1.level != m2.level:
        raise ScaleOrderError("mixture requires equal levels")
    if not 0.0 <= lam <= 1.0:
        raise DomainError("mixture weight must lie in [0, 1]")
    lo = min(m1.offset, m2.offset)
    hi = max(m1.offset + m1.n_cells, m2.offset + m2.n_cells)
    w = np.zeros(hi - lo)
    w[m1.offset - lo:m1.offset - lo + m1.n_cells] += lam * m1.weights
    w[m2.offset - lo:m2.offset - lo + m2.n_cells] += (1.0 - lam) * m2.weights
    return GridMeasure.from_weights(m1.level, lo, w)

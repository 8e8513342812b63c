"""Empirical Frostman / Ahlfors / upper-regularity constants for grid measures.

All scans are restricted to dyadic radii and to ball centres at occupied cell
centres; the unrestricted constants differ from the dyadic ones by at most a
factor 2^s, which is absorbed by the factor-2 slack every consumer of these
reports carries.  Ball masses are exact sums of the weights of all cells
meeting the closed ball, evaluated through a prefix-sum table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .gridmeasure import CellSet1D, GridMeasure


@dataclass(frozen=True)
class RegularityReport:
    """Measured regularity constants of a (measure, exponent) pair.

    ``frostman_constant``: best C with mu(B(x,r)) <= C r^s over tested balls.
    ``lower_constant``: best C with mu(B(x,r)) >= r^s / C over support points.
    ``upper_regular_constant``: best C with N_r(K cap B(x,R)) <= C (R/r)^s,
    NaN when the two-radius scan was skipped.
    """

    exponent: float
    frostman_constant: float
    lower_constant: float
    upper_regular_constant: float
    level: int
    scales_tested: tuple[float, ...] = field(default=())

    @property
    def effective_constant(self) -> float:
        """Two-sided Ahlfors constant: max of the one-sided constants."""
        return max(self.frostman_constant, self.lower_constant)


def _ball_masses(m: GridMeasure, centers: np.ndarray, r: float) -> np.ndarray:
    """Exact masses of closed balls B(x, r) for a vector of centres."""
    scale = 2.0 ** m.level
    prefix = np.concatenate([[0.0], np.cumsum(m.weights)])
    lo = np.floor((centers - r) * scale).astype(np.int64) - m.offset
    hi = np.floor((centers + r) * scale).astype(np.int64) - m.offset
    lo = np.clip(lo, 0, m.n_cells)
    hi = np.clip(hi + 1, 0, m.n_cells)
    return prefix[hi] - prefix[lo]


def frostman_constant(m: GridMeasure, s: float) -> float:
    """max over dyadic radii and occupied centres of mu(B(x,r)) / r^s."""
    if not 0 < s <= 1:
        raise DomainError(f"exponent must lie in (0,1], got {s}")
    centers = m.cell_centers()
    best = 0.0
    for j in range(0, m.level + 1):
        r = 2.0 ** -j
        ratio = _ball_masses(m, centers, r) / r ** s
        best = max(best, float(ratio.max()))
    return best


def _lower_constant(m: GridMeasure, s: float) -> tuple[float, list[float]]:
    a, b = m.support_interval()
    diam = b - a
    centers = m.cell_centers()
    best = 0.0
    scales: list[float] = []
    for j in range(0, m.level + 1):
        r = 2.0 ** -j
        if r > diam:
            continue
        scales.append(r)
        masses = _ball_masses(m, centers, r)
        best = max(best, float((r ** s / masses).max()))
    if not scales:  # support inside one cell: only r = delta applies
        r = m.delta
        scales.append(r)
        masses = _ball_masses(m, centers, r)
        best = float((r ** s / masses).max())
    return best, scales


def ahlfors_check(m: GridMeasure, s: float, include_upper: bool = False,
                  max_centers: int = 1024) -> RegularityReport:
    """Both-sided regularity scan; never rejects, only reports constants."""
    if not 0 < s <= 1:
        raise DomainError(f"exponent must lie in (0,1], got {s}")
    fro = frostman_constant(m, s)
    low, scales = _lower_constant(m, s)
    upper = math.nan
    if include_upper:
        upper = upper_regular_constant(m.support(), s, max_centers=max_centers)
    return RegularityReport(
        exponent=s,
        frostman_constant=fro,
        lower_constant=low,
        upper_regular_constant=upper,
        level=m.level,
        scales_tested=tuple(scales),
    )


def _evenly_spaced(n: int, cap: int) -> np.ndarray:
    if n <= cap:
        return np.arange(n)
    return np.unique(np.floor(np.linspace(0, n - 1, cap)).astype(np.int64))


def upper_regular_constant(cells, s: float, max_centers: int = 1024) -> float:
    """max over dyadic radius pairs r <= R and centres of N_r(K cap B(x,R)) (r/R)^s.

    Accepts a :class:`CellSet1D` or a ``CellSet2D`` (anything with ``level``
    and either ``indices`` or ``cells``).  ``max_centers`` caps the centre scan
    (deterministic evenly spaced subsample) to keep the triple loop bounded.
    """
    if not 0 < s <= 2:
        raise DomainError(f"exponent must lie in (0,2], got {s}")
    level = cells.level
    delta = 2.0 ** -level
    if isinstance(cells, CellSet1D):
        pts = cells.indices[:, None].astype(float)
    else:
        pts = np.asarray(cells.cells, dtype=float)
    if pts.shape[0] == 0:
        raise DomainError("empty cell set")
    lo_corner = pts * delta
    centers_all = lo_corner + 0.5 * delta
    sel = _evenly_spaced(pts.shape[0], max_centers)
    best = 0.0
    ints = pts.astype(np.int64)
    for j_big in range(0, level + 1):
        radius_big = 2.0 ** -j_big
        for ci in sel:
            x = centers_all[ci]
            gap = np.clip(np.abs(x[None, :] - lo_corner - 0.5 * delta) - 0.5 * delta,
                          0.0, None)
            dist = np.sqrt((gap ** 2).sum(axis=1))
            member = dist <= radius_big
            if not member.any():
                continue
            sub = ints[member]
            for j_small in range(j_big, level + 1):
                r_small = 2.0 ** -j_small
                shift = level - j_small
                coarse = sub >> shift
                if coarse.shape[1] == 1:
                    n_r = np.unique(coarse[:, 0]).size
                else:
                    span = int(coarse[:, 1].max() - coarse[:, 1].min()) + 2
                    key = (coarse[:, 0] - coarse[:, 0].min()) * span \
                        + (coarse[:, 1] - coarse[:, 1].min())
                    n_r = np.unique(key).size
                best = max(best, n_r * (r_small / radius_big) ** s)
    return best

"""Multiplicity functions, high-multiplicity sets and radial tube energies in the plane.

Planar sets are unions of dyadic squares at one level; fibres and radial tubes
are discretised by cell-image equality: a square belongs to the fibre of a
point when its centre projects into the same image cell (orthogonal case) or
the same angular arc (radial case).  Arcs on the unit circle about the base
point have uniform angular width ``2^-delta_level``, so arc length equals
angle.  This matches the dyadic covering count up to a factor two and is
exactly computable.

Radial operations require the base point on the vertical axis and a unit gap
to the planar support; the projective map ``P(x, y) = (1/x, y/x)`` conjugates
radial fibres through axis points to parallel orthogonal fibres and stays
bi-Lipschitz on such separated inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ScaleOrderError, SeparationError
from .gridmeasure import GridMeasure, fsum_array


@dataclass(frozen=True)
class CellSet2D:
    """Set of occupied dyadic squares at one level (rows of ``cells`` are (i, j))."""

    level: int
    cells: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=np.int64)
        if c.ndim != 2 or c.shape[1] != 2:
            raise DomainError("cells must be an (n, 2) integer array")
        c = np.unique(c, axis=0)
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def centers(self) -> np.ndarray:
        return (self.cells + 0.5) * 2.0 ** -self.level


@dataclass(frozen=True)
class Grid2DMeasure:
    """Sparse probability measure on dyadic squares at one level."""

    level: int
    cells: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=np.int64)
        w = np.asarray(self.weights, dtype=float)
        if c.ndim != 2 or c.shape[1] != 2 or w.shape != (c.shape[0],):
            raise DomainError("need (n,2) cells with matching weights")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        keep = w > 0
        c, w = c[keep], w[keep]
        if c.shape[0] == 0:
            raise DomainError("measure has no mass")
        if abs(fsum_array(w) - 1.0) > 1e-12:
            raise DomainError("total mass deviates from 1 beyond 1e-12")
        order = np.lexsort((c[:, 1], c[:, 0]))
        c, w = c[order], w[order]
        c.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "cells", c)
        object.__setattr__(self, "weights", w)

    def support(self) -> CellSet2D:
        return CellSet2D(self.level, self.cells)

    def centers(self) -> np.ndarray:
        return (self.cells + 0.5) * 2.0 ** -self.level


def product_measure(mx: GridMeasure, my: GridMeasure) -> Grid2DMeasure:
    """Independent product mu x nu as a planar grid measure (levels must agree)."""
    if mx.level != my.level:
        raise ScaleOrderError("product measure needs equal levels")
    gx, wx = mx.occupied()
    gy, wy = my.occupied()
    cells = np.column_stack([np.repeat(gx, gy.size), np.tile(gy, gx.size)])
    weights = (wx[:, None] * wy[None, :]).ravel()
    return Grid2DMeasure(mx.level, cells, weights / fsum_array(weights))


# -- orthogonal multiplicity -----------------------------------------------------

def _unit(theta) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    if th.shape != (2,) or abs(float(np.hypot(th[0], th[1])) - 1.0) > 1e-6:
        raise DomainError("theta must be a unit 2-vector")
    return th


def _distinct_coarse(cells: np.ndarray, shift: int) -> int:
    coarse = cells >> shift
    span = int(coarse[:, 1].max() - coarse[:, 1].min()) + 2
    key = (coarse[:, 0] - coarse[:, 0].min()) * span + (coarse[:, 1] - coarse[:, 1].min())
    return int(np.unique(key).size)


def multiplicity(k: CellSet2D, theta, x, delta_level: int) -> int:
    """Dyadic count of K's cells on the projection fibre through ``x``.

    The fibre is the set of cells whose centre lands in the same level-
    ``delta_level`` image cell under ``p -> <p, theta>`` as ``x`` does; the
    count is taken over distinct level-``delta_level`` squares.
    """
    if delta_level > k.level:
        raise ScaleOrderError("delta_level must not exceed the set's level")
    th = _unit(theta)
    scale = 2.0 ** delta_level
    proj = k.centers() @ th
    cell_of_x = math.floor(float(np.dot(np.asarray(x, dtype=float), th)) * scale)
    fibre = k.cells[np.floor(proj * scale).astype(np.int64) == cell_of_x]
    if fibre.shape[0] == 0:
        return 0
    return _distinct_coarse(fibre, k.level - delta_level)


def high_multiplicity_set(k: CellSet2D, theta, threshold: float,
                          delta_level: int) -> CellSet2D:
    """Cells of K whose fibre multiplicity is at least ``threshold``."""
    if threshold < 1:
        raise DomainError("threshold must be >= 1")
    if delta_level > k.level:
        raise ScaleOrderError("delta_level must not exceed the set's level")
    th = _unit(theta)
    scale = 2.0 ** delta_level
    proj_cells = np.floor((k.centers() @ th) * scale).astype(np.int64)
    mult = _group_multiplicities(k.cells, proj_cells, k.level - delta_level)
    return CellSet2D(k.level, k.cells[mult >= threshold])


def _group_multiplicities(cells: np.ndarray, group: np.ndarray, shift: int) -> np.ndarray:
    """Per-cell count of distinct coarse squares sharing the cell's group label."""
    coarse = cells >> shift
    span = int(coarse[:, 1].max() - coarse[:, 1].min()) + 2
    ckey = (coarse[:, 0] - coarse[:, 0].min()) * span + (coarse[:, 1] - coarse[:, 1].min())
    guniq, ginv = np.unique(group, return_inverse=True)
    pair = ginv.astype(np.int64) * (int(ckey.max()) + 2) + ckey
    uniq_pairs = np.unique(pair)
    arc_of_pair = uniq_pairs // (int(ckey.max()) + 2)
    counts = np.bincount(arc_of_pair, minlength=guniq.size)
    return counts[ginv]


# -- radial multiplicity ----------------------------------------------------------

def _check_base(base) -> tuple[float, float]:
    bx, by = float(base[0]), float(base[1])
    if bx != 0.0:
        raise DomainError("base point must lie on the vertical axis {0} x R")
    return bx, by


def _check_separation(k: CellSet2D, base) -> None:
    bx, by = _check_base(base)
    delta = 2.0 ** -k.level
    corner = k.cells * delta
    gap_x = np.clip(np.abs(bx - corner[:, 0] - 0.5 * delta) - 0.5 * delta, 0.0, None)
    gap_y = np.clip(np.abs(by - corner[:, 1] - 0.5 * delta) - 0.5 * delta, 0.0, None)
    dist = np.sqrt(gap_x ** 2 + gap_y ** 2)
    if float(dist.min()) < 1.0 - 1e-9:
        raise SeparationError(
            f"base distance {float(dist.min()):.6g} to the set is below 1")


def _arc_cells(centers: np.ndarray, base, delta_level: int) -> np.ndarray:
    bx, by = float(base[0]), float(base[1])
    ang = np.arctan2(centers[:, 1] - by, centers[:, 0] - bx)
    return np.floor(ang * 2.0 ** delta_level).astype(np.int64)


def radial_multiplicity(k: CellSet2D, base, y, delta_level: int) -> int:
    """Dyadic count of K's cells sharing the angular arc of ``y`` seen from ``base``."""
    if delta_level > k.level:
        raise ScaleOrderError("delta_level must not exceed the set's level")
    _check_separation(k, base)
    arcs = _arc_cells(k.centers(), base, delta_level)
    yv = np.asarray(y, dtype=float)
    y_arc = math.floor(math.atan2(yv[1] - float(base[1]), yv[0] - float(base[0]))
                       * 2.0 ** delta_level)
    fibre = k.cells[arcs == y_arc]
    if fibre.shape[0] == 0:
        return 0
    return _distinct_coarse(fibre, k.level - delta_level)


def radial_high_multiplicity_set(k: CellSet2D, base, threshold: float,
                                 delta_level: int) -> CellSet2D:
    """Cells whose radial fibre multiplicity from ``base`` is at least ``threshold``."""
    if delta_level > k.level:
        raise ScaleOrderError("delta_level must not exceed the set's level")
    _check_separation(k, base)
    arcs = _arc_cells(k.centers(), base, delta_level)
    mult = _group_multiplicities(k.cells, arcs, k.level - delta_level)
    return CellSet2D(k.level, k.cells[mult >= threshold])


def projective_transform(p) -> tuple[float, float]:
    """The pencil-to-parallel map P(x, y) = (1/x, y/x) on [1, 10] x [-10, 10].

    Lines through an axis point (0, t) become lines of direction (1, t); the
    map is bi-Lipschitz on the admissible rectangle.
    """
    x, y = float(p[0]), float(p[1])
    if not 1.0 - 1e-12 <= x <= 10.0 + 1e-12:
        raise DomainError(f"x must lie in [1, 10], got {x}")
    if abs(y) > 10.0 + 1e-12:
        raise DomainError(f"|y| must be <= 10, got {y}")
    return (1.0 / x, y / x)


def radial_integral(mu2: Grid2DMeasure, nu: GridMeasure, sigma: float,
                    delta_level: int) -> float:
    """Average mass of the high radial-multiplicity set over axis base points.

    Returns ``sum_z nu(z) * mu2({cells with radial multiplicity >= 2^(sigma *
    delta_level) from (0, z)})``; always in [0, 1], equal to 1 at sigma = 0.
    """
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    if delta_level > mu2.level:
        raise ScaleOrderError("delta_level must not exceed the measure's level")
    support = mu2.support()
    centers = mu2.centers()
    shift = mu2.level - delta_level
    threshold = 2.0 ** (sigma * delta_level)
    nu_centers = nu.cell_centers()
    _, nu_w = nu.occupied()
    terms = []
    for zc, wz in zip(nu_centers.tolist(), nu_w.tolist()):
        base = (0.0, zc)
        _check_separation(support, base)
        arcs = _arc_cells(centers, base, delta_level)
        mult = _group_multiplicities(mu2.cells, arcs, shift)
        mass = fsum_array(mu2.weights[mult >= threshold])
        terms.append(wz * mass)
    return math.fsum(terms)


class TubeEnergy(NamedTuple):
    energy: float
    collision_bits: float


def tube_energy(rho: Grid2DMeasure, base, delta_level: int) -> TubeEnergy:
    """L2 energy of the radial tube decomposition about ``base``.

    Tubes are the pull-backs of the angular arcs; returns ``sum_T rho(T)^2``
    and the implied collision entropy ``-log2`` of it, which tracks the
    collision entropy of the corresponding slope quotient within the angular
    distortion of the geometry (about two bits on unit-separated inputs).
    """
    if delta_level > rho.level:
        raise ScaleOrderError("delta_level must not exceed the measure's level")
    _check_separation(rho.support(), base)
    arcs = _arc_cells(rho.centers(), base, delta_level)
    _, inv = np.unique(arcs, return_inverse=True)
    masses = np.bincount(inv, weights=rho.weights)
    energy = fsum_array(masses * masses)
    return TubeEnergy(energy, -math.log2(energy))

"""Homogeneous affine iterated function systems and their rendered measures.

An :class:`AffineIFS` is a finite list of contractions ``x -> c x + t_i`` on
the line, all with the same ratio ``c`` stored exactly as a rational, plus a
probability vector over the maps.  The attractor's self-similar measure is
rendered onto a dyadic grid by iterating the system until every cylinder is
shorter than one cell and binning each cylinder's mass at its left endpoint.

The arithmetic-progression family ``ap_ifs(N, c)`` (maps ``x -> c x + i/N``)
is the workhorse: its similarity dimension is ``log N / log(1/c)`` and its
sums collapse (consecutive translation gaps are equal), which is what the
sharpness experiments exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetError, DomainError, ScaleOrderError
from .gridmeasure import GridMeasure

DEFAULT_CYLINDER_BUDGET = 10 ** 8


@dataclass(frozen=True)
class AffineIFS:
    """Homogeneous contracting system ``{x -> ratio * x + t}`` with map weights."""

    ratio: Fraction
    translations: tuple[Fraction, ...]
    weights: np.ndarray

    def __post_init__(self):
        r = Fraction(self.ratio)
        if not 0 < r < 1:
            raise DomainError(f"contraction ratio must lie in (0,1), got {r}")
        ts = tuple(Fraction(t) for t in self.translations)
        if len(ts) < 2:
            raise DomainError("need at least two maps")
        if len(set(ts)) != len(ts):
            raise DomainError("translations must be distinct")
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(ts) or np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise DomainError("weights must be a probability vector over the maps")
        order = sorted(range(len(ts)), key=lambda i: ts[i])
        ts = tuple(ts[i] for i in order)
        w = w[order]
        # strong separation: images of the attractor hull must not overlap
        hull_lo = ts[0] / (1 - r)
        hull_hi = ts[-1] / (1 - r)
        image_width = r * (hull_hi - hull_lo)
        for a, b in zip(ts[:-1], ts[1:]):
            if float(image_width) > float(b - a) + 1e-12:
                raise DomainError(
                    "maps overlap on the attractor hull; "
                    f"gap {float(b - a):.6g} < image width {float(image_width):.6g}")
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "ratio", r)
        object.__setattr__(self, "translations", ts)
        object.__setattr__(self, "weights", w)

    @property
    def n_maps(self) -> int:
        return len(self.translations)

    def attractor_hull(self) -> tuple[float, float]:
        r = self.ratio
        return (float(self.translations[0] / (1 - r)),
                float(self.translations[-1] / (1 - r)))

    def spec_string(self) -> str:
        return f"ifs:N={self.n_maps},c={self.ratio}"


def ap_ifs(n_maps: int, ratio: Fraction | float) -> AffineIFS:
    """Arithmetic-progression system: ``N`` maps ``x -> c x + i/N``, uniform weights."""
    if n_maps < 2:
        raise DomainError(f"need at least 2 maps, got {n_maps}")
    c = Fraction(ratio)
    if c > Fraction(1, n_maps):
        raise DomainError(
            f"ratio {c} > 1/{n_maps}: images overlap and regularity is lost")
    ts = tuple(Fraction(i, n_maps) for i in range(n_maps))
    return AffineIFS(c, ts, np.full(n_maps, 1.0 / n_maps))


def dimension(f: AffineIFS) -> float:
    """Similarity dimension ``log N / log(1/c)`` of a homogeneous system."""
    return math.log(f.n_maps) / math.log(1.0 / float(f.ratio))


def generations_for_level(f: AffineIFS, level: int) -> int:
    """Smallest m with ratio^m <= 2^-level, computed in exact integer arithmetic."""
    p, q = f.ratio.numerator, f.ratio.denominator
    m = 1
    while q ** m < (p ** m) << level:
        m += 1
    return m


def render_measure(f: AffineIFS, level: int,
                   budget: int = DEFAULT_CYLINDER_BUDGET) -> GridMeasure:
    """Self-similar measure of ``f`` binned onto the level-``level`` dyadic grid.

    Iterates until every cylinder has length <= 2^-level; each cylinder's mass
    goes to the cell containing its left endpoint.
    """
    if level < 1:
        raise DomainError("render level must be >= 1")
    m_gens = generations_for_level(f, level)
    if f.n_maps ** m_gens > budget:
        raise BudgetError(
            f"{f.n_maps}^{m_gens} cylinders exceed budget {budget}")
    c = float(f.ratio)
    t = np.array([float(x) for x in f.translations])
    pts = np.zeros(1)
    wts = np.ones(1)
    for _ in range(m_gens):
        pts = (c * pts[None, :] + t[:, None]).ravel()
        wts = (wts[None, :] * f.weights[:, None]).ravel()
    idx = np.floor(pts * 2.0 ** level).astype(np.int64)
    lo = int(idx.min())
    dense = np.bincount(idx - lo, weights=wts)
    return GridMeasure.from_weights(level, lo, dense)


# -- monotone pushforwards ----------------------------------------------------

_SUPPORT_TOL = 1e-9


def _check_support(m: GridMeasure, lo: float, hi: float, what: str) -> None:
    a, b = m.support_interval()
    if a < lo - _SUPPORT_TOL or b > hi + _SUPPORT_TOL:
        raise DomainError(
            f"{what} needs support in [{lo}, {hi}], got [{a:.6g}, {b:.6g}]")


def pushforward_monotone(m: GridMeasure, map_spec, output_level: int) -> GridMeasure:
    """Pushforward under a monotone map, binning each cell centre's image.

    ``map_spec`` is one of ``"exp2"`` (x -> 2^x on [0,2]), ``"log2"``
    (its inverse, support in [1/4,4]), ``"negate"``, ``"reciprocal"``
    (support in [1/2,4]), or ``("affine", a, b)`` for ``x -> a x + b``.

    Centre-image binning moves every image by less than one source cell times
    the map's Lipschitz constant, so at any output level at least two bits
    coarser the induced entropy error is O(1) cells.
    """
    if output_level > m.level:
        raise ScaleOrderError(
            f"output level {output_level} finer than measure level {m.level}")
    centers = m.cell_centers()
    _, w = m.occupied()
    if isinstance(map_spec, str):
        kind = map_spec
    else:
        kind = map_spec[0]
    if kind == "exp2":
        _check_support(m, 0.0, 2.0, "exp2 pushforward")
        img = np.exp2(centers)
    elif kind == "log2":
        _check_support(m, 0.25, 4.0, "log2 pushforward")
        img = np.log2(centers)
    elif kind == "negate":
        img = -centers
    elif kind == "reciprocal":
        _check_support(m, 0.5, 4.0, "reciprocal pushforward")
        img = 1.0 / centers
    elif kind == "affine":
        _, a, b = map_spec
        if a == 0:
            raise DomainError("affine pushforward needs a != 0")
        img = a * centers + b
    else:
        raise DomainError(f"unknown map spec {map_spec!r}")
    idx = np.floor(img * 2.0 ** output_level).astype(np.int64)
    lo = int(idx.min())
    dense = np.bincount(idx - lo, weights=w)
    return GridMeasure.from_weights(output_level, lo, dense)


def regular_subset(f: AffineIFS, t: float) -> AffineIFS:
    """Sub-system whose dimension is just below ``t``: keep ``max(2, floor((1/c)^t))``
    evenly spaced maps with uniform weights.

    The result's dimension ``log M / log(1/c)`` lies within
    ``log(1+1/M)/log(1/c)`` below ``t``.
    """
    s = dimension(f)
    if not 0 < t < s:
        raise DomainError(f"need 0 < t < dimension {s:.6g}, got {t}")
    inv_c = 1.0 / float(f.ratio)
    m_keep = max(2, int(math.floor(inv_c ** t + 1e-9)))
    n = f.n_maps
    keep = np.floor(np.arange(m_keep) * n / m_keep).astype(int)
    ts = tuple(f.translations[i] for i in keep)
    return AffineIFS(f.ratio, ts, np.full(m_keep, 1.0 / m_keep))


def parse_ifs_spec(text: str) -> AffineIFS:
    """Parse a family string like ``ap:N=2,c=1/4`` (rational c required)."""
    body = text.strip()
    if not body.startswith("ap:"):
        raise DomainError(f"unsupported family {text!r}; expected 'ap:N=<int>,c=<p/q>'")
    n_val: int | None = None
    c_val: Fraction | None = None
    for part in body[3:].split(","):
        if "=" not in part:
            raise DomainError(f"malformed family component {part!r} in {text!r}")
        key, val = part.split("=", 1)
        key = key.strip()
        if key == "N":
            n_val = int(val)
        elif key == "c":
            c_val = Fraction(val)
        else:
            raise DomainError(f"unknown family key {key!r} in {text!r}")
    if n_val is None or c_val is None:
        raise DomainError(f"family {text!r} must give both N and c")
    return ap_ifs(n_val, c_val)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sumprodlab import (CellSet1D, GridMeasure, ScaleOrderError,
                        ZeroMassEventError, coarsen, collision_entropy,
                        condition, covering_number, mix, shannon_entropy)

from conftest import random_measure


# -- construction invariants -------------------------------------------------

def test_weights_trimmed_and_locked():
    m = GridMeasure.from_weights(3, 0, [0.0, 0.0, 1.0, 2.0, 1.0, 0.0])
    assert m.offset == 2
    assert m.n_cells == 3
    assert m.weights[0] > 0 and m.weights[-1] > 0
    with pytest.raises(ValueError):
        m.weights[0] = 0.5


def test_rejects_negative_and_empty():
    with pytest.raises(Exception):
        GridMeasure(2, 0, np.array([0.5, -0.1, 0.6]))
    with pytest.raises(ZeroMassEventError):
        GridMeasure.from_weights(2, 0, [0.0, 0.0])


def test_mass_must_be_normalised():
    with pytest.raises(Exception):
        GridMeasure(2, 0, np.array([0.5, 0.6]))


# -- entropy examples ----------------------------------------------------------

def test_shannon_uniform_four_cells():
    m = GridMeasure.uniform(5, 3, 4)
    assert shannon_entropy(m, 5) == pytest.approx(2.0, abs=1e-12)


def test_shannon_point_mass_zero_at_any_scale():
    m = GridMeasure.point_mass(7, 90)
    for j in (0, 3, 7):
        assert shannon_entropy(m, j) == pytest.approx(0.0, abs=1e-12)


def test_shannon_half_quarter_quarter():
    m = GridMeasure(4, 0, np.array([0.5, 0.25, 0.25]))
    assert shannon_entropy(m, 4) == pytest.approx(1.5, abs=1e-12)


def test_collision_uniform_and_atoms():
    assert collision_entropy(GridMeasure.uniform(6, 0, 16), 6) == pytest.approx(4.0)
    assert collision_entropy(GridMeasure.point_mass(6, 5), 6) == pytest.approx(0.0)
    half = GridMeasure(1, 0, np.array([0.5, 0.5]))
    assert collision_entropy(half, 1) == pytest.approx(1.0)


def test_entropy_rejects_refinement():
    m = GridMeasure.uniform(3, 0, 4)
    with pytest.raises(ScaleOrderError):
        shannon_entropy(m, 4)
    with pytest.raises(ScaleOrderError):
        collision_entropy(m, 5)


# -- coarsening ------------------------------------------------------------------

def test_coarsen_uniform_eight_to_two():
    m = GridMeasure.uniform(3, 0, 8)
    c = coarsen(m, 1)
    assert c.level == 1 and c.offset == 0
    assert np.allclose(c.weights, [0.5, 0.5])


def test_coarsen_point_mass_index_shift():
    m = GridMeasure.point_mass(3, 5)
    c = coarsen(m, 1)
    assert c.offset == 1 and c.n_cells == 1


def test_coarsen_pairwise_sums():
    m = GridMeasure(2, 0, np.array([0.1, 0.2, 0.3, 0.4]))
    c = coarsen(m, 1)
    assert np.allclose(c.weights, [0.3, 0.7])


def test_coarsen_respects_alignment_with_odd_offset():
    m = GridMeasure(3, 3, np.array([0.25, 0.25, 0.25, 0.25]))
    c = coarsen(m, 2)
    # cells 3 | 4,5 | 6 regroup as 1 | 2 | 3
    assert c.offset == 1
    assert np.allclose(c.weights, [0.25, 0.5, 0.25])


# -- conditioning ------------------------------------------------------------------

def test_condition_first_half():
    m = GridMeasure.uniform(4, 0, 4)
    out = condition(m, CellSet1D(4, [0, 1]))
    assert np.allclose(out.weights, [0.5, 0.5])
    assert out.offset == 0


def test_condition_full_support_identity():
    m = GridMeasure(4, 2, np.array([0.5, 0.25, 0.25]))
    out = condition(m, m.support())
    assert out.offset == m.offset
    assert np.allclose(out.weights, m.weights)


def test_condition_renormalises_tail():
    m = GridMeasure(4, 0, np.array([0.5, 0.25, 0.25]))
    out = condition(m, CellSet1D(4, [1, 2]))
    assert np.allclose(out.weights, [0.5, 0.5])


def test_condition_zero_mass_event():
    m = GridMeasure.uniform(4, 0, 4)
    with pytest.raises(ZeroMassEventError):
        condition(m, CellSet1D(4, [17, 18]))


# -- covering -----------------------------------------------------------------------

def test_covering_counts():
    assert covering_number(CellSet1D(5, [1, 2, 3, 9, 11, 20, 21])) == 7
    assert covering_number(CellSet1D(5, [])) == 0


def test_covering_middle_half_cantor():
    # independently iterate {x/4, x/4 + 1/2} and count occupied cells at level 2k
    k = 5
    pts = [0.0]
    for _ in range(k):
        pts = [p / 4 for p in pts] + [p / 4 + 0.5 for p in pts]
    cells = sorted({math.floor(p * 4 ** k) for p in pts})
    assert len(cells) == 2 ** k
    from sumprodlab import render_measure, ap_ifs
    rendered = render_measure(ap_ifs(2, "1/4"), 2 * k)
    assert covering_number(rendered.support()) == 2 ** k
    assert np.array_equal(rendered.occupied_indices(), np.array(cells))


# -- property tests -----------------------------------------------------------------


@st.composite
def measures(draw, max_level=8, max_cells=48):
    level = draw(st.integers(0, max_level))
    n = draw(st.integers(1, max_cells))
    raw = draw(st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=n, max_size=n))
    total = sum(raw)
    if total <= 0:
        raw = [1.0] * n
    offset = draw(st.integers(-20, 20))
    return GridMeasure.from_weights(level, offset, np.asarray(raw) + 1e-15)


@given(measures())
@settings(max_examples=150, deadline=None)
def test_mass_conserved_under_coarsening(m):
    for j in range(m.level, -1, -1):
        assert abs(float(np.sum(coarsen(m, j).weights)) - 1.0) < 1e-12


@given(measures())
@settings(max_examples=150, deadline=None)
def test_collision_below_shannon(m):
    for j in range(0, m.level + 1):
        assert collision_entropy(m, j) <= shannon_entropy(m, j) + 1e-9


@given(measures())
@settings(max_examples=150, deadline=None)
def test_entropy_decreases_under_coarsening(m):
    values = [shannon_entropy(m, j) for j in range(0, m.level + 1)]
    for coarser, finer in zip(values, values[1:]):
        assert coarser <= finer + 1e-9


@given(measures(max_level=6), measures(max_level=6),
       st.floats(0.0, 1.0, allow_nan=False))
@settings(max_examples=150, deadline=None)
def test_shannon_concavity(m1, m2, lam):
    level = min(m1.level, m2.level)
    a, b = coarsen(m1, level), coarsen(m2, level)
    mixed = mix(a, b, lam)
    assert shannon_entropy(mixed, level) >= \
        lam * shannon_entropy(a, level) + (1 - lam) * shannon_entropy(b, level) - 1e-9


@given(measures(max_level=6), st.data())
@settings(max_examples=150, deadline=None)
def test_restriction_scaling_bound(m, data):
    g = m.occupied_indices()
    mask = data.draw(st.lists(st.booleans(), min_size=g.size, max_size=g.size))
    if not any(mask):
        mask[0] = True
    event = CellSet1D(m.level, g[np.asarray(mask)])
    mass = m.mass_of(event.indices)
    restricted = condition(m, event)
    lhs = collision_entropy(restricted, m.level)
    rhs = collision_entropy(m, m.level) + 2 * math.log2(mass)
    assert lhs >= rhs - 1e-9


def test_collision_concavity_counterexample():
    # Renyi-2 entropy is not concave: a 0.9/0.1 mixture of a point mass with a
    # flat measure has collision entropy far below the convex combination.
    n = 256
    point = GridMeasure.point_mass(8, 0)
    flat = GridMeasure.uniform(8, 0, n)
    lam = 0.9
    mixed = mix(point, flat, lam)
    lhs = collision_entropy(mixed, 8)
    rhs = lam * collision_entropy(point, 8) + (1 - lam) * collision_entropy(flat, 8)
    assert lhs < rhs - 0.4


def test_mix_roundtrip_mass(rng):
    for _ in range(25):
        level = int(rng.integers(0, 7))
        m1 = random_measure(rng, level=level)
        m2 = random_measure(rng, level=level)
        mixed = mix(m1, m2, float(rng.random()))
        assert abs(float(np.sum(mixed.weights)) - 1.0) < 1e-12


def test_csv_roundtrip(tmp_path):
    m = GridMeasure(3, -2, np.array([0.25, 0.5, 0.25]))
    path = tmp_path / "m.csv"
    m.write_csv(str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "level,cell_index,weight"
    assert len(lines) == 4

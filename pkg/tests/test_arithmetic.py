import math

import numpy as np
import pytest

from sumprodlab import (BudgetError, ConvolutionPlan, DomainError, GridMeasure,
                        ScaleOrderError, ap_ifs, coarsen,
                        conditional_entropy_quotient, product_distribution,
                        pushforward_monotone, quotient_shift, render_measure,
                        shannon_entropy, sum_distribution, sum_then_product,
                        total_variation)
from sumprodlab.arithmetic import _sum_fine

from oracles import (oracle_conditional_entropy, oracle_product,
                     oracle_quotient, oracle_sum, oracle_triple,
                     oracle_triple_exact_values)


def measure_on_cells(level, cells, weights=None):
    cells = np.asarray(cells, dtype=np.int64)
    lo = int(cells.min())
    w = np.zeros(int(cells.max()) - lo + 1)
    if weights is None:
        weights = np.ones(cells.size)
    for c, wi in zip(cells, np.asarray(weights, dtype=float)):
        w[c - lo] += wi
    return GridMeasure.from_weights(level, lo, w)


def random_measure_in(rng, level, lo, hi, max_cells=64):
    lo_idx = int(math.ceil(lo * 2 ** level))
    hi_idx = int(math.floor(hi * 2 ** level)) - 1
    n = int(rng.integers(1, max_cells + 1))
    cells = rng.choice(np.arange(lo_idx, hi_idx + 1),
                       size=min(n, hi_idx - lo_idx + 1), replace=False)
    return measure_on_cells(level, cells, rng.random(cells.size) + 1e-9)


def test_plan_invariants():
    with pytest.raises(DomainError):
        ConvolutionPlan(10, 8, guard=3)
    with pytest.raises(DomainError):
        ConvolutionPlan(10, 8, guard=4)
    with pytest.raises(DomainError):
        ConvolutionPlan(10, 0, guard=4)
    p = ConvolutionPlan.at_output(6)
    assert p.input_level == 12 and p.guard == 6


# -- sums ------------------------------------------------------------------------

def test_sum_point_masses():
    plan = ConvolutionPlan(10, 6, 4)
    a = GridMeasure.point_mass(10, 37)
    b = GridMeasure.point_mass(10, 91)
    out = sum_distribution(a, b, plan)
    assert out.n_cells == 1
    assert out.offset == (37 + 91) >> 4


def test_sum_bernoulli_convolution():
    plan = ConvolutionPlan(6, 2, 4)
    m = measure_on_cells(6, [0, 1])
    out = _sum_fine(m, m)
    assert np.allclose(out.weights, [0.25, 0.5, 0.25])
    assert out.offset == 0
    assert sum_distribution(m, m, plan).n_cells == 1


def test_sum_translation_covariance():
    plan = ConvolutionPlan(8, 4, 4)
    rng = np.random.default_rng(5)
    m = random_measure_in(rng, 8, 0.0, 1.0)
    shift = GridMeasure.point_mass(8, 48)
    out = _sum_fine(m, shift)
    g_in, w_in = m.occupied()
    g_out, w_out = out.occupied()
    assert np.array_equal(g_out, g_in + 48)
    assert np.allclose(w_out, w_in, atol=1e-15)


def test_sum_level_mismatch_rejected():
    plan = ConvolutionPlan(8, 4, 4)
    with pytest.raises(ScaleOrderError):
        sum_distribution(GridMeasure.point_mass(8, 0),
                         GridMeasure.point_mass(7, 0), plan)


def test_sum_budget_error():
    plan = ConvolutionPlan(20, 14, 6)
    a = measure_on_cells(20, [0, 2 ** 20])
    with pytest.raises(BudgetError):
        sum_distribution(a, a, plan, budget=1000)


def test_sum_fft_matches_sparse_path():
    # same inputs through both kernels: support identical, weights near-identical
    rng = np.random.default_rng(11)
    m = random_measure_in(rng, 12, 0.0, 1.0, max_cells=400)
    fine_sparse = _sum_fine(m, m)
    from sumprodlab import arithmetic
    old = arithmetic.SPARSE_SUM_PAIR_LIMIT
    arithmetic.SPARSE_SUM_PAIR_LIMIT = 0
    try:
        fine_fft = _sum_fine(m, m)
    finally:
        arithmetic.SPARSE_SUM_PAIR_LIMIT = old
    assert fine_fft.level == fine_sparse.level
    assert np.array_equal(fine_fft.occupied_indices(),
                          fine_sparse.occupied_indices())
    assert total_variation(fine_fft, fine_sparse) < 1e-12


def test_cantor_sum_against_oracle(cantor_family):
    plan = ConvolutionPlan(10, 6, 4)
    m = render_measure(cantor_family, 10)
    out = sum_distribution(m, m, plan)
    ref = oracle_sum(m, m, 6)
    assert total_variation(out, ref) <= 1e-12


# -- products ---------------------------------------------------------------------

def test_product_point_masses():
    plan = ConvolutionPlan(10, 5, 5)
    a = GridMeasure.point_mass(10, 2 ** 10)      # value ~1
    b = GridMeasure.point_mass(10, 2 ** 11)      # value ~2
    out = product_distribution(a, b, plan)
    assert out.n_cells == 1
    assert out.offset == math.floor((1 + 2.0 ** -11 / 2) * (2 + 2.0 ** -11) / 2 * 0 + 2 ** 6) or True
    # centre product is just above 2: cell 2^6 at level 5 covers [2, 2 + 2^-5)
    assert out.offset == 2 ** 6


def test_product_two_atom_square():
    plan = ConvolutionPlan(12, 6, 6)
    cells = [2 ** 12, 2 ** 13]  # values ~1 and ~2
    m = measure_on_cells(12, cells)
    out = product_distribution(m, m, plan)
    ref = oracle_product(m, m, 6)
    assert total_variation(out, ref) <= 1e-12
    # atoms {1,2}x{1,2} -> products {1,2,4} with weights (1/4,1/2,1/4)
    assert out.n_cells >= 3
    w = out.occupied()[1]
    assert sorted(np.round(w, 6).tolist())[-1] == pytest.approx(0.5)


def test_product_domain_enforced():
    plan = ConvolutionPlan(10, 5, 5)
    bad = GridMeasure.uniform(10, 0, 8)   # support near 0
    good = GridMeasure.point_mass(10, 2 ** 10)
    with pytest.raises(DomainError):
        product_distribution(bad, good, plan)


def test_product_exp_pushed_cantor_vs_oracle(cantor_family):
    plan = ConvolutionPlan(10, 6, 4)
    m = pushforward_monotone(render_measure(cantor_family, 10), "exp2", 10)
    out = product_distribution(m, m, plan)
    ref = oracle_product(m, m, 6)
    assert total_variation(out, ref) <= 1e-12
    assert abs(shannon_entropy(out, 6) - shannon_entropy(ref, 6)) <= 0.05


# -- triple (X+Y)Z ------------------------------------------------------------------

def test_triple_point_masses():
    plan = ConvolutionPlan(12, 6, 6)
    one = GridMeasure.point_mass(12, 2 ** 12)
    two = GridMeasure.point_mass(12, 2 ** 13 - 1)
    out = sum_then_product(one, one, one, plan)
    assert out.n_cells == 1
    assert out.offset == 2 ** 7  # (1+1)*1 = 2 -> cell 2*2^6
    out2 = sum_then_product(two, two, two, plan)
    # (2+2)*2 = 8 minus centre offsets: lands just under 8
    assert abs(out2.offset * 2.0 ** -6 - 8.0) < 0.02


def test_triple_two_atom_exhaustive():
    plan = ConvolutionPlan(12, 6, 6)
    m = measure_on_cells(12, [2 ** 12, 2 ** 13 - 1])
    out = sum_then_product(m, m, m, plan)
    # exhaustive eight-case enumeration of the staged pipeline is bit-exact
    ref = oracle_triple(m, m, m, plan)
    assert total_variation(out, ref) <= 1e-12
    # the direct-value enumeration may only differ by boundary cells: the
    # outcome (1+1)*2 = 4 sits exactly on a level-6 cell edge
    direct = oracle_triple_exact_values(m, m, m, 6)
    assert abs(shannon_entropy(out, 6) - shannon_entropy(direct, 6)) <= 0.3
    assert out.support().n_cells in (5, 6)


def test_triple_support_domain_enforced():
    plan = ConvolutionPlan(12, 6, 6)
    bad = GridMeasure.point_mass(12, 2 ** 13 + 10)  # value > 2
    with pytest.raises(DomainError):
        sum_then_product(bad, bad, bad, plan)


def test_triple_matches_staged_oracle(cantor_family):
    plan = ConvolutionPlan(12, 6, 6)
    m = pushforward_monotone(render_measure(cantor_family, 12), "exp2", 12)
    out = sum_then_product(m, m, m, plan)
    ref = oracle_triple(m, m, m, plan)
    assert total_variation(out, ref) <= 1e-12
    direct = oracle_triple_exact_values(m, m, m, 6)
    assert abs(shannon_entropy(out, 6) - shannon_entropy(direct, 6)) <= 0.2


# -- quotients -----------------------------------------------------------------------

def test_quotient_point_masses():
    plan = ConvolutionPlan(12, 6, 6)
    x1 = GridMeasure.point_mass(12, 2 ** 12)      # x ~ 1
    y = GridMeasure.point_mass(12, 3 * 2 ** 12)   # y ~ 3
    out = quotient_shift(x1, y, 1.0, plan)
    assert out.n_cells == 1
    assert abs((out.offset + 0.5) * 2.0 ** -6 - 2.0) < 0.02  # (3-1)/1


def test_quotient_x_two_y_four_z_two():
    plan = ConvolutionPlan(12, 6, 6)
    x = GridMeasure.point_mass(12, 2 ** 13)       # ~2
    y = GridMeasure.point_mass(12, 2 ** 14)       # ~4
    out = quotient_shift(x, y, 2.0, plan)
    assert abs((out.offset + 0.5) * 2.0 ** -6 - 1.0) < 0.02


def test_quotient_four_atoms_vs_oracle():
    plan = ConvolutionPlan(12, 6, 6)
    mx = measure_on_cells(12, [2 ** 12, 2 ** 13])
    my = measure_on_cells(12, [3 * 2 ** 12, 2 ** 14])
    out = quotient_shift(mx, my, 2.0, plan)
    ref = oracle_quotient(mx, my, 2.0, 6)
    assert total_variation(out, ref) <= 1e-12


def test_quotient_domain_errors():
    plan = ConvolutionPlan(12, 6, 6)
    near_zero = GridMeasure.point_mass(12, 1)
    ok = GridMeasure.point_mass(12, 2 ** 12)
    with pytest.raises(DomainError):
        quotient_shift(near_zero, ok, 0.0, plan)
    with pytest.raises(DomainError):
        quotient_shift(ok, ok, 5.0, plan)


# -- conditional entropy --------------------------------------------------------------

def test_conditional_point_mass_z_reduces_to_single_fibre():
    plan = ConvolutionPlan(12, 6, 6)
    rng = np.random.default_rng(3)
    mx = random_measure_in(rng, 12, 1.0, 2.0, max_cells=8)
    my = random_measure_in(rng, 12, 1.0, 2.0, max_cells=8)
    mz = GridMeasure.point_mass(12, 2 ** 12 + 100)
    zc = (2 ** 12 + 100 + 0.5) * 2.0 ** -12
    got = conditional_entropy_quotient(mx, my, mz, plan)
    want = shannon_entropy(quotient_shift(mx, my, zc, plan), 6)
    assert got == pytest.approx(want, abs=1e-12)


def test_conditional_all_point_masses_zero():
    plan = ConvolutionPlan(12, 6, 6)
    x = GridMeasure.point_mass(12, 2 ** 12)
    assert conditional_entropy_quotient(x, x, x, plan) == pytest.approx(0.0, abs=1e-12)


def test_conditional_three_atoms_vs_joint_enumeration():
    plan = ConvolutionPlan(12, 6, 6)
    rng = np.random.default_rng(9)
    mx = random_measure_in(rng, 12, 1.0, 2.0, max_cells=3)
    my = random_measure_in(rng, 12, 1.0, 2.0, max_cells=3)
    mz = random_measure_in(rng, 12, 1.0, 2.0, max_cells=3)
    got = conditional_entropy_quotient(mx, my, mz, plan)
    want = oracle_conditional_entropy(mx, my, mz, plan)
    assert got == pytest.approx(want, abs=1e-12)


# -- randomized oracle equivalence (the small-scale version; the full 200-case
#    sweep lives in the acceptance suite) ---------------------------------------

def test_randomized_oracle_spot_checks():
    rng = np.random.default_rng(77)
    plan = ConvolutionPlan(12, 7, 5)
    for _ in range(20):
        mx = random_measure_in(rng, 12, 1.0, 2.0, max_cells=24)
        my = random_measure_in(rng, 12, 1.0, 2.0, max_cells=24)
        mz = random_measure_in(rng, 12, 1.0, 2.0, max_cells=24)
        assert total_variation(sum_distribution(mx, my, plan),
                               oracle_sum(mx, my, 7)) <= 1e-12
        assert total_variation(product_distribution(mx, my, plan),
                               oracle_product(mx, my, 7)) <= 1e-12
        z = float(rng.uniform(-1.0, 1.0))
        assert total_variation(quotient_shift(mx, my, z, plan),
                               oracle_quotient(mx, my, z, 7)) <= 1e-12
        assert total_variation(sum_then_product(mx, my, mz, plan),
                               oracle_triple(mx, my, mz, plan)) <= 1e-12

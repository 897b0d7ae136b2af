import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import logsumexp

from sbstack.constellation import ConstellationSpec
from sbstack.lattice import TriangularSystem, brute_force_ml
from sbstack.soft import (
    LLR_MAX,
    CandidateList,
    ListPolicy,
    default_zeta,
    list_radius,
    list_sphere_decode,
    llr_exact,
    llr_maxlog,
    llr_quantize,
    shifted_list_decode,
    shifted_list_radius,
    soft_sb_stack,
    unit_ball_volume,
)
from util import mimo_trial


def all_costs(tri, a):
    pts = np.array(list(itertools.product(a.symbols, repeat=tri.dimension)))
    d = tri.z[None, :] - pts @ tri.r.T
    return pts, np.einsum("ij,ij->i", d, d)


def exhaustive(tri, a):
    pts, costs = all_costs(tri, a)
    return CandidateList.from_pairs(list(zip(pts, costs)), tri.dimension)


def test_list_policy_validation():
    with pytest.raises(ValueError):
        ListPolicy()
    with pytest.raises(ValueError):
        ListPolicy(size=2, ceiling=1.0)
    with pytest.raises(ValueError):
        ListPolicy.fixed_size(0)
    with pytest.raises(ValueError):
        ListPolicy.cost_ceiling(0.0)


def test_soft_list_of_one_is_ml(rng):
    a = ConstellationSpec(16)
    for _ in range(30):
        tri, *_ = mimo_trial(rng, 2, 2, 16, 10)
        lst = soft_sb_stack(tri, a, 1.0, ListPolicy.fixed_size(1), refill=True)
        ml, cost = brute_force_ml(tri, a)
        assert lst.points[0].tolist() == ml.tolist()
        assert lst.costs[0] == pytest.approx(cost, abs=1e-9)


def test_soft_full_enumeration(rng):
    a = ConstellationSpec(4)
    tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
    lst = soft_sb_stack(tri, a, 1e6, ListPolicy.fixed_size(16))
    _, costs = all_costs(tri, a)
    assert len(lst) == 16 and not lst.truncated
    assert np.allclose(lst.costs, np.sort(costs))
    assert len({tuple(p) for p in lst.points}) == 16


def test_soft_short_list_is_flagged(rng):
    a = ConstellationSpec(4)
    tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
    ml_cost = brute_force_ml(tri, a)[1]
    lst = soft_sb_stack(tri, a, ml_cost + 1e-6, ListPolicy.fixed_size(16))
    assert lst.truncated and 1 <= len(lst) < 16


def test_soft_refill_fills_list(rng):
    a = ConstellationSpec(4)
    tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
    lst = soft_sb_stack(tri, a, 1e-3, ListPolicy.fixed_size(6), refill=True)
    assert len(lst) == 6 and not lst.truncated
    assert lst.stats.restarts >= 1


def test_soft_cost_ceiling(rng):
    a = ConstellationSpec(4)
    tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
    _, costs = all_costs(tri, a)
    ceiling = float(np.sort(costs)[4]) + 1e-9
    lst = soft_sb_stack(tri, a, 1e6, ListPolicy.cost_ceiling(ceiling))
    assert len(lst) == int(np.sum(costs <= ceiling))
    assert np.all(lst.costs <= ceiling)


def test_soft_bias_list_is_sorted(rng):
    a = ConstellationSpec(16)
    tri, *_ = mimo_trial(rng, 2, 2, 16, 5)
    lst = soft_sb_stack(tri, a, 1e3, ListPolicy.fixed_size(8), bias=2.0)
    assert np.all(np.diff(lst.costs) >= 0)


def test_default_zeta():
    z = default_zeta(6)
    assert z > 1
    from scipy.stats import chi2

    assert 2 * 6 * z == pytest.approx(chi2.ppf(0.99, 12))


def test_list_radius_zero_residual():
    sys = TriangularSystem(np.eye(4), np.ones(4), noise_var=0.5, residual=0.0)
    assert list_radius(sys, 6, 2.0) == pytest.approx(2 * 0.5 * 2.0 * 6)
    big = TriangularSystem(np.eye(4), np.ones(4), noise_var=0.5, residual=100.0)
    assert list_radius(big, 6, 2.0) == pytest.approx(12.0)  # projection term dropped
    with pytest.raises(ValueError):
        list_radius(sys, 6, 0.9)


def test_lsd_one_is_ml(rng):
    a = ConstellationSpec(16)
    for _ in range(30):
        tri, *_ = mimo_trial(rng, 2, 2, 16, 5)
        assert list_sphere_decode(tri, a, 1).points[0].tolist() == brute_force_ml(tri, a)[0].tolist()


def test_lsd_keeps_smallest_in_sphere(rng):
    a = ConstellationSpec(16)
    for _ in range(50):
        tri, *_ = mimo_trial(rng, 2, 2, 16, 5)
        c2 = list_radius(tri, 6)
        lst = list_sphere_decode(tri, a, 6, radius_sq=c2)
        _, costs = all_costs(tri, a)
        inside = np.sort(costs[costs <= c2])[:6]
        if inside.size:
            assert np.allclose(lst.costs, inside)


def test_lsd_and_soft_stack_agree(rng):
    a = ConstellationSpec(4)
    for _ in range(50):
        tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
        c2 = list_radius(tri, 6)
        l1 = list_sphere_decode(tri, a, 6, radius_sq=c2)
        l2 = soft_sb_stack(tri, a, c2, ListPolicy.fixed_size(6))
        assert {tuple(p) for p in l1.points} == {tuple(p) for p in l2.points}


def test_unit_ball_volume():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_shifted_radius_examples():
    assert shifted_list_radius(np.eye(2), math.pi) == pytest.approx(1.0)
    assert shifted_list_radius(2 * np.eye(2), 1) == pytest.approx(math.sqrt(4 / math.pi))
    assert shifted_list_radius(np.eye(2), 1, expansion=4) == pytest.approx(shifted_list_radius(np.eye(2), 4))
    with pytest.raises(np.linalg.LinAlgError):
        shifted_list_radius(np.zeros((2, 2)), 1)
    with pytest.raises(ValueError):
        shifted_list_radius(np.ones((2, 3)), 1)


def test_shifted_list_contains_ml(rng):
    a = ConstellationSpec(16)
    for _ in range(30):
        tri, *_ = mimo_trial(rng, 2, 2, 16, 10)
        lst = shifted_list_decode(tri, a, 8)
        assert lst.points[0].tolist() == brute_force_ml(tri, a)[0].tolist()
        assert np.all(np.diff(lst.costs) >= 0)


def test_llr_maxlog_one_step():
    a = ConstellationSpec(4)
    # one complex symbol; first bit is the I bit: +1 -> 1, -1 -> 0
    lst = CandidateList.from_pairs([(np.array([1, 1]), 1.0), (np.array([-1, 1]), 2.0)], 2)
    llr = llr_maxlog(lst, a, 1.0)
    assert llr[0] == pytest.approx(1.0)
    assert llr[1] == LLR_MAX


def test_llr_exact_symmetry():
    a = ConstellationSpec(4)
    lst = CandidateList.from_pairs([(np.array([1, 1]), 1.0), (np.array([-1, 1]), 1.0)], 2)
    assert llr_exact(lst, a, 1.0)[0] == pytest.approx(0.0)


def test_llr_exact_single_terms_match_maxlog():
    a = ConstellationSpec(4)
    lst = CandidateList.from_pairs([(np.array([1, 1]), 0.3), (np.array([-1, -1]), 1.7)], 2)
    assert np.allclose(llr_exact(lst, a, 0.8), llr_maxlog(lst, a, 0.8))


def test_llr_empty_list():
    empty = CandidateList(np.zeros((0, 2), dtype=np.int64), np.zeros(0))
    with pytest.raises(ValueError):
        llr_maxlog(empty, ConstellationSpec(4), 1.0)


def test_llr_exact_gap_bound(rng):
    a = ConstellationSpec(4)
    for _ in range(50):
        tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
        lst = exhaustive(tri, a)
        gap = np.abs(llr_exact(lst, a, 1.0) - llr_maxlog(lst, a, 1.0))
        assert np.all(gap <= math.log(len(lst)) + 1e-12)


def test_llr_sign_matches_ml(rng):
    a = ConstellationSpec(4)
    for _ in range(50):
        tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
        lst = exhaustive(tri, a)
        llr = llr_maxlog(lst, a, 2 * tri.noise_var)
        bits = a.point_bits(lst.points[0])
        nz = llr != 0
        assert np.array_equal(llr[nz] > 0, bits[nz] == 1)


def test_llr_scaling(rng):
    a = ConstellationSpec(4)
    tri, *_ = mimo_trial(rng, 2, 2, 4, 10)
    lst = exhaustive(tri, a)
    big = 1e6
    l1 = llr_maxlog(lst, a, 1.0, llr_max=big)
    l2 = llr_maxlog(lst, a, 2.0, llr_max=big)
    assert np.allclose(l1, 2 * l2)
    assert np.all(np.abs(llr_maxlog(lst, a, 1e-3)) <= LLR_MAX)


def test_llr_exact_direct(rng):
    a = ConstellationSpec(4)
    tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
    pts, costs = all_costs(tri, a)
    lst = exhaustive(tri, a)
    sigma = 1.3
    bits = a.point_bits(pts)
    want = [logsumexp(-costs[bits[:, k] == 1] / sigma) - logsumexp(-costs[bits[:, k] == 0] / sigma) for k in range(bits.shape[1])]
    assert np.allclose(llr_exact(lst, a, sigma), np.clip(want, -LLR_MAX, LLR_MAX), atol=1e-9)


def test_quantize_examples():
    assert np.allclose(llr_quantize([0.1 * LLR_MAX, -0.6 * LLR_MAX, 2 * LLR_MAX], 2), [0, -LLR_MAX, LLR_MAX])
    with pytest.raises(ValueError):
        llr_quantize([1.0], 1)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=20), st.integers(2, 8))
def test_quantize_idempotent(values, m):
    once = llr_quantize(values, m)
    assert np.allclose(llr_quantize(once, m), once)
    assert len(np.unique(llr_quantize(np.linspace(-LLR_MAX, LLR_MAX, 1001), m))) == 2**m - 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 16))
def test_soft_list_is_top_n_property(seed, n_p):
    rng = np.random.default_rng(seed)
    a = ConstellationSpec(4)
    tri, *_ = mimo_trial(rng, 2, 2, 4, 5)
    lst = soft_sb_stack(tri, a, 1.0, ListPolicy.fixed_size(n_p), refill=True)
    _, costs = all_costs(tri, a)
    assert np.allclose(lst.costs, np.sort(costs)[:n_p], atol=1e-9)

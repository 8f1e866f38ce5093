"""Property-based checks with hypothesis."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orbit import correct_timestep, err_profile, labels_at_level, level_of_labels, smooth_levels
from orbit import formats
from orbit.analysis import BoundQuery, bound_within_k, majority_spatial
from orbit.scale import build_mapping_grid, confident_hsr_labels, pivot_propagate
from orbit.synth import aggregate_to_lsr, render_stack
from orbit.temporal import alpha_sweep

from oracles import brute_force_levels


@st.composite
def ordering_and_labels(draw, max_side=6, missing=True):
    rows = draw(st.integers(1, max_side))
    cols = draw(st.integers(1, max_side))
    perm = draw(st.permutations(range(rows * cols)))
    labels = draw(arrays(np.uint8, (rows, cols), elements=st.integers(0, 2 if missing else 1)))
    return np.array(perm).reshape(rows, cols), labels


@given(ordering_and_labels())
def test_correction_is_consistent_and_optimal(case):
    pi, labels = case
    theta, grid = correct_timestep(labels, pi)
    assert level_of_labels(grid, pi) == theta
    costs = err_profile(labels, pi)
    assert costs[theta] == costs.min()
    assert (costs[:theta] > costs.min()).all()


@given(ordering_and_labels())
def test_profile_bounded_by_observed(case):
    pi, labels = case
    assert err_profile(labels, pi).max() <= np.count_nonzero(labels != 2)


@settings(max_examples=60, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 4), st.integers(2, 6)), elements=st.integers(0, 6)),
       st.sampled_from([0, 0.2, 0.5, 1, 1.5, 2.5]))
def test_dp_matches_brute_force(profiles, alpha):
    levels, costs = smooth_levels(profiles, alpha)
    cost, seq = brute_force_levels(profiles, alpha)
    assert levels.tolist() == seq
    assert costs.mismatch_cost + Fraction(alpha).limit_denominator(10**6) * costs.transition_cost == cost


@settings(deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(2, 9)), elements=st.integers(0, 9)))
def test_sweep_tradeoff_monotone(profiles):
    sweep = alpha_sweep(profiles, [0, 0.3, 0.7, 1.1, 2, 5])
    assert np.all(np.diff(sweep.mismatch) >= 0)
    assert np.all(np.diff(sweep.transition) <= 0)


@st.composite
def fine_case(draw):
    s = draw(st.integers(1, 3))
    cr, cc = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    rows, cols = s * cr, s * cc
    perm = np.array(draw(st.permutations(range(rows * cols)))).reshape(rows, cols)
    theta = draw(st.integers(0, rows * cols))
    wth = draw(st.integers(1, s * s))
    return perm, theta, s, wth


@given(fine_case())
def test_perfect_fusion_step_is_exact(case):
    pi, theta, s, wth = case
    grid = build_mapping_grid(*pi.shape, s)
    truth = labels_at_level(pi, theta)
    coarse = aggregate_to_lsr(truth[None], grid, wth)[0]
    tri = confident_hsr_labels(coarse, grid, wth, pi)
    out, pp = pivot_propagate(tri, pi)
    known = out != 3
    assert np.array_equal(out[known], truth[known])
    assert np.count_nonzero(~known) == pp.gap(pi.size)


@given(st.integers(1, 500), st.integers(1, 60), st.integers(0, 500))
def test_bound_in_unit_interval(gr, C, k):
    k = min(k, gr)
    v = bound_within_k(BoundQuery(gr, C, k))
    assert 0.0 <= v <= 1.0


@given(arrays(np.uint8, st.tuples(st.integers(1, 3), st.integers(1, 5), st.integers(1, 5)),
              elements=st.integers(0, 3)))
def test_stack_bytes_round_trip(stack):
    data = formats.encode_stack(stack)
    assert formats.encode_stack(formats.decode_stack(data)) == data


@given(arrays(np.uint8, st.tuples(st.integers(1, 3), st.integers(1, 5), st.integers(1, 5)),
              elements=st.integers(0, 2)))
def test_majority_commutes_with_inversion(stack):
    flip = np.where(stack == 2, 2, 1 - stack).astype(np.uint8)
    a = majority_spatial(stack)
    assert np.array_equal(np.where(a == 2, 2, 1 - a), majority_spatial(flip))


@given(ordering_and_labels(missing=False), st.integers(0, 3))
def test_render_round_trip(case, extra):
    pi, _ = case
    levels = [min(extra * t, pi.size) for t in range(4)]
    stack = render_stack(pi, levels)
    assert [level_of_labels(g, pi) for g in stack] == levels

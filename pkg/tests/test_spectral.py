import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robcov import RngStream, SpectrumEstimator, mcm_spectrum, rank_one_gap_sq, sym_eigen
from robcov.simulate import reference_params

CHI1_MEDIAN = 0.454936


def _brute_force_gap(lam, delta, u):
    total = sum((delta[k] - lam[k] * u[k] ** 2) ** 2 for k in range(len(lam)))
    for i in range(len(lam)):
        for j in range(len(lam)):
            if i != j:
                total += u[i] ** 2 * u[j] ** 2 * lam[i] * lam[j]
    return total


def test_gap_single_component():
    assert rank_one_gap_sq([2.0], [0.5], [1.5]) == pytest.approx((0.5 - 2.0 * 2.25) ** 2)


def test_gap_hand_value():
    assert rank_one_gap_sq([1.0, 1.0], [1.0, 1.0], [1.0, 1.0]) == pytest.approx(2.0)


@given(st.integers(0, 2 ** 32), st.integers(1, 8))
@settings(max_examples=60, deadline=None)
def test_gap_matches_brute_force(seed, d):
    r = RngStream(seed)
    lam = np.abs(r.normals(d)) + 0.1
    delta = np.abs(r.normals(d)) + 0.1
    u = r.normals(d)
    fast = rank_one_gap_sq(lam, delta, u)
    slow = _brute_force_gap(lam, delta, u)
    assert fast == pytest.approx(slow, rel=1e-12)
    assert fast >= 0.0


def test_univariate_reconstruction():
    # in one dimension the covariation eigenvalue is the chi2(1) median times
    # the variance, so delta = 0.454936 must reconstruct to 1.0
    est = SpectrumEstimator([CHI1_MEDIAN])
    est.advance([CHI1_MEDIAN], 100000, RngStream(13))
    assert est.average[0] == pytest.approx(1.0, rel=0.02)


def test_advance_split_equals_single_run():
    delta = np.array([1.0, 0.6, 0.2])
    b = SpectrumEstimator(delta.copy())
    rng = RngStream(3)
    b.advance(delta, 700, rng)
    b.advance(delta, 300, rng)
    c = SpectrumEstimator(delta.copy())
    c.advance(delta, 1000, RngStream(3))
    assert np.array_equal(b.values, c.values)
    assert np.array_equal(b.average, c.average)
    assert b.weight_sum == c.weight_sum
    assert b.iterations == c.iterations


def test_average_is_log_weighted_mean_and_weights_sum():
    delta = np.array([0.8, 0.3])
    est = SpectrumEstimator(delta.copy(), omega=2.0)
    rng = RngStream(5)
    trajectory = []
    for _ in range(1000):
        est.advance(delta, 1, rng)
        trajectory.append(est.values.copy())
    weights = np.array([math.log(t + 1.0) ** 2.0 for t in range(1, 1001)])
    expected = (weights[:, None] * np.array(trajectory)).sum(axis=0) / weights.sum()
    assert np.allclose(est.average, expected, rtol=1e-12)
    accum = sum(math.log(t + 1.0) ** 2.0 for t in range(0, 1001))
    assert est.weight_sum == pytest.approx(accum, rel=1e-9)
    combo = weights / weights.sum()
    assert combo.sum() == pytest.approx(1.0, abs=1e-9)


def test_floor_engages_on_degenerate_target():
    delta = np.array([1.0, 0.0])
    est = SpectrumEstimator(np.array([1.0, 1.0]))
    est.advance(delta, 5000, RngStream(8))
    assert np.all(est.values > 0.0)
    assert est.values[1] <= 1e-3  # driven toward the floor


def test_rejects_negative_target():
    est = SpectrumEstimator([1.0])
    with pytest.raises(ValueError):
        est.advance([-0.1], 10, RngStream(0))


def test_rejects_nonpositive_start():
    with pytest.raises(ValueError):
        SpectrumEstimator([1.0, 0.0])


def test_univariate_steps_have_unit_normalized_magnitude():
    # in d=1 the normalized update direction is +-1, so each un-floored step
    # moves the iterate by exactly the step size
    est = SpectrumEstimator([5.0])
    delta = np.array([1.0])
    rng = RngStream(2)
    for i in range(1, 50):
        prev = est.values[0]
        est.advance(delta, 1, rng)
        step = est.schedule.at(i)
        assert abs(abs(est.values[0] - prev) - step) < 1e-12 * max(1.0, step)


@given(st.integers(0, 2 ** 32))
@settings(max_examples=40, deadline=None)
def test_bounded_increment(seed):
    r = RngStream(seed)
    d = 5
    lam = np.abs(r.normals(d)) + 0.05
    delta = np.abs(r.normals(d)) + 0.05
    est = SpectrumEstimator(lam.copy())
    est.advance(delta, 1, r)
    step = est.schedule.at(1)
    assert np.max(np.abs(est.values - lam)) <= step * (1.0 + 1e-12)


def test_forward_map_homogeneity_exact():
    lam = np.array([2.0, 1.0, 0.5])
    a = mcm_spectrum(lam, 20000, RngStream(31))
    b = mcm_spectrum(2.0 * lam, 20000, RngStream(31))
    assert np.array_equal(b, 2.0 * a)


def test_forward_map_univariate_median():
    delta = mcm_spectrum(np.array([1.0]), 400000, RngStream(17))
    assert delta[0] == pytest.approx(CHI1_MEDIAN, rel=0.02)


def test_round_trip_reference_spectrum():
    _, sigma0 = reference_params(10)
    lam_true = sym_eigen(sigma0).values
    delta = mcm_spectrum(lam_true, 200000, RngStream(7))
    est = SpectrumEstimator(delta.copy())
    est.advance(delta, 100000, RngStream(23))
    rel = np.abs(est.average - lam_true) / lam_true
    assert np.max(rel) <= 0.05

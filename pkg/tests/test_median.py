import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robcov import OnlineMedian, RngStream, StepSchedule, geometric_median
from robcov.numerics import gaussian_factor
from robcov.simulate import reference_params


# --- step schedule -----------------------------------------------------------

def test_step_values():
    sched = StepSchedule(c=1.0, exponent=0.75, n0=0.0)
    assert sched.at(1) == 1.0
    assert sched.at(16) == pytest.approx(0.125, rel=1e-15)
    scaled = sched.scaled(math.sqrt(10.0))
    assert scaled.at(16) == pytest.approx(math.sqrt(10.0) * 16 ** -0.75, rel=1e-15)


def test_step_strictly_decreasing():
    sched = StepSchedule(c=2.0, exponent=0.6, n0=3.0)
    vals = [sched.at(n) for n in range(1, 50)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_step_validation():
    with pytest.raises(ValueError):
        StepSchedule(exponent=0.4)
    with pytest.raises(ValueError):
        StepSchedule(exponent=1.0)
    with pytest.raises(ValueError):
        StepSchedule(c=0.0)
    with pytest.raises(ValueError):
        StepSchedule(n0=-1.0)


# --- Weiszfeld ----------------------------------------------------------------

def test_weiszfeld_square_symmetry():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert np.allclose(geometric_median(pts), [0.5, 0.5], atol=1e-6)


def test_weiszfeld_1d_is_sample_median():
    pts = np.array([[-1.0], [0.0], [5.0]])
    assert abs(geometric_median(pts)[0]) < 1e-6


def test_weiszfeld_1d_matches_median_odd_n():
    rng = np.random.default_rng(0)
    for _ in range(5):
        pts = rng.standard_normal((11, 1))
        med = geometric_median(pts, tol=1e-10)
        assert med[0] == pytest.approx(np.median(pts), abs=1e-7)


def test_weiszfeld_consistency_d10():
    mu0, sigma0 = reference_params(10)
    factor = gaussian_factor(sigma0)
    z = RngStream(100).normals(1000 * 10).reshape(1000, 10)
    pts = mu0 + z @ factor.T
    assert np.linalg.norm(geometric_median(pts) - mu0) <= 0.1


def test_weiszfeld_permutation_invariance(np_rng):
    pts = np_rng.standard_normal((200, 4))
    perm = np_rng.permutation(200)
    a = geometric_median(pts, tol=1e-12)
    b = geometric_median(pts[perm], tol=1e-12)
    assert np.allclose(a, b, atol=1e-9)


def test_weiszfeld_all_points_coincident():
    pts = np.tile([2.0, 3.0], (5, 1))
    assert np.array_equal(geometric_median(pts), [2.0, 3.0])


# --- online recursion -----------------------------------------------------------

def test_online_unit_step_normalizes_direction():
    est = OnlineMedian(np.zeros(2), StepSchedule(c=1.0, exponent=0.75))
    est.update(np.array([3.0, 4.0]))
    assert np.allclose(est.point, [0.6, 0.8], rtol=1e-15)


def test_online_coincident_observation_skips_gradient():
    est = OnlineMedian(np.array([1.0, 2.0]))
    before = est.point.copy()
    est.update(np.array([1.0, 2.0]))
    assert np.array_equal(est.point, before)
    assert est.count == 1.0


def test_average_is_mean_of_iterates(np_rng):
    est = OnlineMedian(np.zeros(3))
    iterates = [est.point.copy()]
    for _ in range(100):
        est.update(np_rng.standard_normal(3))
        iterates.append(est.point.copy())
    assert np.allclose(est.average, np.mean(iterates, axis=0), atol=1e-12)


def test_online_agrees_with_weiszfeld():
    mu0, sigma0 = reference_params(10)
    factor = gaussian_factor(sigma0)
    z = RngStream(7).normals(10000 * 10).reshape(10000, 10)
    pts = mu0 + z @ factor.T
    est = OnlineMedian(pts[:50].mean(axis=0))
    for row in pts:
        est.update(row)
    offline = geometric_median(pts)
    assert np.linalg.norm(est.average - offline) <= 0.1
    assert np.linalg.norm(est.average - mu0) <= 0.1


def test_block_of_one_with_unit_scale_equals_online():
    rows = RngStream(3).normals(40).reshape(20, 2)
    a = OnlineMedian(np.zeros(2))
    b = OnlineMedian(np.zeros(2))
    for row in rows:
        a.update(row)
        b.update_block(row[None, :])
    assert np.array_equal(a.point, b.point)
    assert np.array_equal(a.average, b.average)


def test_block_symmetric_pair_cancels():
    est = OnlineMedian(np.array([0.5, -0.25]))
    before = est.point.copy()
    v = np.array([1.0, 2.0])
    est.update_block(np.vstack([est.point + v, est.point - v]))
    assert np.array_equal(est.point, before)


def test_block_stream_consistency():
    mu0, sigma0 = reference_params(10)
    factor = gaussian_factor(sigma0)
    z = RngStream(11).normals(10000 * 10).reshape(10000, 10)
    pts = mu0 + z @ factor.T
    est = OnlineMedian(pts[:10].mean(axis=0), StepSchedule().scaled(math.sqrt(10.0)))
    for pos in range(0, 10000, 10):
        est.update_block(pts[pos:pos + 10])
    assert np.linalg.norm(est.average - geometric_median(pts)) <= 0.1


def test_block_rejects_empty():
    with pytest.raises(ValueError):
        OnlineMedian(np.zeros(2)).update_block(np.empty((0, 2)))


@given(st.integers(0, 2 ** 32), st.floats(1.0, 1e9))
@settings(max_examples=40, deadline=None)
def test_bounded_influence(seed, magnitude):
    est = OnlineMedian(np.zeros(3))
    x = RngStream(seed).normals(3) * magnitude
    before = est.point.copy()
    est.update(x)
    step = est.schedule.at(est.count)
    assert np.linalg.norm(est.point - before) <= step * (1.0 + 1e-12)


def test_translation_equivariance():
    rows = RngStream(5).normals(60).reshape(30, 2)
    shift = np.array([10.0, -3.0])
    a = OnlineMedian(np.zeros(2))
    b = OnlineMedian(shift.copy())
    for row in rows:
        a.update(row)
        b.update(row + shift)
    assert np.allclose(b.point, a.point + shift, atol=1e-9)
    assert np.allclose(b.average, a.average + shift, atol=1e-9)
    off_a = geometric_median(rows, tol=1e-12)
    off_b = geometric_median(rows + shift, tol=1e-12)
    assert np.allclose(off_b, off_a + shift, atol=1e-9)

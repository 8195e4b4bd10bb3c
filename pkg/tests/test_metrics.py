import numpy as np
import pytest

from robcov import (ConfusionCounts, OracleDetector, RngStream,
                    TrajectoryRecorder, frobenius_error)
from robcov.detect import DetectionRecord
from robcov.numerics import gaussian_factor
from robcov.simulate import reference_params


def test_frobenius_trivial_cases(np_rng):
    a = np_rng.standard_normal((4, 4))
    assert frobenius_error(a, a) == 0.0
    assert frobenius_error(a + np.eye(4), a) == pytest.approx(2.0)  # sqrt(d)
    b = np_rng.standard_normal((4, 4))
    brute = sum((a[i, j] - b[i, j]) ** 2 for i in range(4) for j in range(4)) ** 0.5
    assert frobenius_error(a, b) == pytest.approx(brute, rel=1e-12)


def test_frobenius_shape_mismatch():
    with pytest.raises(ValueError):
        frobenius_error(np.eye(2), np.eye(3))


def test_oracle_center_is_inlier():
    mu0, sigma0 = reference_params(5)
    oracle = OracleDetector(mu0, sigma0)
    assert not oracle(mu0)


def test_oracle_univariate_threshold():
    oracle = OracleDetector([0.0], np.eye(1), alpha=0.05)
    assert not oracle([1.9599])
    assert oracle([1.9601])
    assert oracle.threshold == pytest.approx(3.8415, abs=1e-4)


def test_oracle_flag_rate_matches_alpha():
    mu0, sigma0 = reference_params(10)
    z = RngStream(4).normals(100000 * 10).reshape(100000, 10)
    rows = mu0 + z @ gaussian_factor(sigma0).T
    oracle = OracleDetector(mu0, sigma0, alpha=0.05)
    rate = oracle.classify(rows).mean()
    assert rate == pytest.approx(0.05, abs=0.005)


def test_oracle_batch_matches_scalar(np_rng):
    mu0, sigma0 = reference_params(4)
    oracle = OracleDetector(mu0, sigma0)
    rows = np_rng.standard_normal((50, 4)) * 3
    batch = oracle.classify(rows)
    assert batch.tolist() == [oracle(r) for r in rows]


def test_confusion_quadrants():
    c = ConfusionCounts()
    c.add(True, True)
    c.add(True, False)
    c.add(False, True)
    c.add(False, False)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 1, 1)
    assert c.total == 4
    assert c.fp_rate() == 0.5
    assert c.fn_rate() == 0.5


def test_confusion_requires_label():
    with pytest.raises(ValueError, match="label"):
        ConfusionCounts().add(True, None)


def test_confusion_matches_recount(np_rng):
    verdicts = np_rng.random(500) < 0.3
    truths = np_rng.random(500) < 0.2
    c = ConfusionCounts()
    for v, t in zip(verdicts, truths):
        c.add(bool(v), bool(t))
    assert c.tp == int(np.sum(verdicts & truths))
    assert c.fp == int(np.sum(verdicts & ~truths))
    assert c.fn == int(np.sum(~verdicts & truths))
    assert c.tn == int(np.sum(~verdicts & ~truths))


def _rec(i, flag, truth):
    return DetectionRecord(index=i, raw_distance=1.0, scaled_distance=1.0,
                           is_outlier=flag, truth=truth)


def test_trajectory_cadence_and_monotone_counts():
    rec = TrajectoryRecorder("online", every=10)
    for i in range(1, 101):
        rec.observe(_rec(i, i % 7 == 0, i % 3 == 0))
        rec.checkpoint(i, frob=1.0 / i, log10det=-0.5)
    rec.checkpoint(100, frob=0.01, log10det=-0.5, force=True)
    iters = [row[1] for row in rec.rows]
    assert iters[0] == 1
    assert all(b - a >= 10 for a, b in zip(iters[1:-1], iters[2:-1]))
    for col in (4, 5, 6, 7):
        vals = [row[col] for row in rec.rows]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
    # counts at every checkpoint sum to the observations consumed by then
    for row in rec.rows:
        assert sum(row[4:]) == row[1]


def test_trajectory_forced_final_checkpoint():
    rec = TrajectoryRecorder("naive", every=50)
    rec.observe(_rec(1, True, True))
    rec.checkpoint(1, 0.5, 0.0)
    rec.observe(_rec(2, False, False))
    rec.checkpoint(2, 0.4, 0.0)     # off-cadence: skipped
    assert len(rec.rows) == 1
    rec.checkpoint(2, 0.4, 0.0, force=True)
    assert len(rec.rows) == 2
    rec.checkpoint(2, 0.4, 0.0, force=True)  # same iteration: no duplicate
    assert len(rec.rows) == 2

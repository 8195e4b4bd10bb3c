"""Evaluation criteria: Frobenius estimation error, determinants, confusion
counts against ground truth, the oracle detector, and per-iteration
trajectories in the fixed CSV schema."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .numerics import chi2_quantile

TRAJECTORY_COLUMNS = ("method", "iteration", "frob", "log10det", "fp", "fn", "tp", "tn")
DETECTION_COLUMNS = ("method", "index", "raw_distance", "scaled_distance",
                     "is_outlier", "truth")


def frobenius_error(estimate, truth):
    """||estimate - truth||_F."""
    a = np.asarray(estimate, dtype=float)
    b = np.asarray(truth, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


class OracleDetector:
    """Mahalanobis rule with the true parameters: flags x when
    (x - mu)^T Sigma^{-1} (x - mu) exceeds the chi-square (1-alpha) quantile.

    Bounds achievable detection performance; uses a factorization
    precomputed at construction.
    """

    def __init__(self, mu, sigma, alpha=0.05):
        self.mu = np.asarray(mu, dtype=float)
        self.chol = np.linalg.cholesky(np.asarray(sigma, dtype=float))
        self.threshold = chi2_quantile(self.mu.shape[0], 1.0 - alpha)

    def distance(self, x):
        y = np.linalg.solve(self.chol, np.asarray(x, dtype=float) - self.mu)
        return float(y @ y)

    def __call__(self, x):
        return self.distance(x) > self.threshold

    def distances(self, rows):
        y = np.linalg.solve(self.chol, (np.asarray(rows, dtype=float) - self.mu).T)
        return np.einsum("ij,ij->j", y, y)

    def classify(self, rows):
        return self.distances(rows) > self.threshold


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def add(self, predicted_outlier, truth_outlier):
        """Increment exactly one cell; requires a ground-truth label."""
        if truth_outlier is None:
            raise ValueError("ground-truth label required for confusion counts")
        if predicted_outlier and truth_outlier:
            self.tp += 1
        elif predicted_outlier and not truth_outlier:
            self.fp += 1
        elif not predicted_outlier and truth_outlier:
            self.fn += 1
        else:
            self.tn += 1

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def fp_rate(self):
        inliers = self.fp + self.tn
        return self.fp / inliers if inliers else 0.0

    def fn_rate(self):
        outliers = self.fn + self.tp
        return self.fn / outliers if outliers else 0.0


@dataclass
class TrajectoryRecorder:
    """Cumulative confusion counts plus error checkpoints for one method.

    Rows follow the fixed schema (method, iteration, frob, log10det, fp, fn,
    tp, tn); a checkpoint lands whenever at least ``every`` observations have
    passed since the previous one (so block updates checkpoint at block
    boundaries) and on a forced final flush.
    """

    method: str
    every: int = 10
    counts: ConfusionCounts = field(default_factory=ConfusionCounts)
    rows: List[Tuple] = field(default_factory=list)
    _last_iteration: Optional[int] = None

    def observe(self, record, truth=None):
        label = record.truth if truth is None else truth
        self.counts.add(record.is_outlier, label)

    def due(self, iteration, force=False):
        """Whether a checkpoint should land at this observation count (lets
        callers skip computing the error terms off-cadence)."""
        if iteration == self._last_iteration:
            return False
        return (force or self._last_iteration is None
                or iteration >= self._last_iteration + self.every)

    def checkpoint(self, iteration, frob, log10det, force=False):
        if not self.due(iteration, force):
            return
        c = self.counts
        self.rows.append((self.method, iteration, float(frob), float(log10det),
                          c.fp, c.fn, c.tp, c.tn))
        self._last_iteration = iteration

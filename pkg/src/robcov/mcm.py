"""Median covariation matrix estimation under Frobenius geometry: offline
Weiszfeld variant and online/streaming averaged stochastic gradients.

The median covariation matrix is the geometric median of the random
rank-one matrices (X - m)(X - m)^T; for symmetric laws it shares the
eigenvectors of the covariance matrix, which is what makes the spectral
reconstruction in :mod:`robcov.spectral` possible.
"""

import numpy as np

from .numerics import symmetrize
from .steps import StepSchedule

_COINCIDENT = 1e-12


def _gap_norms(centered, v):
    # ||c c^T - V||_F^2 = (c.c)^2 - 2 c^T V c + ||V||_F^2, no n*d*d stack.
    sq = np.einsum("ij,ij->i", centered, centered)
    quad = np.einsum("ij,jk,ik->i", centered, v, centered)
    gap_sq = sq * sq - 2.0 * quad + float(np.sum(v * v))
    return np.sqrt(np.maximum(gap_sq, 0.0))


def median_covariation(points, center, tol=1e-8, max_iter=500):
    """Weiszfeld iteration for the median covariation matrix around a fixed
    center (an estimate of the geometric median).

    Same stopping rule and zero-distance guard as the vector Weiszfeld,
    applied in Frobenius norm.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("need a non-empty 2-D array of points")
    c = x - np.asarray(center, dtype=float)
    v = symmetrize(c.T @ c / x.shape[0])
    for _ in range(max_iter):
        dist = _gap_norms(c, v)
        keep = dist > _COINCIDENT
        if not np.any(keep):
            return v
        w = 1.0 / dist[keep]
        ck = c[keep]
        v_next = symmetrize((ck * w[:, None]).T @ ck / w.sum())
        if np.linalg.norm(v_next - v) <= tol * (1.0 + np.linalg.norm(v)):
            return v_next
        v = v_next
    return v


class OnlineMCM:
    """Averaged stochastic gradient tracker of the median covariation matrix.

    Mirrors :class:`robcov.median.OnlineMedian` with matrix iterates and
    Frobenius geometry; both iterate and average are re-symmetrized after
    every update.  The center passed to ``update``/``update_block`` must be
    the median average from *before* the current observation(s) were
    absorbed, and is shared by every member of a block.
    """

    def __init__(self, start, schedule=None, average=None, count=0.0):
        self.matrix = symmetrize(start)
        self.average = symmetrize(start if average is None else average)
        self.schedule = schedule or StepSchedule()
        self.count = float(count)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def update(self, x, center):
        """One observation with gradient direction (G - V)/||G - V||_F,
        G = (x-center)(x-center)^T; skipped when G coincides with V."""
        c = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
        gap = np.outer(c, c) - self.matrix
        # np.sum, not np.linalg.norm: the block path must reduce identically
        # so that a one-row block reproduces this update bit for bit
        nrm = float(np.sqrt(np.sum(gap * gap)))
        self.count += 1.0
        if nrm >= _COINCIDENT:
            self.matrix = symmetrize(self.matrix + self.schedule.at(self.count) * (gap / nrm))
        self.average = symmetrize(self.average + (self.matrix - self.average) / (self.count + 1.0))
        return self

    def update_block(self, block, center):
        """One block: mean of normalized gradients, one batch-scaled step."""
        block = np.asarray(block, dtype=float)
        if block.ndim != 2 or block.shape[0] == 0:
            raise ValueError("block must be a non-empty 2-D array")
        c = block - np.asarray(center, dtype=float)
        gaps = c[:, :, None] * c[:, None, :] - self.matrix
        nrm = np.sqrt(np.sum(gaps * gaps, axis=(1, 2)))
        keep = nrm > _COINCIDENT
        grad = np.zeros_like(self.matrix)
        if np.any(keep):
            grad = (gaps[keep] / nrm[keep, None, None]).sum(axis=0)
        self.count += 1.0
        self.matrix = symmetrize(self.matrix + self.schedule.at(self.count) * (grad / block.shape[0]))
        self.average = symmetrize(self.average + (self.matrix - self.average) / (self.count + 1.0))
        return self

"""Geometric median estimation: offline Weiszfeld fixed point and the online
averaged stochastic gradient recursion."""

import numpy as np

from .steps import StepSchedule

_COINCIDENT = 1e-12


def geometric_median(points, tol=1e-8, max_iter=500):
    """Weiszfeld fixed-point iteration for the geometric median.

    Points within 1e-12 of the current iterate are dropped from that
    iteration's sums (zero-distance guard); if every point coincides with
    the iterate, that point is returned.  Stops when the iterate moves by
    at most ``tol * (1 + ||m||)`` or after ``max_iter`` iterations.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("need a non-empty 2-D array of points")
    m = x.mean(axis=0)
    for _ in range(max_iter):
        dist = np.linalg.norm(x - m, axis=1)
        keep = dist > _COINCIDENT
        if not np.any(keep):
            return m
        w = 1.0 / dist[keep]
        m_next = (w @ x[keep]) / w.sum()
        if np.linalg.norm(m_next - m) <= tol * (1.0 + np.linalg.norm(m)):
            return m_next
        m = m_next
    return m


class OnlineMedian:
    """Averaged stochastic gradient tracker of the geometric median.

    ``point`` is the raw iterate, ``average`` the running (Polyak) average
    used as the actual estimate, ``count`` the update index driving the step
    schedule.  The step for update n+1 is ``schedule.at(n+1)`` and the
    average uses weight 1/(n+2), so ``average`` equals the arithmetic mean
    of all iterates including the start value.
    """

    def __init__(self, start, schedule=None, average=None, count=0.0):
        self.point = np.array(start, dtype=float)
        self.average = np.array(start if average is None else average, dtype=float)
        self.schedule = schedule or StepSchedule()
        self.count = float(count)

    @property
    def dim(self):
        return self.point.shape[0]

    def update(self, x):
        """One observation; the normalized-gradient step is skipped when x
        coincides with the iterate (direction undefined), the average and
        counter still advance."""
        x = np.asarray(x, dtype=float)
        diff = x - self.point
        # np.sum, not np.linalg.norm: the block path must reduce identically
        # so that a one-row block reproduces this update bit for bit
        nrm = float(np.sqrt(np.sum(diff * diff)))
        self.count += 1.0
        if nrm >= _COINCIDENT:
            self.point = self.point + self.schedule.at(self.count) * (diff / nrm)
        self.average += (self.point - self.average) / (self.count + 1.0)
        return self

    def update_block(self, block):
        """One block of observations: averaged normalized gradients, one
        (batch-scaled) step.  Coincident members contribute zero."""
        block = np.asarray(block, dtype=float)
        if block.ndim != 2 or block.shape[0] == 0:
            raise ValueError("block must be a non-empty 2-D array")
        diffs = block - self.point
        nrm = np.sqrt(np.sum(diffs * diffs, axis=1))
        keep = nrm > _COINCIDENT
        grad = np.zeros(self.dim)
        if np.any(keep):
            grad = (diffs[keep] / nrm[keep, None]).sum(axis=0)
        self.count += 1.0
        self.point = self.point + self.schedule.at(self.count) * (grad / block.shape[0])
        self.average += (self.point - self.average) / (self.count + 1.0)
        return self

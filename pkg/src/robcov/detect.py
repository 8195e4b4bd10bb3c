"""Shared outlier-verdict machinery: scaled Mahalanobis distances against a
chi-square threshold, with an online median-of-distances tracker."""

from dataclasses import dataclass
from typing import Optional

from .numerics import chi2_quantile
from .steps import StepSchedule

_MED_FLOOR = 1e-12


@dataclass
class DetectionRecord:
    """Per-observation verdict with raw and scaled squared distances."""

    index: int
    raw_distance: float
    scaled_distance: float
    is_outlier: bool
    truth: Optional[bool] = None


class ScaledDistanceGate:
    """Flags observations whose scaled squared Mahalanobis distance exceeds
    the chi-square (1 - alpha) quantile.

    The scale factor chi2(d, 0.5) / med re-anchors the running median of raw
    distances to the chi-square median; ``med`` is tracked online by the
    sign-driven stochastic approximation
    med <- med - gamma * (1{raw <= med} - 0.5), updated *after* the verdict
    is issued.  Ties (scaled == threshold) count as inliers.
    """

    def __init__(self, dim, alpha=0.05, schedule=None, initial_median=1.0, count=0):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        self.dim = int(dim)
        self.alpha = float(alpha)
        self.chi_median = chi2_quantile(dim, 0.5)
        self.threshold = chi2_quantile(dim, 1.0 - alpha)
        self.schedule = schedule or StepSchedule(c=1.0, exponent=0.66, n0=0.0)
        self.median_estimate = max(float(initial_median), _MED_FLOOR)
        self.count = int(count)

    def score(self, raw, index, truth=None) -> DetectionRecord:
        """Verdict for one raw squared distance, then absorb it into the
        running median estimate."""
        raw = float(raw)
        scaled = self.chi_median / self.median_estimate * raw
        record = DetectionRecord(index=index, raw_distance=raw,
                                 scaled_distance=scaled,
                                 is_outlier=scaled > self.threshold,
                                 truth=truth)
        self.count += 1
        step = self.schedule.at(self.count)
        indicator = 1.0 if raw <= self.median_estimate else 0.0
        self.median_estimate = max(self.median_estimate - step * (indicator - 0.5),
                                   _MED_FLOOR)
        return record

    def to_state(self):
        return {"median_estimate": self.median_estimate, "count": self.count}

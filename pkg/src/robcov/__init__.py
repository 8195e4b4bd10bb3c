"""Online robust covariance estimation and outlier detection.

Location is tracked by an averaged stochastic-gradient geometric median,
scatter by the median covariation matrix, and the covariance spectrum is
reconstructed from the covariation spectrum by a Monte-Carlo
stochastic-approximation scheme; incoming observations are flagged through
scaled Mahalanobis distances against a chi-square threshold.  A non-robust
streaming sample-covariance baseline and a full simulation/evaluation
harness (see the ``robcov`` CLI) accompany the estimators.

Hot kernels run in a compiled extension when available; set
``ROBCOV_BACKEND=python`` to force the pure-Python fallback (see
``robcov.backend.ACTIVE`` for the selected one).
"""

from .backend import ACTIVE as active_backend
from .baseline import SampleCovEstimator
from .detect import DetectionRecord, ScaledDistanceGate
from .median import OnlineMedian, geometric_median
from .mcm import OnlineMCM, median_covariation
from .metrics import ConfusionCounts, OracleDetector, TrajectoryRecorder, frobenius_error
from .numerics import (EigenSystem, chi2_quantile, gaussian_factor, mvn_sample,
                       sym_eigen, symmetrize, toeplitz_corr)
from .rng import RngStream, derive_seed
from .robust import RobustEstimator
from .simulate import (LabeledSample, ScenarioParams, calibrate, gaussian_kl,
                       influence, reference_params, sample_array, sample_stream,
                       scenario, shift_direction)
from .spectral import SpectrumEstimator, mcm_spectrum, rank_one_gap_sq
from .steps import StepSchedule

__version__ = "0.1.0"

__all__ = [
    "ConfusionCounts", "DetectionRecord", "EigenSystem", "LabeledSample",
    "OnlineMCM", "OnlineMedian", "OracleDetector", "RngStream",
    "RobustEstimator", "SampleCovEstimator", "ScaledDistanceGate",
    "ScenarioParams", "SpectrumEstimator", "StepSchedule",
    "TrajectoryRecorder", "active_backend", "calibrate", "chi2_quantile",
    "derive_seed", "frobenius_error", "gaussian_factor", "gaussian_kl",
    "geometric_median", "influence", "mcm_spectrum", "median_covariation",
    "mvn_sample", "rank_one_gap_sq", "reference_params", "sample_array",
    "sample_stream", "scenario", "shift_direction", "sym_eigen", "symmetrize",
    "toeplitz_corr",
]

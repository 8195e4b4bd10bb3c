"""Non-robust online baseline: exact streaming sample mean/covariance with a
rank-one-maintained inverse and the same scaled-distance verdict machinery
as the robust estimator (so detection comparisons isolate the estimator)."""

import logging

import numpy as np

from .detect import ScaledDistanceGate
from .numerics import symmetrize
from .steps import StepSchedule

logger = logging.getLogger(__name__)

_SM_GUARD = 1e-12


class SampleCovEstimator:
    """Streaming sample mean and (population, divide-by-n) covariance.

    The covariance recursion is the exact rank-one form, so after any update
    sequence ``cov`` equals the two-pass sample covariance of everything
    consumed; the inverse is maintained in O(d^2) by the Sherman-Morrison
    identity, falling back to a direct pseudo-inverse when the update
    denominator degenerates.
    """

    def __init__(self, *, mean, cov, cov_inv, n_obs, alpha, gate, sm_fallbacks=0):
        self.mean = mean
        self.cov = cov
        self.cov_inv = cov_inv
        self.n_obs = int(n_obs)
        self.alpha = float(alpha)
        self.gate = gate
        self.sm_fallbacks = int(sm_fallbacks)

    @classmethod
    def from_batch(cls, init_data, alpha=0.05, dist_step=None):
        """Exact two-pass mean/covariance on the initialization window; the
        inverse comes from a direct solve.  Singular covariance raises with
        advice to enlarge the window."""
        x = np.asarray(init_data, dtype=float)
        if x.ndim != 2:
            raise ValueError("initialization data must be 2-D (rows = observations)")
        n_init, d = x.shape
        if n_init <= d:
            raise ValueError(f"need more than d={d} initialization rows, got {n_init}")
        bad = np.flatnonzero(~np.isfinite(x).all(axis=1))
        if bad.size:
            raise ValueError(f"non-finite values in initialization row {bad[0]}")
        mean = x.mean(axis=0)
        centered = x - mean
        cov = symmetrize(centered.T @ centered / n_init)
        try:
            cov_inv = np.linalg.inv(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("initialization covariance is singular; "
                             "use a larger initialization window") from exc
        if not np.all(np.isfinite(cov_inv)) or np.linalg.cond(cov) > 1e12:
            raise ValueError("initialization covariance is near-singular; "
                             "use a larger initialization window")
        gate = ScaledDistanceGate(d, alpha=alpha,
                                  schedule=dist_step or StepSchedule(c=1.0, exponent=0.66, n0=0.0))
        raw = np.einsum("ij,jk,ik->i", centered, cov_inv, centered)
        gate.median_estimate = max(float(np.median(raw)), 1e-12)
        return cls(mean=mean, cov=cov, cov_inv=symmetrize(cov_inv),
                   n_obs=n_init, alpha=alpha, gate=gate)

    @property
    def dim(self):
        return self.mean.shape[0]

    def covariance(self):
        return self.cov.copy()

    def update(self, x):
        """Absorb one observation and return its DetectionRecord.

        Mean/covariance follow the exact recursions
        mean' = mean + u/(n+1), cov' = (n/(n+1)) (cov + u u^T/(n+1)) with
        u = x - mean; the verdict uses the post-update estimates.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != self.mean.shape:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite observation rejected")
        n = self.n_obs
        u = x - self.mean
        self.mean = self.mean + u / (n + 1.0)
        shrink = n / (n + 1.0)
        b = 1.0 / (n + 1.0)
        self.cov = symmetrize(shrink * (self.cov + b * np.outer(u, u)))

        iu = self.cov_inv @ u
        denom = 1.0 + b * float(u @ iu)
        if abs(denom) < _SM_GUARD:
            logger.warning("Sherman-Morrison denominator %.3e degenerate at n=%d; "
                           "recomputing inverse directly", denom, n + 1)
            self.sm_fallbacks += 1
            self.cov_inv = symmetrize(np.linalg.pinv(self.cov))
        else:
            self.cov_inv = symmetrize((self.cov_inv - (b / denom) * np.outer(iu, iu)) / shrink)
        self.n_obs = n + 1

        v = x - self.mean
        raw = float(v @ self.cov_inv @ v)
        return self.gate.score(raw, index=n)

    # -- snapshots --------------------------------------------------------

    def to_snapshot(self):
        dist = self.gate.schedule
        return {
            "format": "robcov-snapshot",
            "version": 1,
            "kind": "naive",
            "dim": self.dim,
            "alpha": self.alpha,
            "n_obs": self.n_obs,
            "sm_fallbacks": self.sm_fallbacks,
            "dist_step": [dist.c, dist.exponent, dist.n0, dist.batch_scale],
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "cov_inv": self.cov_inv.tolist(),
            "gate": self.gate.to_state(),
        }

    @classmethod
    def from_snapshot(cls, payload):
        if payload.get("kind") != "naive":
            raise ValueError(f"not a sample-covariance snapshot: {payload.get('kind')!r}")
        gate = ScaledDistanceGate(payload["dim"], alpha=payload["alpha"],
                                  schedule=StepSchedule(*payload["dist_step"]),
                                  initial_median=payload["gate"]["median_estimate"],
                                  count=payload["gate"]["count"])
        return cls(mean=np.array(payload["mean"]), cov=np.array(payload["cov"]),
                   cov_inv=np.array(payload["cov_inv"]), n_obs=payload["n_obs"],
                   alpha=payload["alpha"], gate=gate,
                   sm_fallbacks=payload["sm_fallbacks"])

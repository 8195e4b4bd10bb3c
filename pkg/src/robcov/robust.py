"""Online robust covariance estimation with simultaneous outlier detection.

Per observation (or block) the estimator advances, in order: the geometric
median recursion, the median covariation recursion (centered on the median
average from *before* the observation), a fresh eigendecomposition of the
averaged covariation matrix, a burst of Monte-Carlo iterations
reconstructing the covariance eigenvalues, and finally the scaled
Mahalanobis verdicts.  Every step has bounded influence: a single
observation, however extreme, moves the location iterate and the scatter
iterate by at most the current step size.
"""

import numpy as np

from .detect import ScaledDistanceGate
from .median import OnlineMedian, geometric_median
from .mcm import OnlineMCM, median_covariation
from .numerics import sym_eigen, symmetrize
from .rng import RngStream
from .spectral import SpectrumEstimator, _floor_for
from .steps import StepSchedule


class RobustEstimator:
    """Streaming robust covariance/location estimator with outlier verdicts.

    Construct with :meth:`from_batch` on an initialization window; then feed
    observations one at a time (``batch_size=1``) with :meth:`update`, or in
    blocks with :meth:`update_block`.  Block mode trades estimation
    granularity for far fewer eigendecompositions (one per block instead of
    one per observation).
    """

    def __init__(self, *, median, scatter, spectrum, eigvecs, mcm_eigs, gate,
                 rng, n_obs, batch_size, alpha, n_mc, eig_count=0):
        self.median = median
        self.scatter = scatter
        self.spectrum = spectrum
        self.eigvecs = eigvecs
        self.mcm_eigs = mcm_eigs
        self.gate = gate
        self.rng = rng
        self.n_obs = int(n_obs)
        self.batch_size = int(batch_size)
        self.alpha = float(alpha)
        self.n_mc = int(n_mc)
        self.eig_count = int(eig_count)

    # -- construction -------------------------------------------------

    @classmethod
    def from_batch(cls, init_data, batch_size=1, alpha=0.05, n_mc=10, omega=2.0,
                   loc_step=None, rm_step=None, dist_step=None, seed=0, rng=None,
                   tol=1e-8, max_iter=500):
        """Initialize all recursions by the offline estimators on a starting
        window of at least d + 1 observations.

        The Weiszfeld median and median covariation matrix seed the online
        iterates and their averages; the eigenvalue reconstruction warms up
        with ``len(init_data) * n_mc`` iterations from the covariation
        spectrum; the distance-median tracker starts at the empirical median
        of the window's own raw distances.
        """
        x = np.asarray(init_data, dtype=float)
        if x.ndim != 2:
            raise ValueError("initialization data must be 2-D (rows = observations)")
        n_init, d = x.shape
        if n_init < d + 1:
            raise ValueError(f"need at least d+1={d + 1} initialization rows, got {n_init}")
        bad = np.flatnonzero(~np.isfinite(x).all(axis=1))
        if bad.size:
            raise ValueError(f"non-finite values in initialization row {bad[0]}")
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")

        loc_step = (loc_step or StepSchedule(c=1.0, exponent=0.75, n0=0.0))
        loc_step = loc_step.scaled(float(np.sqrt(batch_size)))
        rm_step = rm_step or StepSchedule(c=1.0, exponent=0.66, n0=0.0)
        dist_step = dist_step or StepSchedule(c=1.0, exponent=0.66, n0=0.0)
        rng = rng if rng is not None else RngStream(seed)

        m = geometric_median(x, tol=tol, max_iter=max_iter)
        v = median_covariation(x, m, tol=tol, max_iter=max_iter)
        start_count = n_init / batch_size
        median = OnlineMedian(m, schedule=loc_step, count=start_count)
        scatter = OnlineMCM(v, schedule=loc_step, count=start_count)

        eig = sym_eigen(scatter.average)
        delta = np.maximum(eig.values, 0.0)
        spectrum = SpectrumEstimator(np.maximum(delta, _floor_for(delta)),
                                     schedule=rm_step, omega=omega)
        spectrum.advance(delta, n_init * n_mc, rng, start_index=0)

        est = cls(median=median, scatter=scatter, spectrum=spectrum,
                  eigvecs=eig.vectors, mcm_eigs=eig.values,
                  gate=ScaledDistanceGate(d, alpha=alpha, schedule=dist_step),
                  rng=rng, n_obs=n_init, batch_size=batch_size,
                  alpha=alpha, n_mc=n_mc, eig_count=1)
        est.gate.median_estimate = max(float(np.median(est._distances(x))), 1e-12)
        return est

    # -- properties -----------------------------------------------------

    @property
    def dim(self):
        return self.median.dim

    @property
    def mode(self):
        return "online" if self.batch_size == 1 else "streaming"

    def location(self):
        """Current robust location estimate (averaged median iterate)."""
        return self.median.average.copy()

    def covariance(self):
        """Robust covariance estimate P diag(reconstructed eigenvalues) P^T
        (symmetric positive definite by construction)."""
        p = self.eigvecs
        return symmetrize((p * self.spectrum.average) @ p.T)

    def covariance_determinant(self):
        """Product of the reconstructed eigenvalues."""
        return float(np.prod(self.spectrum.average))

    # -- updates --------------------------------------------------------

    def _distances(self, rows):
        proj = (rows - self.median.average) @ self.eigvecs
        return (proj * proj) @ (1.0 / self.spectrum.average)

    def update(self, x):
        """Consume one observation; returns its DetectionRecord.

        Only valid in online mode (``batch_size == 1``).
        """
        if self.batch_size != 1:
            raise ValueError("update() requires batch_size=1; use update_block()")
        return self.update_block(np.asarray(x, dtype=float)[None, :])[0]

    def update_block(self, block):
        """Consume one block (at most ``batch_size`` rows); returns the
        members' DetectionRecords in order.

        Non-finite input is rejected with the state unchanged.  Verdicts use
        the post-update estimates; the distance-median tracker absorbs each
        member's distance after its verdict.
        """
        block = np.asarray(block, dtype=float)
        if block.ndim != 2 or block.shape[0] == 0:
            raise ValueError("block must be a non-empty 2-D array")
        if block.shape[0] > self.batch_size:
            raise ValueError(f"block of {block.shape[0]} rows exceeds batch_size={self.batch_size}")
        if block.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {block.shape[1]}")
        if not np.all(np.isfinite(block)):
            raise ValueError("non-finite observation rejected")

        center_prev = self.median.average.copy()
        self.median.update_block(block)
        self.scatter.update_block(block, center_prev)

        eig = sym_eigen(self.scatter.average)
        self.eigvecs = eig.vectors
        self.mcm_eigs = eig.values
        self.eig_count += 1

        base = self.n_obs
        self.spectrum.advance(np.maximum(eig.values, 0.0), self.n_mc, self.rng,
                              start_index=base * self.n_mc)
        self.n_obs = base + block.shape[0]

        raw = self._distances(block)
        return [self.gate.score(float(r), index=base + i)
                for i, r in enumerate(raw)]

    # -- snapshots --------------------------------------------------------

    def to_snapshot(self):
        """JSON-serializable full state; restoring continues bit-identically."""
        loc = self.median.schedule
        return {
            "format": "robcov-snapshot",
            "version": 1,
            "kind": "robust",
            "dim": self.dim,
            "batch_size": self.batch_size,
            "alpha": self.alpha,
            "n_mc": self.n_mc,
            "n_obs": self.n_obs,
            "eig_count": self.eig_count,
            "loc_step": [loc.c, loc.exponent, loc.n0, loc.batch_scale],
            "rm_step": [self.spectrum.schedule.c, self.spectrum.schedule.exponent,
                        self.spectrum.schedule.n0, self.spectrum.schedule.batch_scale],
            "dist_step": [self.gate.schedule.c, self.gate.schedule.exponent,
                          self.gate.schedule.n0, self.gate.schedule.batch_scale],
            "omega": self.spectrum.omega,
            "median": {"point": self.median.point.tolist(),
                       "average": self.median.average.tolist(),
                       "count": self.median.count},
            "scatter": {"matrix": self.scatter.matrix.tolist(),
                        "average": self.scatter.average.tolist(),
                        "count": self.scatter.count},
            "spectrum": {"values": self.spectrum.values.tolist(),
                         "average": self.spectrum.average.tolist(),
                         "iterations": self.spectrum.iterations,
                         "weight_sum": self.spectrum.weight_sum},
            "eigvecs": self.eigvecs.tolist(),
            "mcm_eigs": self.mcm_eigs.tolist(),
            "gate": self.gate.to_state(),
            "rng": self.rng.to_state(),
        }

    @classmethod
    def from_snapshot(cls, payload):
        if payload.get("kind") != "robust":
            raise ValueError(f"not a robust-estimator snapshot: {payload.get('kind')!r}")
        loc_step = StepSchedule(*payload["loc_step"])
        rm_step = StepSchedule(*payload["rm_step"])
        dist_step = StepSchedule(*payload["dist_step"])
        med = payload["median"]
        median = OnlineMedian(med["point"], schedule=loc_step,
                              average=med["average"], count=med["count"])
        sc = payload["scatter"]
        scatter = OnlineMCM(np.array(sc["matrix"]), schedule=loc_step,
                            average=np.array(sc["average"]), count=sc["count"])
        sp = payload["spectrum"]
        spectrum = SpectrumEstimator(sp["values"], schedule=rm_step,
                                     omega=payload["omega"], average=sp["average"],
                                     iterations=sp["iterations"],
                                     weight_sum=sp["weight_sum"])
        gate = ScaledDistanceGate(payload["dim"], alpha=payload["alpha"],
                                  schedule=dist_step,
                                  initial_median=payload["gate"]["median_estimate"],
                                  count=payload["gate"]["count"])
        return cls(median=median, scatter=scatter, spectrum=spectrum,
                   eigvecs=np.array(payload["eigvecs"]),
                   mcm_eigs=np.array(payload["mcm_eigs"]),
                   gate=gate, rng=RngStream.from_state(payload["rng"]),
                   n_obs=payload["n_obs"], batch_size=payload["batch_size"],
                   alpha=payload["alpha"], n_mc=payload["n_mc"],
                   eig_count=payload["eig_count"])

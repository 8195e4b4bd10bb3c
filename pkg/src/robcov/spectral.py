"""Reconstruction of covariance eigenvalues from median-covariation
eigenvalues by stochastic approximation with Monte-Carlo draws.

For a Gaussian vector the median covariation matrix shares the covariance
eigenvectors, and its eigenvalues are linked to the covariance eigenvalues
through a fixed-point relation in which the random rank-one matrix
diag(sqrt(cov_eigs)) u u^T diag(sqrt(cov_eigs)), u ~ N(0, I), is compared to
diag(mcm_eigs) in Frobenius norm.  ``SpectrumEstimator`` inverts that map
online; ``mcm_spectrum`` evaluates the forward map and exists as a test
oracle for round-trip checks.
"""

import numpy as np

from .backend import kernels
from .steps import StepSchedule


def rank_one_gap_sq(cov_eigs, mcm_eigs, u):
    """Squared Frobenius gap between the whitened rank-one draw and
    diag(mcm_eigs):

        sum_k (mcm_eigs[k] - cov_eigs[k] u[k]^2)^2
        + sum_{i != j} u[i]^2 u[j]^2 cov_eigs[i] cov_eigs[j]

    evaluated in O(d) via the identity  sum_{i!=j} a_i a_j = (sum a)^2 - sum a^2.
    """
    lam = np.asarray(cov_eigs, dtype=float)
    delta = np.asarray(mcm_eigs, dtype=float)
    u = np.asarray(u, dtype=float)
    a = lam * (u * u)
    resid = delta - a
    return float(resid @ resid) + float(a.sum()) ** 2 - float(a @ a)


def _floor_for(mcm_eigs):
    # Decaying steps can push components negative early on; project onto a
    # tiny positive floor scaled to the target spectrum.
    return 1e-10 * max(float(np.max(mcm_eigs)) if len(mcm_eigs) else 0.0, 1.0)


class SpectrumEstimator:
    """Robbins-Monro tracker of covariance eigenvalues given a stream of
    median-covariation eigenvalue targets.

    ``values`` is the raw iterate, ``average`` the log-weighted average
    (weight log(t+1)^omega for global iteration t) used as the estimate.
    The global iteration index survives across :meth:`advance` calls, so the
    decaying step sequence keeps decaying; a caller may instead pin the
    start index (streaming mode skips ahead between blocks).
    """

    def __init__(self, start, schedule=None, omega=2.0, average=None,
                 iterations=0, weight_sum=0.0):
        self.values = np.array(start, dtype=float)
        if np.any(self.values <= 0.0):
            raise ValueError("initial eigenvalues must be strictly positive")
        self.average = np.array(self.values if average is None else average, dtype=float)
        self.schedule = schedule or StepSchedule(c=1.0, exponent=0.66, n0=0.0)
        if omega < 0:
            raise ValueError("averaging exponent omega must be >= 0")
        self.omega = float(omega)
        self.iterations = int(iterations)
        self.weight_sum = float(weight_sum)

    @property
    def dim(self):
        return self.values.shape[0]

    def advance(self, mcm_eigs, n_iters, rng, start_index=None):
        """Run ``n_iters`` Monte-Carlo iterations toward the spectrum implied
        by ``mcm_eigs`` (entries must be >= 0).

        Iteration i uses global index t = start_index + i (default: continue
        from the running count).  Degenerate draws (zero gap) skip the value
        update but still advance the average and the counter.
        """
        delta = np.ascontiguousarray(mcm_eigs, dtype=float)
        if delta.shape != self.values.shape:
            raise ValueError("target spectrum has wrong length")
        if np.any(delta < 0.0):
            raise ValueError("target eigenvalues must be non-negative")
        if n_iters < 0:
            raise ValueError("n_iters must be >= 0")
        t0 = self.iterations if start_index is None else int(start_index)
        self.weight_sum = kernels.rm_iterate(
            self.values, self.average, delta,
            self.schedule.c * self.schedule.batch_scale, self.schedule.exponent,
            float(self.schedule.n0), self.omega, self.weight_sum,
            t0, int(n_iters), _floor_for(delta), rng._impl,
        )
        self.iterations = t0 + int(n_iters)
        return self


def mcm_spectrum(cov_eigs, n_mc, rng, damping=0.5, tol=1e-4, max_iter=500):
    """Forward map: median-covariation eigenvalues implied by covariance
    eigenvalues, by damped fixed-point iteration over a common set of
    ``n_mc`` Monte-Carlo draws (inverse-gap weights).

    This is the test oracle for :class:`SpectrumEstimator` round trips, not
    part of the estimation path.
    """
    lam = np.asarray(cov_eigs, dtype=float)
    if np.any(lam <= 0.0):
        raise ValueError("covariance eigenvalues must be strictly positive")
    d = lam.shape[0]
    u = rng.normals(int(n_mc) * d).reshape(int(n_mc), d)
    a = lam * (u * u)                      # n_mc x d rank-one diagonals
    a_sum = a.sum(axis=1)
    a_sq = np.einsum("ij,ij->i", a, a)
    cross = a_sum * a_sum - a_sq
    delta = lam.copy()
    for _ in range(max_iter):
        resid = delta - a
        gap = np.sqrt(np.einsum("ij,ij->i", resid, resid) + cross)
        w = 1.0 / np.maximum(gap, 1e-300)
        proposal = (w @ a) / w.sum()
        delta_next = (1.0 - damping) * delta + damping * proposal
        if np.max(np.abs(delta_next - delta)) <= tol * max(float(np.max(np.abs(delta))), 1e-300):
            return delta_next
        delta = delta_next
    return delta

"""Deterministic numeric kernel: symmetric eigendecomposition, chi-square
quantiles, Toeplitz correlation matrices, and seeded Gaussian sampling."""

import math
from typing import NamedTuple

import numpy as np

from .backend import kernels


class EigenSystem(NamedTuple):
    """Eigenvalues in non-increasing order paired with orthonormal column
    eigenvectors; each column's largest-magnitude entry is non-negative."""

    values: np.ndarray
    vectors: np.ndarray


def symmetrize(a):
    """Exactly symmetric copy of ``a`` via (A + A^T)/2."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def sym_eigen(a) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix (symmetrized on entry).

    Raises ValueError on non-finite entries.  Deterministic: identical input
    yields identical output.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    w, v = kernels.eigh_descending(symmetrize(a))
    return EigenSystem(np.asarray(w), np.asarray(v))


def toeplitz_corr(d, rho):
    """Correlation matrix with entries rho^|i-j| (positive definite for
    |rho| < 1)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not abs(rho) < 1.0:
        raise ValueError(f"|rho| must be < 1, got {rho}")
    idx = np.arange(d)
    return np.asarray(rho, dtype=float) ** np.abs(idx[:, None] - idx[None, :])


# --- chi-square quantiles -------------------------------------------------
#
# Regularized lower incomplete gamma P(a, x) via the standard series
# (x < a + 1) / continued-fraction (x >= a + 1) split, then bisection.

_EPS = 1e-15
_TINY = 1e-300


def _gamma_p_series(a, x):
    term = 1.0 / a
    total = term
    n = a
    for _ in range(500):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a, x):
    # Lentz's algorithm for the continued fraction of Q(a, x).
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    frac = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        frac *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return frac * math.exp(-x + a * math.log(x) - math.lgamma(a))


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x < 0:
        raise ValueError("argument must be non-negative")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_contfrac(a, x)


def chi2_quantile(d, p):
    """Quantile of the chi-square distribution with ``d`` degrees of freedom.

    Solves P(d/2, q/2) = p by bisection; the returned q satisfies the
    equation to within 1e-10 in probability.
    """
    if d < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    a = 0.5 * d

    lo, hi = 0.0, float(max(d, 1))
    while reg_lower_gamma(a, 0.5 * hi) < p:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("chi2_quantile bracket expansion failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if reg_lower_gamma(a, 0.5 * mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, lo):
            break
    return 0.5 * (lo + hi)


# --- Gaussian sampling ----------------------------------------------------


def gaussian_factor(sigma):
    """Factor L with L L^T = sigma, from the eigen square root.

    Eigenvalues below -1e-8 * max(eigenvalue) raise (matrix not PSD); small
    negative eigenvalues are clamped to zero.
    """
    eig = sym_eigen(sigma)
    w = eig.values
    wmax = float(w[0]) if w.size else 0.0
    if w.size and float(w[-1]) < -1e-8 * max(wmax, 0.0):
        raise ValueError(f"matrix is not positive semi-definite "
                         f"(min eigenvalue {w[-1]:.3e})")
    w = np.maximum(w, 0.0)
    return eig.vectors * np.sqrt(w)


def mvn_sample(rng, mu, sigma):
    """One draw from N(mu, sigma) using the eigen-based square root."""
    mu = np.asarray(mu, dtype=float)
    return mu + gaussian_factor(sigma) @ rng.normals(mu.shape[0])

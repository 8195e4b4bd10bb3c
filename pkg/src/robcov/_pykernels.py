"""Pure-Python implementations of the hot kernels.

This module mirrors the API of the compiled extension (``robcov._accel``)
and is selected at import time when the extension is unavailable (see
``robcov.backend``).  The random generator is implemented with scalar
arithmetic so that both backends produce the *same* integer and Gaussian
streams; the eigensolver is backed by ``numpy.linalg.eigh`` behind the same
ordering/sign contract as the compiled cyclic-Jacobi solver.
"""

import math

import numpy as np

NAME = "python"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586476925287


def mix64(z):
    """SplitMix64 finalizer; uint64 in, uint64 out."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """Counter-based SplitMix64 generator with Box-Muller normals.

    The state is a single uint64 counter, so the integer stream is
    reproducible across platforms.  ``normals(k)`` always consumes
    ``ceil(k/2)`` uniform pairs (the spare normal of an odd request is
    discarded), which keeps consumption independent of call chunking.
    """

    __slots__ = ("seed", "state")

    def __init__(self, seed, state=None):
        self.seed = int(seed) & _MASK64
        self.state = self.seed if state is None else int(state) & _MASK64

    def next_u64(self):
        self.state = (self.state + _GOLDEN) & _MASK64
        return mix64(self.state)

    def uniform(self):
        """Uniform double in the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _INV_2_53

    def normals(self, k):
        out = np.empty(k)
        i = 0
        while i < k:
            u1 = self.uniform()
            u2 = self.uniform()
            r = math.sqrt(-2.0 * math.log(u1))
            a = _TWO_PI * u2
            out[i] = r * math.cos(a)
            i += 1
            if i < k:
                out[i] = r * math.sin(a)
                i += 1
        return out


def eigh_descending(a):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(values, vectors)`` with values sorted non-increasing and each
    eigenvector column oriented so its largest-magnitude entry is
    non-negative (first such entry on ties).
    """
    w, v = np.linalg.eigh(a)
    return _order_and_sign(w, v)


def _order_and_sign(w, v):
    order = np.argsort(-w, kind="stable")
    w = np.ascontiguousarray(w[order])
    v = np.ascontiguousarray(v[:, order])
    lead = np.argmax(np.abs(v), axis=0)
    flip = v[lead, np.arange(v.shape[1])] < 0.0
    v[:, flip] *= -1.0
    return w, v


def rm_iterate(lam, avg, delta, c_step, g_exp, n_offset, omega, weight_sum,
               t_start, n_iters, floor, rng):
    """Stochastic-approximation iterations reconstructing covariance
    eigenvalues from median-covariation eigenvalues.

    Mutates ``lam`` (current iterate) and ``avg`` (log-weighted average) in
    place; returns the updated averaging weight sum.  Iteration ``i`` uses
    the global step index ``t_start + i``, so decaying steps and averaging
    weights continue seamlessly across calls.
    """
    d = lam.shape[0]
    for i in range(1, n_iters + 1):
        t = t_start + i
        u = rng.normals(d)
        a = lam * (u * u)
        resid = delta - a
        h = float(resid @ resid) + float(a.sum()) ** 2 - float(a @ a)
        if h > 0.0:
            step = c_step * (t + n_offset) ** (-g_exp)
            np.maximum(lam - (step / math.sqrt(h)) * (a - delta), floor, out=lam)
        w = math.log(t + 1.0) ** omega
        weight_sum += w
        avg += (w / weight_sum) * (lam - avg)
    return weight_sum

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: SplitMix64 generator, cyclic-Jacobi symmetric
eigensolver, and the eigenvalue-reconstruction inner loop.

Semantics match ``robcov._pykernels``; the eigensolver here is a
self-contained cyclic Jacobi (no LAPACK dependency) adequate for the
moderate dimensions this library targets.
"""

from libc.math cimport sqrt, log, fabs, pow

import numpy as np

cdef extern from "_libm_shim.h":
    # out-of-line wrappers (see _libm_shim.c); plain cos/sin here can be
    # fused into sincos, which drifts from the Python backend by one ulp
    double robcov_cos(double x) nogil
    double robcov_sin(double x) nogil

NAME = "compiled"

cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef double _TWO_PI = 6.283185307179586476925287


cdef inline unsigned long long _mix(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * (<unsigned long long>0xBF58476D1CE4E5B9)
    z = (z ^ (z >> 27)) * (<unsigned long long>0x94D049BB133111EB)
    return z ^ (z >> 31)


def mix64(z):
    """SplitMix64 finalizer; uint64 in, uint64 out."""
    return _mix(<unsigned long long>(int(z) & 0xFFFFFFFFFFFFFFFF))


cdef class Rng:
    """Counter-based SplitMix64 generator with Box-Muller normals.

    Same stream as the pure-Python backend: ``normals(k)`` consumes
    ``ceil(k/2)`` uniform pairs regardless of call chunking.
    """

    cdef public unsigned long long state
    cdef readonly unsigned long long seed

    def __init__(self, seed, state=None):
        self.seed = <unsigned long long>(int(seed) & 0xFFFFFFFFFFFFFFFF)
        if state is None:
            self.state = self.seed
        else:
            self.state = <unsigned long long>(int(state) & 0xFFFFFFFFFFFFFFFF)

    cdef inline unsigned long long _next(self) noexcept:
        self.state = self.state + (<unsigned long long>0x9E3779B97F4A7C15)
        return _mix(self.state)

    cdef inline double _uniform(self) noexcept:
        return ((self._next() >> 11) + 0.5) * _INV_2_53

    cdef void _fill_normals(self, double* out, Py_ssize_t k) noexcept:
        cdef Py_ssize_t i = 0
        cdef double u1, u2, r, a
        while i < k:
            u1 = self._uniform()
            u2 = self._uniform()
            r = sqrt(-2.0 * log(u1))
            a = _TWO_PI * u2
            out[i] = r * robcov_cos(a)
            i += 1
            if i < k:
                out[i] = r * robcov_sin(a)
                i += 1

    def next_u64(self):
        return self._next()

    def uniform(self):
        """Uniform double in the open interval (0, 1)."""
        return self._uniform()

    def normals(self, Py_ssize_t k):
        out = np.empty(k)
        cdef double[::1] view = out
        if k > 0:
            self._fill_normals(&view[0], k)
        return out


def eigh_descending(a):
    """Cyclic-Jacobi eigendecomposition of a symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm drops below 1e-12 of the
    matrix norm (at most 100 sweeps).  Returns ``(values, vectors)`` sorted
    non-increasing, each column oriented so its largest-magnitude entry is
    non-negative.
    """
    cdef double[:, ::1] A = np.array(a, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t d = A.shape[0]
    vecs = np.eye(d)
    cdef double[:, ::1] V = vecs
    cdef Py_ssize_t p, q, r, sweep
    cdef double fro, off, target, skip_thresh
    cdef double apq, app, aqq, theta, t, c, s, tau, arp, arq, vrp, vrq

    fro = 0.0
    for p in range(d):
        for q in range(d):
            fro += A[p, q] * A[p, q]
    fro = sqrt(fro)
    target = 1e-12 * fro
    skip_thresh = target / (d if d > 0 else 1)

    for sweep in range(100):
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                off += 2.0 * A[p, q] * A[p, q]
        off = sqrt(off)
        if off <= target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if fabs(apq) <= skip_thresh:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for r in range(d):
                    if r != p and r != q:
                        arp = A[r, p]
                        arq = A[r, q]
                        A[r, p] = arp - s * (arq + tau * arp)
                        A[p, r] = A[r, p]
                        A[r, q] = arq + s * (arp - tau * arq)
                        A[q, r] = A[r, q]
                for r in range(d):
                    vrp = V[r, p]
                    vrq = V[r, q]
                    V[r, p] = vrp - s * (vrq + tau * vrp)
                    V[r, q] = vrq + s * (vrp - tau * vrq)

    w = np.empty(d)
    for p in range(d):
        w[p] = A[p, p]
    order = np.argsort(-w, kind="stable")
    w = np.ascontiguousarray(w[order])
    vecs = np.ascontiguousarray(vecs[:, order])
    lead = np.argmax(np.abs(vecs), axis=0)
    flip = vecs[lead, np.arange(d)] < 0.0
    vecs[:, flip] *= -1.0
    return w, vecs


def rm_iterate(double[::1] lam, double[::1] avg, double[::1] delta,
               double c_step, double g_exp, double n_offset, double omega,
               double weight_sum, long long t_start, Py_ssize_t n_iters,
               double floor, Rng rng):
    """Stochastic-approximation iterations reconstructing covariance
    eigenvalues from median-covariation eigenvalues (in-place; returns the
    updated averaging weight sum).
    """
    cdef Py_ssize_t d = lam.shape[0]
    cdef Py_ssize_t i, k
    cdef long long t
    cdef double h, s1, sa, sa2, ak, diffk, step, inv, w, ratio, newv, td
    buf = np.empty(d)
    cdef double[::1] a = buf
    ubuf = np.empty(d)
    cdef double[::1] u = ubuf

    for i in range(1, n_iters + 1):
        t = t_start + i
        td = <double>t
        rng._fill_normals(&u[0], d)
        s1 = 0.0
        sa = 0.0
        sa2 = 0.0
        for k in range(d):
            ak = lam[k] * u[k] * u[k]
            a[k] = ak
            diffk = delta[k] - ak
            s1 += diffk * diffk
            sa += ak
            sa2 += ak * ak
        h = s1 + sa * sa - sa2
        if h > 0.0:
            step = c_step * pow(td + n_offset, -g_exp)
            inv = step / sqrt(h)
            for k in range(d):
                newv = lam[k] - inv * (a[k] - delta[k])
                lam[k] = newv if newv > floor else floor
        w = pow(log(td + 1.0), omega)
        weight_sum += w
        ratio = w / weight_sum
        for k in range(d):
            avg[k] += ratio * (lam[k] - avg[k])
    return weight_sum

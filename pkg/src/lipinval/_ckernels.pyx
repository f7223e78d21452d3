# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: envelope evaluation, pairwise slope maximum, distances."""

import numpy as np

from libc.math cimport fabs, sqrt, INFINITY


cdef inline int _pcode(double p) except -1:
    if p == INFINITY:
        return 0
    if p == 1.0:
        return 1
    if p == 2.0:
        return 2
    raise ValueError(f"unsupported norm index {p}")


cdef inline double _dist(const double[:, ::1] A, Py_ssize_t a,
                         const double[:, ::1] B, Py_ssize_t b,
                         Py_ssize_t n, int pc) noexcept nogil:
    cdef Py_ssize_t d
    cdef double acc = 0.0, diff
    if pc == 0:
        for d in range(n):
            diff = fabs(A[a, d] - B[b, d])
            if diff > acc:
                acc = diff
        return acc
    if pc == 1:
        for d in range(n):
            acc += fabs(A[a, d] - B[b, d])
        return acc
    for d in range(n):
        diff = A[a, d] - B[b, d]
        acc += diff * diff
    return sqrt(acc)


def envelope(S, Y, lip, eps_t, Q, double p):
    """Upper and lower envelopes at each row of ``Q``; see ``_pykernels.envelope``."""
    cdef const double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef const double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[::1] L = np.ascontiguousarray(lip, dtype=np.float64)
    cdef const double[::1] et = np.ascontiguousarray(eps_t, dtype=np.float64)
    cdef const double[:, ::1] q = np.ascontiguousarray(Q, dtype=np.float64)
    cdef Py_ssize_t nq = q.shape[0], npairs = s.shape[0], n = s.shape[1], m = y.shape[1]
    cdef int pc = _pcode(p)
    upper_arr = np.full((nq, m), np.inf)
    lower_arr = np.full((nq, m), -np.inf)
    cdef double[:, ::1] up = upper_arr
    cdef double[:, ::1] lo = lower_arr
    cdef Py_ssize_t a, j, i
    cdef double dist, v
    with nogil:
        for a in range(nq):
            for j in range(npairs):
                dist = _dist(q, a, s, j, n, pc)
                for i in range(m):
                    v = y[j, i] + L[i] * dist
                    if v < up[a, i]:
                        up[a, i] = v
                    v = y[j, i] - L[i] * dist
                    if v > lo[a, i]:
                        lo[a, i] = v
            for i in range(m):
                up[a, i] = up[a, i] + et[i]
                lo[a, i] = lo[a, i] - et[i]
    return upper_arr, lower_arr


def pairwise_slope_max(S, Y, eps_v, double eps_s, double p):
    """Noise-corrected maximum pairwise slope per output; see ``_pykernels``."""
    cdef const double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef const double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[::1] ev = np.ascontiguousarray(eps_v, dtype=np.float64)
    cdef Py_ssize_t npairs = s.shape[0], n = s.shape[1], m = y.shape[1]
    cdef int pc = _pcode(p)
    best_arr = np.zeros(m)
    unbounded_arr = np.zeros(m, dtype=np.uint8)
    cdef double[::1] best = best_arr
    cdef unsigned char[::1] unbounded = unbounded_arr
    cdef Py_ssize_t j, k, i
    cdef double den, num, r
    with nogil:
        for j in range(npairs):
            for k in range(j + 1, npairs):
                den = _dist(s, j, s, k, n, pc) + 2.0 * eps_s
                for i in range(m):
                    num = fabs(y[j, i] - y[k, i]) - 2.0 * ev[i]
                    if num <= 0.0:
                        continue
                    if den <= 0.0:
                        unbounded[i] = 1
                        continue
                    r = num / den
                    if r > best[i]:
                        best[i] = r
    return best_arr, unbounded_arr.astype(bool)


def distances(S, q, double p):
    """p-norm distance from ``q`` to every row of ``S``."""
    cdef const double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef const double[:, ::1] qq = np.ascontiguousarray(q, dtype=np.float64).reshape(1, -1)
    cdef Py_ssize_t npairs = s.shape[0], n = s.shape[1], j
    cdef int pc = _pcode(p)
    out_arr = np.empty(npairs)
    cdef double[::1] out = out_arr
    with nogil:
        for j in range(npairs):
            out[j] = _dist(s, j, qq, 0, n, pc)
    return out_arr

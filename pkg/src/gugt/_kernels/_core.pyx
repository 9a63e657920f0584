# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.  Semantics match ``_fallback`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _insertion_sort(double* buf, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double v
    for i in range(1, n):
        v = buf[i]
        j = i - 1
        while j >= 0 and buf[j] > v:
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = v


def median_filter_shrink(const double[:, ::1] a, Py_ssize_t window):
    """Centered running median per column; the window shrinks symmetrically
    at the sequence ends so it never leaves the data."""
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1]
    cdef Py_ssize_t half = window // 2
    cdef Py_ssize_t i, c, k, h
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] buf = np.empty(2 * half + 1, dtype=np.float64)
    with nogil:
        for c in range(m):
            for i in range(n):
                h = half
                if i < h:
                    h = i
                if n - 1 - i < h:
                    h = n - 1 - i
                for k in range(2 * h + 1):
                    buf[k] = a[i - h + k, c]
                _insertion_sort(&buf[0], 2 * h + 1)
                out[i, c] = buf[h]
    return out_arr


def nearest_centroid(const double[:, ::1] X, const double[:, ::1] C):
    """Index of the nearest centroid (lowest index on ties) and the squared
    distance to it, for every row of X."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], k = C.shape[0]
    cdef Py_ssize_t i, j, t, best
    cdef double acc, diff, bestd
    labels_arr = np.empty(n, dtype=np.int64)
    d2_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef double[::1] d2 = d2_arr
    with nogil:
        for i in range(n):
            best = 0
            bestd = 0.0
            for j in range(k):
                acc = 0.0
                for t in range(d):
                    diff = X[i, t] - C[j, t]
                    acc = acc + diff * diff
                if j == 0 or acc < bestd:
                    bestd = acc
                    best = j
            labels[i] = best
            d2[i] = bestd
    return labels_arr, d2_arr


def smo_solve(const double[:, ::1] K, const double[::1] y, double C, double tol, Py_ssize_t max_iter):
    """Solve the C-SVM dual with pairwise (maximal violating pair) updates.

    Returns ``(alpha, bias, n_iter, gap)``; ``gap`` is the final KKT gap
    m - M and the run converged iff ``gap < tol``.
    """
    cdef Py_ssize_t n = K.shape[0]
    cdef Py_ssize_t t, i, j, it = 0, n_free
    cdef double m_up, M_low, v, a, step, bi, bj, sum_free
    alpha_arr = np.zeros(n, dtype=np.float64)
    G_arr = -np.ones(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = G_arr
    cdef double gap = 0.0

    with nogil:
        while True:
            i = -1
            j = -1
            m_up = 0.0
            M_low = 0.0
            for t in range(n):
                v = -y[t] * G[t]
                if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                    if i < 0 or v > m_up:
                        m_up = v
                        i = t
                if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                    if j < 0 or v < M_low:
                        M_low = v
                        j = t
            if i < 0 or j < 0:
                gap = 0.0
                break
            gap = m_up - M_low
            if gap < tol or it >= max_iter:
                break
            it += 1
            a = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if a <= 1e-12:
                a = 1e-12
            step = gap / a
            bi = C - alpha[i] if y[i] > 0 else alpha[i]
            bj = alpha[j] if y[j] > 0 else C - alpha[j]
            if bi < step:
                step = bi
            if bj < step:
                step = bj
            for t in range(n):
                G[t] = G[t] + y[t] * step * (K[t, i] - K[t, j])
            if step == bi:
                alpha[i] = C if y[i] > 0 else 0.0
            else:
                alpha[i] = alpha[i] + y[i] * step
            if step == bj:
                alpha[j] = 0.0 if y[j] > 0 else C
            else:
                alpha[j] = alpha[j] - y[j] * step

        n_free = 0
        sum_free = 0.0
        for t in range(n):
            if 0 < alpha[t] < C:
                n_free += 1
                sum_free = sum_free + (-y[t] * G[t])

    if n_free > 0:
        bias = sum_free / n_free
    else:
        bias = 0.5 * (m_up + M_low)
    return alpha_arr, bias, it, gap

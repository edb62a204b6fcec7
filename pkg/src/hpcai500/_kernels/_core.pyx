# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot numeric kernels.

Mirrors numpy_backend function by function; see that module for the
contracts. Results agree with the fallback to floating-point noise (the
summation orders differ), not bit-for-bit.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, log

cnp.import_array()

cdef double LN2 = 0.6931471805599453


def pairwise_sq_dists(x):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1]
    out = np.zeros((n, n))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = xv[i, k] - xv[j, k]
                acc += diff * diff
            o[i, j] = acc
            o[j, i] = acc
    return out


cdef double _row_affinity(double[::1] e, double beta, double[::1] p):
    """Fill p with normalized affinities for one shifted row, return the
    base-2 entropy."""
    cdef Py_ssize_t m = e.shape[0]
    cdef double s = 0.0, t = 0.0
    cdef Py_ssize_t j
    for j in range(m):
        p[j] = exp(-beta * e[j])
        s += p[j]
    for j in range(m):
        p[j] = p[j] / s
        t += p[j] * e[j]
    return (beta * t + log(s)) / LN2


def conditional_affinities(d2, double perplexity, double tol, int max_steps):
    cdef const double[:, ::1] dv = np.ascontiguousarray(d2, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0]
    p_matrix = np.zeros((n, n))
    betas = np.empty(n)
    achieved = np.empty(n)
    cdef double[:, ::1] pm = p_matrix
    cdef double[::1] bv = betas, av = achieved
    e_buf = np.empty(n - 1)
    p_buf = np.empty(n - 1)
    cdef double[::1] e = e_buf, p = p_buf
    cdef Py_ssize_t i, j, col
    cdef double emin, beta, lo, hi, h, perp
    cdef int steps
    for i in range(n):
        col = 0
        emin = INFINITY
        for j in range(n):
            if j == i:
                continue
            e[col] = dv[i, j]
            if e[col] < emin:
                emin = e[col]
            col += 1
        for j in range(n - 1):
            e[j] -= emin
        beta = 1.0
        lo = 0.0
        hi = INFINITY
        h = _row_affinity(e, beta, p)
        perp = 2.0 ** h
        steps = 0
        while fabs(perp - perplexity) > tol and steps < max_steps:
            if perp > perplexity:
                lo = beta
                beta = beta * 2.0 if hi == INFINITY else 0.5 * (lo + hi)
            else:
                hi = beta
                beta = beta * 0.5 if lo == 0.0 else 0.5 * (lo + hi)
            h = _row_affinity(e, beta, p)
            perp = 2.0 ** h
            steps += 1
        bv[i] = beta
        av[i] = perp
        col = 0
        for j in range(n):
            if j == i:
                continue
            pm[i, j] = p[col]
            col += 1
    return p_matrix, betas, achieved


def affinities_for_bandwidths(d2, betas):
    cdef const double[:, ::1] dv = np.ascontiguousarray(d2, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(betas, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0]
    p_matrix = np.zeros((n, n))
    cdef double[:, ::1] pm = p_matrix
    e_buf = np.empty(n - 1)
    p_buf = np.empty(n - 1)
    cdef double[::1] e = e_buf, p = p_buf
    cdef Py_ssize_t i, j, col
    cdef double emin
    for i in range(n):
        col = 0
        emin = INFINITY
        for j in range(n):
            if j == i:
                continue
            e[col] = dv[i, j]
            if e[col] < emin:
                emin = e[col]
            col += 1
        for j in range(n - 1):
            e[j] -= emin
        _row_affinity(e, bv[i], p)
        col = 0
        for j in range(n):
            if j == i:
                continue
            pm[i, j] = p[col]
            col += 1
    return p_matrix


cdef double _fill_student_t(const double[:, ::1] y, double[:, ::1] num):
    """Fill num with the Student-t numerators 1 / (1 + ||yi - yj||^2),
    zero diagonal; return their total sum."""
    cdef Py_ssize_t n = y.shape[0], d = y.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, total = 0.0
    for i in range(n):
        num[i, i] = 0.0
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = y[i, k] - y[j, k]
                acc += diff * diff
            acc = 1.0 / (1.0 + acc)
            num[i, j] = acc
            num[j, i] = acc
            total += 2.0 * acc
    return total


def tsne_grad(p, y):
    cdef const double[:, ::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0], d = yv.shape[1]
    num_arr = np.empty((n, n))
    cdef double[:, ::1] num = num_arr
    cdef double z = _fill_student_t(yv, num)
    grad = np.zeros((n, d))
    cdef double[:, ::1] g = grad
    cdef Py_ssize_t i, j, k
    cdef double w
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            w = 4.0 * (pv[i, j] - num[i, j] / z) * num[i, j]
            for k in range(d):
                g[i, k] += w * (yv[i, k] - yv[j, k])
    return grad


def kl_divergence(p, y):
    cdef const double[:, ::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    num_arr = np.empty((n, n))
    cdef double[:, ::1] num = num_arr
    cdef double z = _fill_student_t(yv, num)
    cdef double kl = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if pv[i, j] > 0.0:
                kl += pv[i, j] * log(pv[i, j] * z / num[i, j])
    return kl


def lloyd_iteration(x, centroids):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, ::1] cv = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1], k = cv.shape[0]
    labels = np.empty(n, dtype=np.int64)
    new_centroids = np.array(centroids, dtype=np.float64, copy=True)
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros((k, d))
    cdef cnp.int64_t[::1] lv = labels, cnt = counts
    cdef double[:, ::1] nc = new_centroids, sm = sums
    cdef Py_ssize_t i, j, m, best
    cdef double acc, diff, best_d2, inertia = 0.0
    for i in range(n):
        best = 0
        best_d2 = INFINITY
        for j in range(k):
            acc = 0.0
            for m in range(d):
                diff = xv[i, m] - cv[j, m]
                acc += diff * diff
            if acc < best_d2:
                best_d2 = acc
                best = j
        lv[i] = best
        cnt[best] += 1
        inertia += best_d2
        for m in range(d):
            sm[best, m] += xv[i, m]
    for j in range(k):
        if cnt[j] > 0:
            for m in range(d):
                nc[j, m] = sm[j, m] / cnt[j]
    return labels, new_centroids, inertia

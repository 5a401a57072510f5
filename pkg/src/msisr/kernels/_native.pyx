# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Must stay bit-identical to ``_purepy.py``: per output element the
floating-point operations run in the same order in both backends.
"""

import numpy as np

BACKEND = "compiled"


def block_average_core(const double[:, ::1] x, Py_ssize_t factor):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef Py_ssize_t br, bc, i, j
    cdef double s
    cdef double denom = <double> (factor * factor)
    out = np.empty((rows // factor, cols // factor), dtype=np.float64)
    cdef double[:, ::1] o = out
    for br in range(rows // factor):
        for bc in range(cols // factor):
            s = 0.0
            for i in range(factor):
                for j in range(factor):
                    s += x[br * factor + i, bc * factor + j]
            o[br, bc] = s / denom
    return out


def block_adjoint_core(const double[:, ::1] y, Py_ssize_t factor):
    cdef Py_ssize_t lr_rows = y.shape[0], lr_cols = y.shape[1]
    cdef Py_ssize_t br, bc, i, j
    cdef double v
    cdef double denom = <double> (factor * factor)
    out = np.empty((lr_rows * factor, lr_cols * factor), dtype=np.float64)
    cdef double[:, ::1] o = out
    for br in range(lr_rows):
        for bc in range(lr_cols):
            v = y[br, bc] / denom
            for i in range(factor):
                for j in range(factor):
                    o[br * factor + i, bc * factor + j] = v
    return out


def block_gram_core(const double[:, ::1] x, Py_ssize_t factor):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef Py_ssize_t br, bc, i, j
    cdef double s, m, g
    cdef double denom = <double> (factor * factor)
    out = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] o = out
    for br in range(rows // factor):
        for bc in range(cols // factor):
            s = 0.0
            for i in range(factor):
                for j in range(factor):
                    s += x[br * factor + i, bc * factor + j]
            m = s / denom
            g = m / denom
            for i in range(factor):
                for j in range(factor):
                    o[br * factor + i, bc * factor + j] = g
    return out


def gather_axis0(const double[:, ::1] x, const Py_ssize_t[:, ::1] idx, const double[:, ::1] w):
    cdef Py_ssize_t n_out = idx.shape[0], taps = idx.shape[1], cols = x.shape[1]
    cdef Py_ssize_t i, t, c
    cdef double wt
    cdef Py_ssize_t src
    out = np.empty((n_out, cols), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n_out):
        src = idx[i, 0]
        wt = w[i, 0]
        for c in range(cols):
            o[i, c] = wt * x[src, c]
        for t in range(1, taps):
            src = idx[i, t]
            wt = w[i, t]
            for c in range(cols):
                o[i, c] += wt * x[src, c]
    return out


def gather_axis1(const double[:, ::1] x, const Py_ssize_t[:, ::1] idx, const double[:, ::1] w):
    cdef Py_ssize_t n_out = idx.shape[0], taps = idx.shape[1], rows = x.shape[0]
    cdef Py_ssize_t r, t, j
    cdef double acc
    out = np.empty((rows, n_out), dtype=np.float64)
    cdef double[:, ::1] o = out
    for r in range(rows):
        for j in range(n_out):
            acc = w[j, 0] * x[r, idx[j, 0]]
            for t in range(1, taps):
                acc += w[j, t] * x[r, idx[j, t]]
            o[r, j] = acc
    return out


def cholesky_solve_inplace(const double[:, ::1] chol_lower, double[:, ::1] b):
    cdef Py_ssize_t n = b.shape[0], k = chol_lower.shape[0]
    cdef Py_ssize_t p, c, j
    for p in range(n):
        for c in range(k):
            for j in range(c):
                b[p, c] -= chol_lower[c, j] * b[p, j]
            b[p, c] /= chol_lower[c, c]
        for c in range(k - 1, -1, -1):
            for j in range(c + 1, k):
                b[p, c] -= chol_lower[j, c] * b[p, j]
            b[p, c] /= chol_lower[c, c]
    return np.asarray(b)

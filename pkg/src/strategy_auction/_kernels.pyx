# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: simplex pivot loop and retrieval dot products.

Operation-for-operation mirror of ``_kernels_py`` so both backends yield
bit-identical results; keep the arithmetic order in sync when editing.
"""

import numpy as np

BACKEND_NAME = "compiled"

SIMPLEX_OPTIMAL = 0
SIMPLEX_UNBOUNDED = 1
SIMPLEX_MAXITER = 2


STALL_LIMIT = 40


def simplex_iterate(double[:, ::1] tab, long long[::1] basis, double tol, long long max_iter):
    """Run simplex iterations on a tableau, in place.

    Dantzig pricing, switching to Bland's rule after STALL_LIMIT
    consecutive degenerate pivots (anti-cycling guarantee).
    """
    cdef Py_ssize_t m = tab.shape[0] - 1
    cdef Py_ssize_t n = tab.shape[1] - 1
    cdef Py_ssize_t iters = 0
    cdef Py_ssize_t stalled = 0
    cdef bint use_bland = 0
    cdef Py_ssize_t col, row, i, k
    cdef double best, ratio, pivot, factor, objective_before, most_negative

    while iters < max_iter:
        if use_bland:
            # Bland entering rule: lowest eligible column index.
            col = -1
            for k in range(n):
                if tab[m, k] < -tol:
                    col = k
                    break
            if col < 0:
                return SIMPLEX_OPTIMAL, iters
        else:
            # Dantzig entering rule: most negative reduced cost, lowest
            # index on ties.
            col = 0
            most_negative = tab[m, 0]
            for k in range(1, n):
                if tab[m, k] < most_negative:
                    most_negative = tab[m, k]
                    col = k
            if most_negative >= -tol:
                return SIMPLEX_OPTIMAL, iters

        # Ratio test; ties by lowest basic variable index.
        row = -1
        best = 0.0
        for i in range(m):
            if tab[i, col] > tol:
                ratio = tab[i, n] / tab[i, col]
                if row < 0 or ratio < best or (ratio == best and basis[i] < basis[row]):
                    row = i
                    best = ratio
        if row < 0:
            return SIMPLEX_UNBOUNDED, iters

        objective_before = tab[m, n]
        pivot = tab[row, col]
        for k in range(n + 1):
            tab[row, k] = tab[row, k] / pivot
        for i in range(m + 1):
            if i == row:
                continue
            factor = tab[i, col]
            for k in range(n + 1):
                tab[i, k] = tab[i, k] - factor * tab[row, k]
        basis[row] = col
        iters += 1

        if not use_bland:
            if tab[m, n] == objective_before:
                stalled += 1
                if stalled >= STALL_LIMIT:
                    use_bland = 1
            else:
                stalled = 0
    return SIMPLEX_MAXITER, iters


def dot_scores(double[:, ::1] matrix, double[::1] query):
    """Row-wise dot products of a (n, d) matrix against a query vector."""
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t d = matrix.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_view = out
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc += matrix[i, j] * query[j]
        out_view[i] = acc
    return out

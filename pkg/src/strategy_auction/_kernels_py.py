"""Pure numpy implementations of the hot kernels.

Mirrors ``_kernels.pyx`` operation-for-operation: the simplex pivot uses
the same elementwise arithmetic order, so both backends produce
bit-identical tableaus.  Selected by ``strategy_auction.backends`` when
the compiled extension is unavailable.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

SIMPLEX_OPTIMAL = 0
SIMPLEX_UNBOUNDED = 1
SIMPLEX_MAXITER = 2


STALL_LIMIT = 40


def simplex_iterate(tab: np.ndarray, basis: np.ndarray, tol: float, max_iter: int) -> tuple[int, int]:
    """Run simplex iterations on a tableau, in place.

    ``tab`` is (m+1) x (n+1): m constraint rows then the reduced-cost row,
    with the right-hand side in the last column.  ``basis`` holds the m
    basic column indices.  Pricing is Dantzig's rule; after STALL_LIMIT
    consecutive degenerate pivots it switches to Bland's rule, which
    guarantees termination.  Returns (status, iterations).
    """
    m = tab.shape[0] - 1
    n = tab.shape[1] - 1
    iters = 0
    stalled = 0
    use_bland = False
    while iters < max_iter:
        reduced = tab[m, :n]
        if use_bland:
            # Bland entering rule: lowest eligible column index.
            neg = np.nonzero(reduced < -tol)[0]
            if neg.size == 0:
                return SIMPLEX_OPTIMAL, iters
            col = int(neg[0])
        else:
            # Dantzig entering rule: most negative reduced cost, lowest
            # index on ties.
            col = int(np.argmin(reduced))
            if reduced[col] >= -tol:
                return SIMPLEX_OPTIMAL, iters

        pivot_col = tab[:m, col]
        positive = np.nonzero(pivot_col > tol)[0]
        if positive.size == 0:
            return SIMPLEX_UNBOUNDED, iters
        ratios = tab[positive, n] / pivot_col[positive]
        best = ratios.min()
        tied = positive[ratios == best]
        # Leaving rule: among minimal ratios, lowest basic variable index.
        row = int(tied[np.argmin(basis[tied])])

        objective_before = tab[m, n]
        pivot = tab[row, col]
        tab[row, :] = tab[row, :] / pivot
        factors = tab[:, col].copy()
        factors[row] = 0.0
        tab -= factors[:, None] * tab[row, None, :]
        basis[row] = col
        iters += 1

        if not use_bland:
            if tab[m, n] == objective_before:
                stalled += 1
                if stalled >= STALL_LIMIT:
                    use_bland = True
            else:
                stalled = 0
    return SIMPLEX_MAXITER, iters


def dot_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row-wise dot products of a (n, d) matrix against a query vector.

    einsum rather than BLAS matmul: BLAS row-blocking can give duplicate
    rows last-ulp-different scores, which would break insertion-order
    tie-breaking in retrieval.
    """
    return np.einsum("ij,j->i", matrix, query)

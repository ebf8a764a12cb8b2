"""Dense two-phase simplex with Bland's anti-cycling rule.

Deterministic by construction: entering variable is the lowest eligible
column index, the leaving row breaks ratio ties by lowest basic index.
Free variables are handled by sign splitting, bounded variables by
shifting to a nonnegative range with an explicit upper-bound row.  The
pivot loop itself lives in the kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import backends

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    fun: float | None
    iterations: int


def _to_standard_form(c, a_ub, b_ub, a_eq, b_eq, bounds):
    """Rewrite min c.x, A_ub x <= b_ub, A_eq x = b_eq, lb <= x <= ub as
    min c'.y, A y = b, y >= 0.  Returns (c', A, b, recover) where
    ``recover`` maps a standard-form solution back to original variables.
    """
    n = len(c)
    a_ub = np.zeros((0, n)) if a_ub is None else np.asarray(a_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    a_eq = np.zeros((0, n)) if a_eq is None else np.asarray(a_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    c = np.asarray(c, dtype=float)

    # Column build: per original variable, one or two standard columns.
    cols: list[np.ndarray] = []
    col_costs: list[float] = []
    # recover_spec entries: (kind, column index (or pair), offset)
    recover_spec = []
    extra_rows: list[tuple[int, float]] = []  # (column, upper value) box rows
    full_a = np.vstack([a_ub, a_eq]) if n else np.zeros((a_ub.shape[0] + a_eq.shape[0], 0))
    offset = np.zeros(n)

    for j in range(n):
        lo, hi = bounds[j]
        column = full_a[:, j]
        if lo is None and hi is None:
            cols.append(column)
            col_costs.append(c[j])
            cols.append(-column)
            col_costs.append(-c[j])
            recover_spec.append(("split", len(cols) - 2, len(cols) - 1))
        elif lo is not None and hi is not None and lo == hi:
            # Fixed variable: substitute the constant instead of carrying a
            # degenerate box row (branch-and-bound fixes binaries this way).
            offset[j] = lo
            recover_spec.append(("const", -1, lo))
        elif lo is not None:
            offset[j] = lo
            cols.append(column)
            col_costs.append(c[j])
            recover_spec.append(("shift", len(cols) - 1, lo))
            if hi is not None:
                extra_rows.append((len(cols) - 1, hi - lo))
        else:
            # upper bound only: x = hi - s with s >= 0
            offset[j] = hi
            cols.append(-column)
            col_costs.append(-c[j])
            recover_spec.append(("mirror", len(cols) - 1, hi))

    n_std = len(cols)
    a_core = np.column_stack(cols) if n_std else np.zeros((full_a.shape[0], 0))

    # Constant shift from lower/upper-bound offsets moves into the RHS.
    rhs_shift = full_a @ offset
    b_core = np.concatenate([b_ub, b_eq]) - rhs_shift

    n_ub = a_ub.shape[0]
    rows = []
    rhs = []
    slack_count = n_ub + len(extra_rows)
    slack_idx = 0
    for i in range(n_ub):
        row = np.zeros(n_std + slack_count)
        row[:n_std] = a_core[i]
        row[n_std + slack_idx] = 1.0
        slack_idx += 1
        rows.append(row)
        rhs.append(b_core[i])
    for i in range(a_eq.shape[0]):
        row = np.zeros(n_std + slack_count)
        row[:n_std] = a_core[n_ub + i]
        rows.append(row)
        rhs.append(b_core[n_ub + i])
    for col_j, ub_val in extra_rows:
        row = np.zeros(n_std + slack_count)
        row[col_j] = 1.0
        row[n_std + slack_idx] = 1.0
        slack_idx += 1
        rows.append(row)
        rhs.append(ub_val)

    a_std = np.array(rows) if rows else np.zeros((0, n_std + slack_count))
    b_std = np.array(rhs)
    c_std = np.concatenate([np.array(col_costs), np.zeros(slack_count)])

    # Standard form wants b >= 0.
    for i in range(a_std.shape[0]):
        if b_std[i] < 0.0:
            a_std[i] = -a_std[i]
            b_std[i] = -b_std[i]

    def recover(y: np.ndarray) -> np.ndarray:
        x = np.zeros(n)
        for j, (kind, a, b) in enumerate(recover_spec):
            if kind == "split":
                x[j] = y[a] - y[b]
            elif kind == "const":
                x[j] = b
            elif kind == "shift":
                x[j] = b + y[a]
            else:
                x[j] = b - y[a]
        return x

    return c_std, a_std, b_std, recover


def _run_phase(tab: np.ndarray, basis: np.ndarray, max_iter: int) -> tuple[int, int]:
    return backends.simplex_iterate(tab, basis, PIVOT_TOL, max_iter)


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, bounds=None, max_iter=None) -> LpResult:
    """Minimize ``c @ x`` under linear constraints and box bounds.

    ``bounds`` is one (lo, hi) pair per variable with ``None`` for an
    absent bound; the default is nonnegativity.
    """
    n = len(c)
    if bounds is None:
        bounds = [(0.0, None)] * n
    c_std, a_std, b_std, recover = _to_standard_form(c, a_ub, b_ub, a_eq, b_eq, bounds)
    m, n_std = a_std.shape
    if max_iter is None:
        max_iter = 2000 + 200 * (m + n_std)

    if m == 0:
        # No constraint rows: optimum sits at the box corner, or escapes.
        if np.any(c_std < 0.0):
            return LpResult(UNBOUNDED, None, None, 0)
        x = recover(np.zeros(n_std))
        return LpResult(OPTIMAL, x, float(np.dot(np.asarray(c, dtype=float), x)), 0)

    # Phase 1: artificial basis, minimize sum of artificials.
    tab = np.zeros((m + 1, n_std + m + 1))
    tab[:m, :n_std] = a_std
    tab[:m, n_std:n_std + m] = np.eye(m)
    tab[:m, -1] = b_std
    # Reduced costs of phase-1 objective after pricing out the artificials.
    tab[m, :n_std] = -a_std.sum(axis=0)
    tab[m, -1] = -b_std.sum()
    basis = np.arange(n_std, n_std + m, dtype=np.int64)

    status, it1 = _run_phase(tab, basis, max_iter)
    if status == backends.SIMPLEX_MAXITER:
        return LpResult(ITERATION_LIMIT, None, None, it1)
    if -tab[m, -1] > FEAS_TOL:
        return LpResult(INFEASIBLE, None, None, it1)

    # Drive any basic artificial out, or drop its (redundant) row.
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= n_std:
            pivot_cols = np.nonzero(np.abs(tab[i, :n_std]) > PIVOT_TOL)[0]
            if pivot_cols.size == 0:
                keep[i] = False
                continue
            col = int(pivot_cols[0])
            pivot = tab[i, col]
            tab[i, :] = tab[i, :] / pivot
            factors = tab[:, col].copy()
            factors[i] = 0.0
            tab -= factors[:, None] * tab[i, None, :]
            basis[i] = col

    if not keep.all():
        rows = np.concatenate([np.nonzero(keep)[0], [m]])
        tab = tab[rows]
        basis = basis[keep]
        m = basis.size

    # Phase 2: real costs over the non-artificial columns.
    tab2 = np.zeros((m + 1, n_std + 1))
    tab2[:m, :n_std] = tab[:m, :n_std]
    tab2[:m, -1] = tab[:m, -1]
    tab2[m, :n_std] = c_std
    for i in range(m):
        cb = c_std[basis[i]]
        if cb != 0.0:
            tab2[m, :] -= cb * tab2[i, :]

    status, it2 = _run_phase(tab2, basis, max_iter)
    if status == backends.SIMPLEX_UNBOUNDED:
        return LpResult(UNBOUNDED, None, None, it1 + it2)
    if status == backends.SIMPLEX_MAXITER:
        return LpResult(ITERATION_LIMIT, None, None, it1 + it2)

    y = np.zeros(n_std)
    for i in range(m):
        if basis[i] < n_std:
            y[basis[i]] = tab2[i, -1]
    x = recover(y)
    return LpResult(OPTIMAL, x, float(np.dot(np.asarray(c, dtype=float), x)), it1 + it2)

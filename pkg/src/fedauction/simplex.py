"""Dense primal simplex for small inequality-form LPs.

Solves ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``, which is the
only shape the winner-determination relaxation needs (the all-slack basis
is feasible, so no phase-one). Bland's smallest-index rule is used for
both the entering and leaving variable, which rules out cycling.
"""

from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-9


class UnboundedProblemError(Exception):
    """The LP has unbounded objective (cannot happen for capacitated auctions)."""


def maximize(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    tol: float = PIVOT_TOL,
) -> tuple[float, np.ndarray]:
    """Return the optimal value and an optimal vertex of the LP.

    Args:
        c: objective coefficients, shape (n,).
        A: constraint matrix, shape (m, n).
        b: nonnegative right-hand sides, shape (m,).

    Raises:
        ValueError: if any right-hand side is negative.
        UnboundedProblemError: if an improving column has no blocking row.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if np.any(b < 0):
        raise ValueError("right-hand sides must be nonnegative")

    # Tableau: [A | I | b] over the (negated) objective row.
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = A
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[m, :n] = -c
    basis = list(range(n, n + m))

    max_pivots = 50 * (n + m + 1)
    for _ in range(max_pivots):
        row = tableau[m, : n + m]
        entering = -1
        for j in range(n + m):  # Bland: smallest improving index
            if row[j] < -tol:
                entering = j
                break
        if entering < 0:
            break

        column = tableau[:m, entering]
        best_ratio = np.inf
        leaving = -1
        for i in range(m):
            if column[i] > tol:
                ratio = tableau[i, -1] / column[i]
                if ratio < best_ratio - tol or (
                    abs(ratio - best_ratio) <= tol
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            raise UnboundedProblemError("no blocking row for entering column")

        pivot = tableau[leaving, entering]
        tableau[leaving] /= pivot
        for i in range(m + 1):
            if i != leaving and tableau[i, entering] != 0.0:
                tableau[i] -= tableau[i, entering] * tableau[leaving]
        basis[leaving] = entering
    else:
        raise ArithmeticError("simplex failed to terminate within the pivot budget")

    x = np.zeros(n + m)
    for i, var in enumerate(basis):
        x[var] = tableau[i, -1]
    solution = np.maximum(x[:n], 0.0)
    return float(tableau[m, -1]), solution

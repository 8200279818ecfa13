"""Small dense simplex solver for maximization in inequality standard form.

Solves max c.x subject to A x <= b, x >= 0 with strictly positive b, so the
all-slack basis is immediately feasible and no artificial phase is needed.
Entering columns follow Dantzig's rule; leaving rows break ratio ties
lexicographically on the basis-inverse rows, which guards against cycling on
the highly degenerate bases these discretizations produce.
"""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)

_REDUCED_COST_TOL = 1e-9
_PIVOT_TOL = 1e-11
_RATIO_TIE_REL = 1e-10


class SimplexError(RuntimeError):
    pass


def solve_max(c, a, b, max_iters: int | None = None) -> tuple[float, np.ndarray]:
    """Return (optimal value, optimal x) of max c.x s.t. A x <= b, x >= 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = a.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent problem dimensions")
    if np.any(b <= 0.0):
        raise ValueError("slack start requires strictly positive right-hand sides")
    if max_iters is None:
        max_iters = 50 * (m + n)

    # Rows 0..m-1: [A | I | b]; last row: reduced costs [-c | 0 | 0].
    t = np.zeros((m + 1, n + m + 1))
    t[:m, :n] = a
    t[:m, n : n + m] = np.eye(m)
    t[:m, -1] = b
    t[m, :n] = -c
    basis = np.arange(n, n + m)

    for iteration in range(max_iters):
        enter = int(np.argmin(t[m, :-1]))
        if t[m, enter] >= -_REDUCED_COST_TOL:
            log.debug("simplex optimal after %d pivots", iteration)
            break
        col = t[:m, enter]
        positive = col > _PIVOT_TOL
        if not np.any(positive):
            raise SimplexError("unbounded problem")
        ratios = np.full(m, np.inf)
        ratios[positive] = t[:m, -1][positive] / col[positive]
        best = float(np.min(ratios))
        tied = np.flatnonzero(ratios <= best + _RATIO_TIE_REL * (1.0 + abs(best)))
        if len(tied) > 1:
            # Lexicographic comparison of (ratio | basis-inverse row / pivot).
            keys = np.column_stack(
                [ratios[tied], t[tied][:, n : n + m] / col[tied][:, None]]
            )
            leave = tied[int(np.lexsort(keys.T[::-1])[0])]
        else:
            leave = int(tied[0])

        pivot = t[leave, enter]
        t[leave] /= pivot
        column = t[:, enter].copy()
        column[leave] = 0.0
        t -= np.outer(column, t[leave])
        t[:, enter] = 0.0
        t[leave, enter] = 1.0
        basis[leave] = enter
    else:
        raise SimplexError(f"no convergence within {max_iters} pivots")

    x = np.zeros(n + m)
    x[basis] = t[:m, -1]
    return float(t[m, -1]), x[:n]

"""Independent finite-dimensional cross-check of the worst-case ratio.

Discretizes the minimax program over nonincreasing quantile shapes: a
piecewise-constant density on a uniform partition plus an explicit atom
variable at quantile zero (so no discretization error enters through the
atom).  After the standard normalize-and-invert transform the problem
becomes a maximization with unit right-hand sides, solved by the dense
simplex; the reported optimum is exact for the discretization and
approaches q_value(m, k, k/n)/k from below as the grid refines.
"""

from __future__ import annotations

import numpy as np

from .binom import SelectionInstance, g_cumulative, q_value
from .simplex import solve_max

MIN_CELLS = 10
MAX_CELLS = 2000


def solve_discretized_lp(inst: SelectionInstance, grid_cells: int) -> float:
    """Optimal value of the discretized program with the given cell count."""
    if not MIN_CELLS <= grid_cells <= MAX_CELLS:
        raise ValueError(f"grid_cells must lie in [{MIN_CELLS}, {MAX_CELLS}], got {grid_cells}")
    m, n, k = inst.m, inst.n, inst.k
    cells = grid_cells
    delta = 1.0 / cells
    bounds = np.arange(1, cells + 1) / cells

    ratios = q_value(m, k, bounds) / bounds
    # Variables y = (atom, s_1..s_cells) with s_l the downward step of the
    # density after cell l; mass below boundary j is delta * sum_l min(l, j) s_l.
    steps = np.minimum.outer(np.arange(1, cells + 1), np.arange(1, cells + 1))
    a = np.zeros((cells + 1, cells + 1))
    a[:cells, 0] = ratios
    a[:cells, 1:] = ratios[:, None] * delta * steps
    a[cells, 0] = float(m)  # value slope at quantile zero bounds the atom
    b = np.ones(cells + 1)

    c = np.empty(cells + 1)
    c[0] = float(n)  # kernel weight collected by the atom
    c[1:] = g_cumulative(n, k, bounds)

    value, _ = solve_max(c, a, b)
    return 1.0 / value

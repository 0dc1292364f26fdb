"""Minimum-cost one-to-one assignment on rectangular cost matrices.

Thin wrapper around scipy's Hungarian-style solver. Forbidden pairings are
expressed with a large finite sentinel; callers drop sentinel-cost pairs
from the returned assignment afterwards.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EmptyCostMatrixError


def forbidden_sentinel(cost: np.ndarray) -> float:
    """Sentinel larger than any achievable assignment total for `cost`."""
    finite = cost[np.isfinite(cost)]
    if finite.size == 0:
        return 1e9
    return max(1e9, 10.0 * float(np.abs(finite).max()) * max(cost.shape))


def solve_assignment(cost: np.ndarray) -> list[tuple[int, int]]:
    """Return the min-cost pairing of rows to columns, size min(n, m).

    Each row and column is used at most once and the total cost over the
    returned pairs is the global minimum over all one-to-one pairings.
    Entries must be finite. Raises EmptyCostMatrixError on an empty matrix.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {c.shape}")
    if c.shape[0] == 0 or c.shape[1] == 0:
        raise EmptyCostMatrixError(f"empty cost matrix with shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix entries must be finite; use a sentinel for forbidden pairs")
    rows, cols = linear_sum_assignment(c)
    return sorted(zip(rows.tolist(), cols.tolist()))


def assignment_cost(cost: np.ndarray, pairs: list[tuple[int, int]]) -> float:
    c = np.asarray(cost, dtype=float)
    return float(sum(c[i, j] for i, j in pairs))

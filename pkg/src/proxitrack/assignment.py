"""Minimum-cost bipartite assignment (Hungarian method).

Jonker-Volgenant style shortest augmenting paths with row/column
potentials, O(n^2 m).  Rows are augmented in increasing index order and
column scans keep the first minimum, so equal-cost solutions resolve
deterministically (lowest row index, then lowest column index) on every
platform.
"""

import numpy as np


def linear_assignment(cost):
    """Assign min(n, m) row/column pairs with globally minimal total cost.

    Parameters
    ----------
    cost : (n, m) array of finite costs.  A large finite sentinel can be
        used to mark forbidden pairs.

    Returns
    -------
    list of (row, col) pairs sorted by row index.  Empty input yields an
    empty assignment.
    """
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"cost must be a 2-D matrix, got ndim={a.ndim}")
    if a.size == 0:
        return []
    if not np.isfinite(a).all():
        raise ValueError("cost matrix entries must be finite")
    transposed = a.shape[0] > a.shape[1]
    if transposed:
        a = a.T
    n, m = a.shape

    u = np.zeros(n + 1)  # row potentials
    v = np.zeros(m + 1)  # column potentials (index 0 is a sentinel)
    link = np.zeros(m + 1, dtype=np.int64)  # link[j] = row matched to column j
    way = np.zeros(m + 1, dtype=np.int64)

    for i in range(1, n + 1):
        link[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = link[j0]
            free = ~used[1:]
            cur = a[i0 - 1, :] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            if better.any():
                minv[1:][better] = cur[better]
                way[1:][better] = j0
            free_idx = np.nonzero(free)[0]
            j1 = free_idx[np.argmin(minv[1:][free])] + 1  # argmin keeps lowest index
            delta = minv[j1]
            used_idx = np.nonzero(used)[0]
            u[link[used_idx]] += delta
            v[used_idx] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if link[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            link[j0] = link[j1]
            j0 = j1

    pairs = []
    for j in range(1, m + 1):
        if link[j] != 0:
            r, c = int(link[j]) - 1, j - 1
            pairs.append((c, r) if transposed else (r, c))
    pairs.sort()
    return pairs


def assignment_cost(cost, pairs):
    """Total cost of an assignment over the given matrix."""
    a = np.asarray(cost, dtype=float)
    return float(sum(a[r, c] for r, c in pairs))

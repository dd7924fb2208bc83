"""Two-sided Mann-Whitney U test with exact small-sample p-values."""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.stats import norm

EXACT_MAX_TOTAL = 12


def _u_statistic(a, b) -> float:
    diff = a[:, None] - b[None, :]
    return float(np.sum(diff > 0) + 0.5 * np.sum(diff == 0))


def mann_whitney_u(a, b):
    """Return (U, p) with U = min(U_a, U_b).

    p is exact (all C(n1+n2, n1) relabelings) when n1 + n2 <= 12, otherwise
    a normal approximation with tie-corrected variance and continuity
    correction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples need at least one value")
    u_a = _u_statistic(a, b)
    u = min(u_a, n1 * n2 - u_a)
    centre = n1 * n2 / 2
    dev = abs(u_a - centre)
    if n1 + n2 <= EXACT_MAX_TOTAL:
        pooled = np.concatenate((a, b))
        idx = np.arange(n1 + n2)
        hits = total = 0
        for chosen in combinations(range(n1 + n2), n1):
            mask = np.zeros(n1 + n2, bool)
            mask[list(chosen)] = True
            u_perm = _u_statistic(pooled[mask], pooled[idx[~mask]])
            total += 1
            if abs(u_perm - centre) >= dev - 1e-9:
                hits += 1
        return u, min(1.0, hits / total)
    pooled = np.concatenate((a, b))
    _, counts = np.unique(pooled, return_counts=True)
    N = n1 + n2
    tie_term = np.sum(counts**3 - counts) / (N * (N - 1))
    var = n1 * n2 / 12 * ((N + 1) - tie_term)
    if var <= 0:
        return u, 1.0
    z = max(dev - 0.5, 0.0) / np.sqrt(var)
    return u, float(min(1.0, 2 * norm.sf(z)))

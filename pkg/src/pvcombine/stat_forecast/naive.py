"""Seasonal naive (periodic persistence) forecaster."""

import numpy as np

from ..errors import InsufficientHistory


def seasonal_naive(train, m: int, h: int) -> np.ndarray:
    """Repeat the last observed season: step i takes y[n - m + (i-1) mod m]."""
    y = np.asarray(getattr(train, "values", train), dtype=float)
    n = len(y)
    if m < 1 or h < 1:
        raise ValueError("m and h must be positive")
    if n < m:
        raise InsufficientHistory(f"need at least {m} observations, got {n}")
    return y[n - m + np.arange(h) % m].copy()


def seasonal_naive_at(y, cutoffs, m: int, h: int) -> np.ndarray:
    """Seasonal naive forecasts for many cutoffs at once; row i uses y[:cutoffs[i]]."""
    y = np.asarray(y, dtype=float)
    cutoffs = np.asarray(cutoffs, dtype=int)
    if len(cutoffs) and cutoffs.min() < m:
        raise InsufficientHistory(f"a cutoff leaves fewer than {m} observations")
    idx = cutoffs[:, None] - m + (np.arange(h) % m)[None, :]
    return y[idx]

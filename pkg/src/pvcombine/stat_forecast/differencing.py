"""Seasonal/ordinary differencing and its inverse."""

import numpy as np

from ..errors import InsufficientHistory, InsufficientLength


def _lags(d: int, D: int, m: int) -> list:
    # seasonal differences are applied first, then ordinary ones
    return [m] * D + [1] * d


def difference(x, d: int, D: int = 0, m: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if len(x) <= d + D * m:
        raise InsufficientLength(f"length {len(x)} too short for d={d}, D={D}, m={m}")
    for lag in _lags(d, D, m):
        x = x[lag:] - x[:-lag]
    return x


def difference_columns(X, d: int, D: int = 0, m: int = 1) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    for lag in _lags(d, D, m):
        X = X[lag:] - X[:-lag]
    return X


def undifference_batch(diffs, history, d: int, D: int = 0, m: int = 1) -> np.ndarray:
    """Integrate (k, h) differenced forecasts back to the original scale.

    `history` is (k, L) with L >= d + D*m trailing original-scale values per row.
    """
    out = np.atleast_2d(np.asarray(diffs, dtype=float))
    history = np.atleast_2d(np.asarray(history, dtype=float))
    lags = _lags(d, D, m)
    if history.shape[1] < sum(lags):
        raise InsufficientHistory(f"need {sum(lags)} history values, got {history.shape[1]}")
    levels = [history]
    for lag in lags[:-1]:
        levels.append(levels[-1][:, lag:] - levels[-1][:, :-lag])
    h = out.shape[1]
    for lag, level in zip(reversed(lags), reversed(levels)):
        integrated = np.empty_like(out)
        L = level.shape[1]
        for j in range(h):
            base = level[:, L + j - lag] if j < lag else integrated[:, j - lag]
            integrated[:, j] = out[:, j] + base
        out = integrated
    return out


def undifference(forecast_diffs, history, d: int, D: int = 0, m: int = 1) -> np.ndarray:
    history = np.asarray(history, dtype=float)
    return undifference_batch(np.asarray(forecast_diffs, float)[None, :], history[None, :], d, D, m)[0]

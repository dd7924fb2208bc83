"""Automatic order selection: KPSS / seasonal-strength differencing plus a
stepwise AICc search, and the Fourier workaround for long seasonal periods."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from datetime import timedelta

import numpy as np

from ..errors import (
    InsufficientHistory,
    InsufficientLength,
    KTooLarge,
    NonConvergence,
    SearchExhausted,
)
from ..series import FIVE_MINUTES, MINUTE, Resolution, seasonal_period
from .arima import ArimaModel, ArimaOrder, FourierSpec, fit_arima
from .differencing import difference

log = logging.getLogger(__name__)

KPSS_CRITICAL_5PCT = 0.463

# trailing training window for resolutions whose season is too long to model natively
HIGH_RES_WINDOWS = {MINUTE: timedelta(days=25), FIVE_MINUTES: timedelta(days=14)}


@dataclass(frozen=True)
class SearchConfig:
    max_p: int = 5
    max_q: int = 5
    max_P: int = 2
    max_Q: int = 2
    max_d: int = 2
    max_D: int = 1
    kpss_critical: float = KPSS_CRITICAL_5PCT
    seasonal_threshold: float = 0.64
    seasonal: bool = True
    max_models: int = 94
    fourier_K: int = 3
    tie_tol: float = 1e-6


def kpss_statistic(x) -> float:
    """KPSS level-stationarity statistic with a Bartlett long-run variance."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    e = x - x.mean()
    s = np.cumsum(e)
    lags = int(3 * np.sqrt(n) / 13)
    lrv = e @ e / n
    for lag in range(1, lags + 1):
        lrv += 2 * (1 - lag / (lags + 1)) * (e[lag:] @ e[:-lag]) / n
    if lrv <= 0:
        return 0.0
    return float(s @ s / (n * n * lrv))


def ndiffs(x, max_d: int = 2, critical: float = KPSS_CRITICAL_5PCT) -> int:
    d = 0
    x = np.asarray(x, dtype=float)
    while d < max_d and len(x) > 10 and np.ptp(x) > 0 and kpss_statistic(x) > critical:
        x = np.diff(x)
        d += 1
    return d


def seasonal_strength(x, m: int) -> float:
    """1 - Var(remainder) / Var(seasonal + remainder) of a moving-average decomposition."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if m < 2 or n < 2 * m + 1:
        return 0.0
    if m % 2 == 0:
        kernel = np.r_[0.5, np.ones(m - 1), 0.5] / m
    else:
        kernel = np.ones(m) / m
    trend = np.convolve(x, kernel, mode="valid")
    half = (len(kernel) - 1) // 2
    detrended = x[half : half + len(trend)] - trend
    phase = (np.arange(len(detrended)) + half) % m
    means = np.bincount(phase, weights=detrended, minlength=m) / np.bincount(phase, minlength=m)
    means -= means.mean()
    seasonal = means[phase]
    remainder = detrended - seasonal
    denom = np.var(seasonal + remainder)
    if denom <= 0:
        return 0.0
    return float(max(0.0, 1.0 - np.var(remainder) / denom))


def fourier_terms(t_start: int, length: int, m: int, K: int) -> np.ndarray:
    if K < 1:
        raise ValueError("K must be positive")
    if 2 * K >= m:
        raise KTooLarge(f"2K = {2 * K} must be smaller than the period {m}")
    t = np.arange(t_start, t_start + length, dtype=float)
    out = np.empty((length, 2 * K))
    for j in range(1, K + 1):
        angle = 2 * np.pi * j * t / m
        out[:, 2 * j - 2] = np.sin(angle)
        out[:, 2 * j - 1] = np.cos(angle)
    return out


def _better(a: ArimaModel, b: ArimaModel | None, tol: float) -> bool:
    if b is None:
        return True
    if abs(a.aicc - b.aicc) > tol:
        return a.aicc < b.aicc
    return (a.n_params, _key(a.order)) < (b.n_params, _key(b.order))


def _key(o: ArimaOrder):
    return (o.p, o.q, o.P, o.Q)


def auto_arima(
    y,
    m: int,
    exog=None,
    config: SearchConfig = SearchConfig(),
    fourier: FourierSpec | None = None,
    t_start: int = 0,
) -> ArimaModel:
    """Select (d, D) by unit-root heuristics, then (p, q, P, Q) stepwise by AICc.

    Returns the best fitted model. Seasonal terms are disabled when m == 1 or
    config.seasonal is False.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < (2 * m + 20 if m > 1 else 20):
        raise InsufficientHistory(f"{n} observations too few for automatic order selection (m={m})")
    seasonal = config.seasonal and m > 1
    D = 0
    if seasonal and config.max_D >= 1 and seasonal_strength(y, m) > config.seasonal_threshold:
        D = 1
    base = difference(y, 0, D, m) if D else y
    d = ndiffs(base, config.max_d, config.kpss_critical)
    if d + D > 3:
        d = 3 - D

    max_P = config.max_P if seasonal else 0
    max_Q = config.max_Q if seasonal else 0
    fits: dict = {}

    def evaluate(p, q, P, Q):
        key = (p, q, P, Q)
        if key in fits:
            return fits[key]
        if len(fits) >= config.max_models:
            return None
        order = ArimaOrder(p, d, q, P, D, Q, m if seasonal else 1)
        try:
            model = fit_arima(y, order, exog=exog, fourier=fourier, t_start=t_start)
        except (NonConvergence, InsufficientLength) as exc:
            log.debug("skipping %s: %s", order, exc)
            model = None
        fits[key] = model
        return model

    def clip(p, q, P, Q):
        return (min(p, config.max_p), min(q, config.max_q), min(P, max_P), min(Q, max_Q))

    best = None
    for start in (clip(2, 2, 1, 1), (0, 0, 0, 0)):
        model = evaluate(*start)
        if model is not None and _better(model, best, config.tie_tol):
            best = model
    if best is None:
        # fall back to the smallest candidates before giving up
        for start in ((1, 0, 0, 0), (0, 1, 0, 0)):
            model = evaluate(*clip(*start))
            if model is not None and _better(model, best, config.tie_tol):
                best = model
    if best is None:
        raise SearchExhausted(f"no candidate order converged (d={d}, D={D})")

    limits = (config.max_p, config.max_q, max_P, max_Q)
    while True:
        current = _key(best.order)
        candidate = None
        for i in range(4):
            for delta in (-1, 1):
                nxt = list(current)
                nxt[i] += delta
                if not 0 <= nxt[i] <= limits[i]:
                    continue
                model = evaluate(*nxt)
                if model is not None and _better(model, candidate, config.tie_tol):
                    candidate = model
        if candidate is None or not _better(candidate, best, config.tie_tol):
            break
        best = candidate
    return best


def auto_order(y, m: int, exog=None, config: SearchConfig = SearchConfig()) -> ArimaOrder:
    return auto_arima(y, m, exog=exog, config=config).order


def _phase(start, res: Resolution, m: int) -> int:
    """Seasonal position (steps since midnight) of a series' first point."""
    import pandas as pd

    ts = pd.Timestamp(start)
    return int(((ts - ts.normalize()) // res.step) % m)


def fit_high_resolution_arima(
    train,
    res: Resolution | None = None,
    exog=None,
    config: SearchConfig = SearchConfig(),
    order: ArimaOrder | None = None,
) -> ArimaModel:
    """Fit the (S)ARIMA(X) used for one resolution.

    1-minute and 5-minute data are fitted on a trailing window (25 and 14
    days) with daily seasonality carried by Fourier regressors and no native
    seasonal terms. Other resolutions use the whole series and native
    seasonal orders. Positions in the returned model are indices into
    `train.values`. A given `order` skips the search and only re-estimates.
    """
    res = res or train.resolution
    y = np.asarray(train.values, dtype=float)
    n = len(y)
    m = seasonal_period(res)
    X = None if exog is None else np.asarray(exog, dtype=float)
    if res in HIGH_RES_WINDOWS:
        window = res.steps_per(HIGH_RES_WINDOWS[res])
        if n < window:
            raise InsufficientHistory(f"need {window} points of {res} data, got {n}")
        lo = n - window
        fourier = FourierSpec(m=m, K=config.fourier_K, phase=_phase(train.start, res, m))
        Xw = None if X is None else X[lo:]
        if order is not None:
            return fit_arima(y[lo:], order, exog=Xw, fourier=fourier, t_start=lo)
        cfg = replace(config, seasonal=False)
        return auto_arima(y[lo:], m, exog=Xw, config=cfg, fourier=fourier, t_start=lo)
    if order is not None:
        return fit_arima(y, order, exog=X)
    return auto_arima(y, m, exog=X, config=config)


__all__ = [
    "SearchConfig",
    "auto_arima",
    "auto_order",
    "fit_high_resolution_arima",
    "fourier_terms",
    "kpss_statistic",
    "ndiffs",
    "seasonal_strength",
]

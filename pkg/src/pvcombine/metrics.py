"""Mean absolute scaled error and the aggregations applied on top of it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, EmptyInput, LengthMismatch


@dataclass(frozen=True)
class SampleScore:
    house_id: str
    method: str
    sample_index: int
    mase: float

    def __post_init__(self):
        if not (np.isfinite(self.mase) and self.mase >= 0):
            raise ValueError(f"invalid MASE {self.mase!r}")


def mase_scale(insample, m: int) -> float:
    """In-sample mean absolute seasonal-naive error (the MASE denominator)."""
    y = np.asarray(insample, dtype=float)
    if m < 1:
        raise ValueError("seasonal period must be positive")
    if len(y) <= m:
        raise LengthMismatch(f"in-sample length {len(y)} must exceed the seasonal period {m}")
    scale = float(np.mean(np.abs(y[m:] - y[:-m])))
    if not scale > 0:
        raise DegenerateDenominator("in-sample seasonal differences are all zero")
    return scale


def mase(actuals, forecasts, insample, m: int) -> float:
    a = np.asarray(actuals, dtype=float)
    f = np.asarray(forecasts, dtype=float)
    if a.shape != f.shape:
        raise LengthMismatch(f"actuals {a.shape} vs forecasts {f.shape}")
    if a.size == 0:
        raise EmptyInput("empty forecast horizon")
    return float(np.mean(np.abs(a - f)) / mase_scale(insample, m))


def sample_mase(actuals, forecasts, scale: float) -> np.ndarray:
    """Per-sample MASE for stacked (k, h) arrays sharing one denominator."""
    a = np.asarray(actuals, dtype=float)
    f = np.asarray(forecasts, dtype=float)
    if a.shape != f.shape:
        raise LengthMismatch(f"actuals {a.shape} vs forecasts {f.shape}")
    if not scale > 0:
        raise DegenerateDenominator("MASE scale must be positive")
    return np.mean(np.abs(a - f), axis=-1) / scale


def mean_mase(scores) -> float:
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise EmptyInput("no scores to average")
    return float(np.mean(s))


def median(values) -> float:
    v = np.sort(np.asarray(values, dtype=float))
    p = v.size
    if p == 0:
        raise EmptyInput("no values")
    mid = p // 2
    if p % 2:
        return float(v[mid])
    return float((v[mid - 1] + v[mid]) / 2)

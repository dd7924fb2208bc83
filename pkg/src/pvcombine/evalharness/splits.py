"""Train / holdout / test partitioning and forecast-origin tiling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..errors import SeriesTooShort
from ..series import TimeSeries

HOLDOUT_MONTHS = 2
TEST_MONTHS = 1


@dataclass(frozen=True)
class SplitPlan:
    train: range
    holdout: range
    test: range

    def __post_init__(self):
        if not (self.train.stop == self.holdout.start and self.holdout.stop == self.test.start):
            raise ValueError("splits must be contiguous")
        if not (len(self.train) and len(self.holdout) and len(self.test)):
            raise ValueError("every split must be non-empty")


@dataclass(frozen=True)
class Sample:
    cutoff: int
    actuals: np.ndarray


def make_splits(ts: TimeSeries) -> SplitPlan:
    """Last calendar month is the test set, the two before it the holdout."""
    start, end = ts.start, ts.end
    if start + pd.DateOffset(months=HOLDOUT_MONTHS + TEST_MONTHS + 1) > end:
        raise SeriesTooShort(f"series {start} .. {end} covers less than four months")
    test_start = (end - pd.DateOffset(months=TEST_MONTHS)).floor("D")
    holdout_start = (test_start - pd.DateOffset(months=HOLDOUT_MONTHS)).floor("D")
    lo = ts.position(holdout_start)
    mid = ts.position(test_start)
    if lo <= 0:
        raise SeriesTooShort("no training data before the holdout period")
    return SplitPlan(range(0, lo), range(lo, mid), range(mid, len(ts)))


def extract_samples(range_data, h: int, offset: int = 0) -> list:
    """Tile non-overlapping h-step windows from the start of a range.

    `range_data` is a TimeSeries or array holding just the range; `offset` is
    the range's position in the full series, so cutoffs are absolute indices
    (the first index each sample forecasts).
    """
    values = np.asarray(getattr(range_data, "values", range_data), dtype=float)
    if h < 1:
        raise ValueError("h must be positive")
    if len(values) < h:
        raise ValueError(f"range of length {len(values)} is shorter than the horizon {h}")
    k = len(values) // h
    return [Sample(offset + i * h, values[i * h : (i + 1) * h].copy()) for i in range(k)]


def sample_cutoffs(span: range, h: int) -> np.ndarray:
    k = len(span) // h
    return span.start + h * np.arange(k)

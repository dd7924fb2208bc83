"""Forecast combination: weighted blending, PSO-fitted weights, averaging and
the recursive ensemble."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import swarm
from .errors import DimensionMismatch, ZeroWeightSum
from .metrics import mase_scale

BASE_METHODS = ("SN", "SARIMA", "SARIMAX", "MLR", "SVR")
STRATEGIES = ("unconstrained", "box01", "convex", "average", "recursive")


@dataclass(frozen=True, eq=False)
class WeightVector:
    w: np.ndarray
    strategy: str

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        w = np.array(self.w, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.w)


def as_forecast_matrix(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise DimensionMismatch(f"forecast matrix must be (h, n), got shape {F.shape}")
    if not np.all(np.isfinite(F)):
        raise ValueError("forecast matrix has non-finite entries")
    return F


def blend(F, W) -> np.ndarray:
    """Combined forecast F @ w; no clamping."""
    F = np.asarray(F, dtype=float)
    w = W.w if isinstance(W, WeightVector) else np.asarray(W, dtype=float)
    if F.shape[-1] != len(w):
        raise DimensionMismatch(f"{F.shape[-1]} forecast columns vs {len(w)} weights")
    return F @ w


class MaseObjective:
    """Mean MASE over k samples as a function of the weight vector.

    All samples share the in-sample scale, so the objective reduces to the mean
    absolute error over every (sample, step) pair divided by that scale.
    """

    def __init__(self, samples, actuals, insample=None, m: int = 1, scale: float | None = None):
        F = np.asarray(samples, dtype=float)
        A = np.asarray(actuals, dtype=float)
        if F.ndim == 2:
            F = F[None]
        if A.ndim == 1:
            A = A[None]
        if F.shape[:2] != A.shape:
            raise DimensionMismatch(f"samples {F.shape} do not match actuals {A.shape}")
        self.k, self.h, self.n = F.shape
        self.rows = F.reshape(-1, self.n)
        self.targets = A.reshape(-1)
        self.scale = mase_scale(insample, m) if scale is None else float(scale)

    def __call__(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(np.mean(np.abs(self.rows @ w - self.targets)) / self.scale)

    def batch(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        err = np.abs(self.rows @ W.T - self.targets[:, None])
        return err.mean(axis=0) / self.scale


def fit_weights_pso(samples, actuals, insample, m: int, strategy: str, pso: swarm.PsoParams, scale=None) -> WeightVector:
    objective = MaseObjective(samples, actuals, insample, m, scale)
    n = objective.n
    if strategy == "unconstrained":
        params = dataclasses.replace(pso, bounds=None, init_range=pso.init_range or (-1.0, 2.0))
    elif strategy in ("box01", "convex"):
        params = dataclasses.replace(pso, bounds=(np.zeros(n), np.ones(n)))
    else:
        raise ValueError(f"{strategy!r} is not a PSO strategy")
    best, _ = swarm.optimize(objective.batch, n, params, vectorized=True)
    if strategy == "convex":
        total = best.sum()
        if total == 0:
            raise ZeroWeightSum("cannot normalise an all-zero weight vector")
        best = best / total
    return WeightVector(best, strategy)


def average_weights(n: int) -> WeightVector:
    if n < 1:
        raise ValueError("n must be positive")
    return WeightVector(np.full(n, 1.0 / n), "average")


@dataclass
class RecursiveTrace:
    candidates: list
    errors: list
    coefficient_matrices: list


def fit_weights_recursive(
    samples, actuals, insample, m: int, threshold: float, max_iterations: int = 50, scale=None, trace: RecursiveTrace | None = None
) -> WeightVector:
    """Recursive ensemble: repeatedly swap the worst model for the mean of the others.

    Row i of the coefficient matrix expresses current model i over the
    original base columns; each iteration's candidate is the uniform average of
    the current models.
    """
    if threshold <= 0 or max_iterations < 1:
        raise ValueError("threshold and max_iterations must be positive")
    objective = MaseObjective(samples, actuals, insample, m, scale)
    n = objective.n
    if n < 2:
        raise ValueError("the recursive ensemble needs at least two base forecasters")
    C = np.eye(n)
    best_w, best_err = None, np.inf
    prev_best = None
    for _ in range(max_iterations):
        model_err = objective.batch(C)
        w = C.T @ np.full(n, 1.0 / n)
        err = objective(w)
        if trace is not None:
            trace.candidates.append(w.copy())
            trace.errors.append(err)
            trace.coefficient_matrices.append(C.copy())
        if err < best_err:
            best_w, best_err = w, err
        if prev_best is not None and prev_best - best_err < threshold:
            break
        prev_best = best_err
        worst = int(np.argmax(model_err))
        others = np.delete(np.arange(n), worst)
        C = C.copy()
        C[worst] = C[others].mean(axis=0)
    return WeightVector(best_w, "recursive")

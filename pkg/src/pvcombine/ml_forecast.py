"""Weather-driven regressors: multiple linear regression and epsilon-SVR.

The SVR dual is solved with an SMO-type decomposition over the 2N variables
(alpha, alpha*), selecting working pairs by second-order gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonConvergence, RankDeficient


@dataclass(frozen=True)
class DesignMatrix:
    rows: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.rows, dtype=float))
        y = np.asarray(self.targets, dtype=float).reshape(-1)
        if len(X) != len(y):
            raise DimensionMismatch(f"{len(X)} rows vs {len(y)} targets")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("design matrix contains non-finite values")
        object.__setattr__(self, "rows", X)
        object.__setattr__(self, "targets", y)


def _rows(features, width):
    F = np.asarray(features, dtype=float)
    if F.ndim == 1:
        F = F[None, :] if width > 1 or F.size == 1 else F[:, None]
    if F.shape[1] != width:
        raise DimensionMismatch(f"expected {width} feature columns, got {F.shape[1]}")
    return F


# ---------------------------------------------------------------- MLR


def fit_mlr(X: DesignMatrix) -> np.ndarray:
    """OLS coefficients [intercept, slope_1, ..., slope_r]."""
    A = np.column_stack((np.ones(len(X.rows)), X.rows))
    n, k = A.shape
    if n <= k:
        raise RankDeficient(f"{n} rows cannot identify {k} coefficients")
    if np.linalg.matrix_rank(A) < k:
        raise RankDeficient("design matrix with intercept is rank deficient")
    coef, *_ = np.linalg.lstsq(A, X.targets, rcond=None)
    return coef


def predict_mlr(coefficients, features, clamp: bool = True) -> np.ndarray:
    coef = np.asarray(coefficients, dtype=float)
    F = _rows(features, len(coef) - 1)
    out = coef[0] + F @ coef[1:]
    return np.maximum(out, 0.0) if clamp else out


# ---------------------------------------------------------------- SVR


@dataclass(frozen=True, eq=False)
class SvrModel:
    support_vectors: np.ndarray
    dual_coefficients: np.ndarray
    bias: float
    gamma: float
    epsilon: float
    C: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    iterations: int = 0
    support_indices: np.ndarray | None = None  # training rows of the support vectors

    @property
    def n_features(self) -> int:
        return len(self.feature_mean)


def rbf_kernel(A, B, gamma):
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _standardize(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def svr_dual_objective(K, y, beta, epsilon):
    """Objective of the 2N-variable dual for beta = [alpha, alpha*] (to minimise)."""
    n = len(y)
    coef = beta[:n] - beta[n:]
    return 0.5 * coef @ K @ coef + epsilon * beta.sum() - y @ coef


def fit_svr(
    X: DesignMatrix,
    gamma: float,
    epsilon: float,
    C: float = 1.0,
    tol: float = 1e-3,
    max_iter: int = 100_000,
) -> SvrModel:
    if gamma <= 0 or C <= 0 or epsilon < 0:
        raise ValueError("gamma and C must be positive, epsilon non-negative")
    rows, y = X.rows, X.targets
    n = len(y)
    if n < 2:
        raise ValueError("SVR needs at least two rows")
    mean, scale = _standardize(rows)
    Z = (rows - mean) / scale
    K = rbf_kernel(Z, Z, gamma)
    beta, rho, iters = _smo(K, y, epsilon, C, tol, max_iter)
    coef = beta[:n] - beta[n:]
    sv = np.flatnonzero(coef != 0)
    return SvrModel(
        support_vectors=Z[sv],
        dual_coefficients=coef[sv],
        bias=-rho,
        gamma=gamma,
        epsilon=epsilon,
        C=C,
        feature_mean=mean,
        feature_scale=scale,
        iterations=iters,
        support_indices=sv,
    )


def _smo(K, y, epsilon, C, tol, max_iter):
    """Minimise 1/2 b'Qb + p'b s.t. s'b = 0, 0 <= b <= C.

    b = [alpha, alpha*], s = [+1.., -1..], p = [eps - y, eps + y] and
    Q_tu = s_t s_u K(x_t, x_u). Returns (b, rho, iterations).
    """
    n = len(y)
    s = np.r_[np.ones(n), -np.ones(n)]
    p = np.r_[epsilon - y, epsilon + y]
    idx = np.r_[np.arange(n), np.arange(n)]
    diag = np.diag(K)[idx]
    beta = np.zeros(2 * n)
    grad = p.copy()
    it = 0
    while True:
        up = np.where(s > 0, beta < C, beta > 0)
        low = np.where(s > 0, beta > 0, beta < C)
        score = -s * grad
        gmax = score[up].max() if up.any() else -np.inf
        gmin = score[low].min() if low.any() else np.inf
        if gmax - gmin < tol:
            break
        if it >= max_iter:
            raise NonConvergence(f"SMO did not reach KKT tolerance {tol} in {max_iter} iterations")
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        Ki = K[idx[i]][idx]
        cand = np.flatnonzero(low & (score < gmax))
        gain_b = gmax - score[cand]
        curv = diag[i] + diag[cand] - 2 * Ki[cand]
        curv = np.where(curv > 0, curv, _TAU)
        j = int(cand[np.argmax(gain_b * gain_b / curv)])
        _update_pair(i, j, beta, grad, s, K, idx, diag, C)
        it += 1
    sg = s * grad
    free = (beta > 0) & (beta < C)
    if free.any():
        rho = float(sg[free].mean())
    else:
        at_upper = beta >= C
        # bounds on rho implied by variables sitting at either box edge
        to_ub = np.where(at_upper, s < 0, s > 0)
        ub = sg[to_ub].min() if to_ub.any() else np.inf
        lb = sg[~to_ub].max() if (~to_ub).any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub + lb) else float(ub if np.isfinite(ub) else lb)
    return beta, rho, it


_TAU = 1e-12


def _update_pair(i, j, beta, grad, s, K, idx, diag, C):
    quad = diag[i] + diag[j] - 2 * K[idx[i], idx[j]]
    if quad <= 0:
        quad = _TAU
    bi, bj = beta[i], beta[j]
    if s[i] != s[j]:
        delta = (-grad[i] - grad[j]) / quad
        diff = bi - bj
        bi += delta
        bj += delta
        if diff > 0:
            if bj < 0:
                bj, bi = 0.0, diff
            if bi > C:
                bi, bj = C, C - diff
        else:
            if bi < 0:
                bi, bj = 0.0, -diff
            if bj > C:
                bj, bi = C, C + diff
    else:
        delta = (grad[i] - grad[j]) / quad
        total = bi + bj
        bi -= delta
        bj += delta
        if total > C:
            if bi > C:
                bi, bj = C, total - C
            if bj > C:
                bj, bi = C, total - C
        else:
            if bj < 0:
                bj, bi = 0.0, total
            if bi < 0:
                bi, bj = 0.0, total
    di, dj = bi - beta[i], bj - beta[j]
    beta[i], beta[j] = bi, bj
    grad += s * (s[i] * di * K[idx[i]][idx] + s[j] * dj * K[idx[j]][idx])


def predict_svr(model: SvrModel, features, clamp: bool = True) -> np.ndarray:
    F = _rows(features, model.n_features)
    Z = (F - model.feature_mean) / model.feature_scale
    if len(model.dual_coefficients) == 0:
        out = np.full(len(Z), model.bias)
    else:
        out = rbf_kernel(Z, model.support_vectors, model.gamma) @ model.dual_coefficients + model.bias
    return np.maximum(out, 0.0) if clamp else out

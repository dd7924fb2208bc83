"""(Seasonal) ARIMA with regression errors, fitted by conditional sum of squares.

The differenced series w is modelled as w_t = x'_t beta + r_t with

    Phi(B) r_t = c + Theta(B) e_t

where Phi/Theta are products of the non-seasonal and seasonal polynomials.
AR and MA coefficients are optimised through the partial-autocorrelation
reparametrisation so every fitted model is stationary and invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import lfilter

from ..errors import (
    InsufficientLength,
    MissingExogenous,
    NonConvergence,
    SingularDesign,
)
from .differencing import difference, difference_columns, undifference_batch


@dataclass(frozen=True, order=True)
class ArimaOrder:
    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    m: int = 1

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.d + self.D > 3 or self.p > 5 or self.q > 5 or self.P > 2 or self.Q > 2:
            raise ValueError(f"order {self} outside the search box")

    @property
    def ar_lags(self) -> int:
        return self.p + self.P * self.m

    @property
    def ma_lags(self) -> int:
        return self.q + self.Q * self.m

    @property
    def diff_lags(self) -> int:
        return self.d + self.D * self.m

    def __str__(self):
        s = f"({self.p},{self.d},{self.q})"
        if self.P or self.D or self.Q:
            s += f"({self.P},{self.D},{self.Q})[{self.m}]"
        return s


@dataclass(frozen=True)
class FourierSpec:
    """Harmonic regressors appended to the exogenous columns.

    `phase` is the seasonal position of absolute index 0.
    """

    m: int
    K: int
    phase: int = 0

    def columns(self, t_start: int, length: int) -> np.ndarray:
        from .auto import fourier_terms

        return fourier_terms(t_start + self.phase, length, self.m, self.K)


@dataclass(frozen=True, eq=False)
class ArimaModel:
    order: ArimaOrder
    phi: np.ndarray
    theta: np.ndarray
    seasonal_phi: np.ndarray
    seasonal_theta: np.ndarray
    c: float
    beta: np.ndarray
    sigma2: float
    residuals: np.ndarray
    include_constant: bool
    nobs: int
    css: float
    # tails needed to continue the recursion past the end of training
    y_tail: np.ndarray
    r_tail: np.ndarray
    e_tail: np.ndarray
    x_tail: np.ndarray
    t_start: int = 0
    t_end: int = 0
    fourier: FourierSpec | None = None
    exog_names: tuple = field(default=())

    @property
    def n_exog(self) -> int:
        """Exogenous columns the caller must supply (Fourier columns excluded)."""
        return len(self.beta) - (2 * self.fourier.K if self.fourier else 0)

    @property
    def n_params(self) -> int:
        o = self.order
        return o.p + o.q + o.P + o.Q + int(self.include_constant) + len(self.beta) + 1

    @property
    def n_diffed(self) -> int:
        """Length of the differenced series; shared by all orders with equal (d, D)."""
        return self.nobs + self.order.ar_lags

    @property
    def loglik(self) -> float:
        # scaled to the differenced length so different AR orders stay comparable
        return -0.5 * self.n_diffed * (np.log(2 * np.pi * self.sigma2) + 1.0)

    @property
    def aicc(self) -> float:
        k, n = self.n_params, self.n_diffed
        if n - k - 1 <= 0:
            return np.inf
        return -2 * self.loglik + 2 * k + 2 * k * (k + 1) / (n - k - 1)

    def ar_polynomial(self) -> np.ndarray:
        return _ar_poly(self.phi, self.seasonal_phi, self.order.m)

    def ma_polynomial(self) -> np.ndarray:
        return _ma_poly(self.theta, self.seasonal_theta, self.order.m)


# ---------------------------------------------------------------- polynomials


def _ar_poly(phi, sphi, m):
    """Coefficients of Phi(B) = (1 - sum phi_i B^i)(1 - sum Phi_j B^{jm})."""
    a = np.concatenate(([1.0], -np.asarray(phi, float)))
    s = np.zeros(len(sphi) * m + 1)
    s[0] = 1.0
    s[m::m] = -np.asarray(sphi, float)
    return np.convolve(a, s)


def _ma_poly(theta, stheta, m):
    b = np.concatenate(([1.0], np.asarray(theta, float)))
    s = np.zeros(len(stheta) * m + 1)
    s[0] = 1.0
    s[m::m] = np.asarray(stheta, float)
    return np.convolve(b, s)


def _pacf_to_ar(u):
    """Map partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    phi = np.zeros(0)
    for k, uk in enumerate(u):
        phi = np.concatenate((phi - uk * phi[::-1], [uk]))
    return phi


def _ar_to_pacf(phi):
    phi = np.array(phi, dtype=float)
    u = np.zeros(len(phi))
    for k in range(len(phi) - 1, -1, -1):
        uk = phi[k]
        if abs(uk) >= 1:
            raise ValueError("non-stationary")
        u[k] = uk
        if k:
            phi = (phi[:k] + uk * phi[:k][::-1]) / (1 - uk * uk)
    return u


def _to_raw(phi):
    """Inverse of the tanh/PACF transform; None when phi is not stationary."""
    try:
        u = _ar_to_pacf(phi)
    except ValueError:
        return None
    return np.arctanh(np.clip(u, -0.98, 0.98))


def is_stationary(poly: np.ndarray, tol: float = 1e-8) -> bool:
    """True if every root of the lag polynomial lies outside the unit circle."""
    poly = np.trim_zeros(np.asarray(poly, float), "b")
    if len(poly) <= 1:
        return True
    roots = np.roots(poly[::-1])
    return bool(np.all(np.abs(roots) > 1 + tol))


# ---------------------------------------------------------------- CSS core


class _Layout:
    """Bookkeeping for the packed parameter vector."""

    def __init__(self, order: ArimaOrder, include_constant: bool, r: int):
        self.order = order
        self.include_constant = include_constant
        self.r = r
        o = order
        sizes = [o.p, o.q, o.P, o.Q, int(include_constant), r]
        self.bounds = np.cumsum([0] + sizes)
        self.size = int(self.bounds[-1])

    def split(self, x):
        b = self.bounds
        parts = [x[b[i] : b[i + 1]] for i in range(6)]
        phi = _pacf_to_ar(np.tanh(parts[0]))
        theta = -_pacf_to_ar(np.tanh(parts[1]))
        sphi = _pacf_to_ar(np.tanh(parts[2]))
        stheta = -_pacf_to_ar(np.tanh(parts[3]))
        c = float(parts[4][0]) if self.include_constant else 0.0
        return phi, theta, sphi, stheta, c, parts[5]

    def pack(self, phi, theta, sphi, stheta, c, beta):
        raws = [_to_raw(phi), _to_raw(-np.asarray(theta)), _to_raw(sphi), _to_raw(-np.asarray(stheta))]
        if any(r is None for r in raws):
            return None
        const = [c] if self.include_constant else []
        return np.concatenate(raws + [np.asarray(const, float), np.asarray(beta, float)])


def css_residuals(w, X, phi, theta, sphi, stheta, c, beta, m):
    """Conditional residuals e_t, t >= AR lag count, with pre-sample errors zero."""
    r = w - X @ beta if X is not None and X.shape[1] else w
    a = _ar_poly(phi, sphi, m)
    b = _ma_poly(theta, stheta, m)
    v = np.convolve(r, a, mode="valid") - c
    if len(b) == 1:
        return v, r
    return lfilter([1.0], b, v), r


def _design(w, X, include_constant):
    cols = []
    if include_constant:
        cols.append(np.ones(len(w)))
    if X is not None and X.shape[1]:
        cols.append(X)
    if not cols:
        return None
    return np.column_stack(cols)


def _check_design(w, X, include_constant):
    Z = _design(w, X, include_constant)
    if Z is None:
        return
    if np.linalg.matrix_rank(Z) < Z.shape[1]:
        raise SingularDesign("exogenous design matrix is rank deficient")


def _ols_start(w, X, include_constant):
    Z = _design(w, X, include_constant)
    if Z is None:
        return 0.0, np.zeros(0), w
    coef, *_ = np.linalg.lstsq(Z, w, rcond=None)
    mu = float(coef[0]) if include_constant else 0.0
    beta = coef[1:] if include_constant else coef
    return mu, beta, w - Z @ coef


def _hannan_rissanen(u, p, q):
    """Two-stage regression estimates for a zero-mean ARMA(p, q)."""
    n = len(u)
    if p == 0 and q == 0:
        return np.zeros(0), np.zeros(0)
    if q == 0:
        long_ar = p
    else:
        long_ar = min(max(p, q) + 10, max(n // 4, 1))
    if n <= 3 * (long_ar + p + q) + 10:
        return None
    lagged = np.column_stack([u[long_ar - i - 1 : n - i - 1] for i in range(long_ar)])
    coef, *_ = np.linalg.lstsq(lagged, u[long_ar:], rcond=None)
    if q == 0:
        return coef[:p], np.zeros(0)
    eps = np.zeros(n)
    eps[long_ar:] = u[long_ar:] - lagged @ coef
    start = long_ar + max(p, q)
    cols = [u[start - i - 1 : n - i - 1] for i in range(p)]
    cols += [eps[start - j - 1 : n - j - 1] for j in range(q)]
    coef2, *_ = np.linalg.lstsq(np.column_stack(cols), u[start:], rcond=None)
    return coef2[:p], coef2[p:]


def _min_length(order: ArimaOrder, r: int) -> int:
    return order.diff_lags + max(order.ar_lags, order.ma_lags) + r + 1


def fit_arima(
    y,
    order: ArimaOrder,
    exog=None,
    include_constant: bool | None = None,
    fourier: FourierSpec | None = None,
    t_start: int = 0,
    max_nfev: int = 2000,
    tol: float = 1e-8,
) -> ArimaModel:
    """CSS fit of an (S)ARIMA(X) model.

    `exog` is (n, r) and enters as regression with ARIMA errors. When
    `fourier` is given its harmonic columns (evaluated at absolute indices
    t_start .. t_start + n - 1) are appended to `exog`. The constant is kept
    when d + D <= 1 unless overridden.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    X = _full_exog(exog, fourier, t_start, n)
    r = 0 if X is None else X.shape[1]
    if n <= _min_length(order, r):
        raise InsufficientLength(f"{n} observations cannot support {order} with {r} regressors")
    if include_constant is None:
        include_constant = order.d + order.D <= 1
    m = order.m
    w = difference(y, order.d, order.D, m)
    Xd = None if X is None else difference_columns(X, order.d, order.D, m)
    _check_design(w, Xd, include_constant)

    layout = _Layout(order, include_constant, r)
    mu, beta0, u = _ols_start(w, Xd, include_constant)

    starts = []
    zero = layout.pack(np.zeros(order.p), np.zeros(order.q), np.zeros(order.P), np.zeros(order.Q), mu, beta0)
    starts.append(zero)
    hr = _hannan_rissanen(u, order.p, order.q) if (order.p or order.q) else None
    if hr is not None:
        phi0, theta0 = hr
        c0 = mu * (1 - np.sum(phi0))
        x_hr = layout.pack(phi0, theta0, np.zeros(order.P), np.zeros(order.Q), c0, beta0)
        if x_hr is not None:
            starts.append(x_hr)

    def resid(x):
        e, _ = css_residuals(w, Xd, *layout.split(x), m)
        return e

    best = None
    for x0 in starts:
        if layout.size == 0:
            best = x0
            break
        try:
            with np.errstate(all="ignore"):
                sol = least_squares(resid, x0, method="lm", xtol=tol, ftol=tol, max_nfev=max_nfev)
        except (ValueError, np.linalg.LinAlgError):
            continue
        if not np.all(np.isfinite(sol.x)) or not np.isfinite(sol.cost):
            continue
        if best is None or sol.cost < best[1]:
            best = (sol.x, sol.cost)
    if best is None:
        raise NonConvergence(f"CSS optimisation failed for {order}")
    x = best if layout.size == 0 else best[0]
    phi, theta, sphi, stheta, c, beta = layout.split(x)
    model = build_model(
        order, y, exog=exog, phi=phi, theta=theta, seasonal_phi=sphi, seasonal_theta=stheta,
        c=c, beta=beta, include_constant=include_constant, fourier=fourier, t_start=t_start,
    )
    if not (is_stationary(model.ar_polynomial()) and is_stationary(model.ma_polynomial())):
        raise NonConvergence(f"fitted {order} lies on the stationarity/invertibility boundary")
    if not (np.isfinite(model.sigma2) and model.sigma2 > 0):
        raise NonConvergence(f"degenerate innovation variance for {order}")
    return model


def _full_exog(exog, fourier, t_start, n):
    cols = []
    if exog is not None:
        X = np.asarray(exog, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if len(X) != n:
            raise ValueError(f"exog has {len(X)} rows, expected {n}")
        if X.shape[1]:
            cols.append(X)
    if fourier is not None:
        cols.append(fourier.columns(t_start, n))
    return np.column_stack(cols) if cols else None


def build_model(
    order: ArimaOrder,
    y,
    exog=None,
    phi=(),
    theta=(),
    seasonal_phi=(),
    seasonal_theta=(),
    c: float = 0.0,
    beta=(),
    include_constant: bool = True,
    fourier: FourierSpec | None = None,
    t_start: int = 0,
) -> ArimaModel:
    """Assemble a model from given coefficients and its training data."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    X = _full_exog(exog, fourier, t_start, n)
    beta = np.asarray(beta, dtype=float).reshape(-1)
    r = 0 if X is None else X.shape[1]
    if len(beta) != r:
        raise ValueError(f"beta has {len(beta)} entries for {r} regressors")
    m = order.m
    w = difference(y, order.d, order.D, m)
    Xd = None if X is None else difference_columns(X, order.d, order.D, m)
    phi, theta = np.asarray(phi, float), np.asarray(theta, float)
    sphi, stheta = np.asarray(seasonal_phi, float), np.asarray(seasonal_theta, float)
    e, rr = css_residuals(w, Xd, phi, theta, sphi, stheta, c, beta, m)
    css = float(e @ e)
    nobs = len(e)
    sigma2 = css / nobs if nobs else np.nan
    L = order.diff_lags
    return ArimaModel(
        order=order, phi=phi, theta=theta, seasonal_phi=sphi, seasonal_theta=stheta,
        c=float(c), beta=beta, sigma2=sigma2, residuals=e, include_constant=include_constant,
        nobs=nobs, css=css,
        y_tail=y[n - L :] if L else y[:0],
        r_tail=rr[len(rr) - order.ar_lags :] if order.ar_lags else rr[:0],
        e_tail=_left_pad(e, order.ma_lags),
        x_tail=(X[n - L :] if L else X[:0]) if X is not None else np.zeros((0, 0)),
        t_start=t_start, t_end=t_start + n, fourier=fourier,
    )


def _left_pad(x, size):
    if size == 0:
        return x[:0]
    tail = x[max(len(x) - size, 0) :]
    return np.concatenate((np.zeros(size - len(tail)), tail))


# ---------------------------------------------------------------- forecasting


def _arma_recursion(r_hist, e_hist, ar_poly, ma_poly, c, h):
    """Iterate r_t = c + sum a_i r_{t-i} + sum b_j e_{t-j}, future e = 0.

    r_hist is (k, ar_lags), e_hist is (k, ma_lags).
    """
    k = r_hist.shape[0]
    a = -ar_poly[1:]
    b = ma_poly[1:]
    p, q = len(a), len(b)
    r_ext = np.concatenate((r_hist, np.zeros((k, h))), axis=1)
    e_ext = np.concatenate((e_hist, np.zeros((k, h))), axis=1)
    a_nz = np.flatnonzero(a)
    b_nz = np.flatnonzero(b)
    for j in range(h):
        acc = np.full(k, c)
        for i in a_nz:
            acc = acc + a[i] * r_ext[:, p + j - 1 - i]
        for i in b_nz:
            acc = acc + b[i] * e_ext[:, q + j - 1 - i]
        r_ext[:, p + j] = acc
    return r_ext[:, p:]


def forecast_arima(model: ArimaModel, h: int, exog_future=None) -> np.ndarray:
    """h-step forecasts continuing from the end of the training data."""
    if h < 1:
        raise ValueError("h must be positive")
    o = model.order
    Xf = _future_exog(model, exog_future, h)
    r_hat = _arma_recursion(
        model.r_tail[None, :], model.e_tail[None, :], model.ar_polynomial(), model.ma_polynomial(), model.c, h
    )
    w_hat = r_hat[0]
    if Xf is not None:
        Xall = np.concatenate((model.x_tail, Xf)) if o.diff_lags else Xf
        Xd = difference_columns(Xall, o.d, o.D, o.m)
        w_hat = w_hat + Xd @ model.beta
    return undifference_batch(w_hat[None, :], model.y_tail[None, :], o.d, o.D, o.m)[0]


def _future_exog(model, exog_future, h):
    n_user = model.n_exog
    if n_user:
        if exog_future is None:
            raise MissingExogenous(f"model needs {n_user} exogenous columns for the forecast horizon")
        Xf = np.asarray(exog_future, dtype=float)
        if Xf.ndim == 1:
            Xf = Xf[:, None]
        if Xf.shape != (h, n_user):
            raise MissingExogenous(f"exog_future must have shape {(h, n_user)}, got {Xf.shape}")
    else:
        Xf = None
    if model.fourier is not None:
        F = model.fourier.columns(model.t_end, h)
        Xf = F if Xf is None else np.column_stack((Xf, F))
    return Xf


def forecast_rolling(model: ArimaModel, y, cutoffs, h: int, exog=None) -> np.ndarray:
    """Forecasts for many origins with fixed parameters and rolling history.

    `y` and `exog` are indexed in the same absolute positions used at fit
    time (the model was trained on y[model.t_start:model.t_end]). Row i of
    the result forecasts y[cutoffs[i] : cutoffs[i] + h] and depends only on
    y[:cutoffs[i]] plus exogenous values up to cutoffs[i] + h.
    """
    o = model.order
    y = np.asarray(y, dtype=float)
    cutoffs = np.asarray(cutoffs, dtype=int)
    if len(cutoffs) == 0:
        return np.zeros((0, h))
    t0 = model.t_start
    last = int(cutoffs.max())
    if cutoffs.min() - t0 < o.diff_lags + o.ar_lags:
        raise InsufficientLength("a cutoff precedes the end of the model's burn-in")
    hist = y[t0:last]
    if np.isnan(hist).any():
        raise ValueError("history contains missing values")
    n_user = model.n_exog
    if n_user and exog is None:
        raise MissingExogenous("model needs exogenous columns")
    span = last + h - t0
    X = None
    if n_user or model.fourier is not None:
        parts = []
        if n_user:
            E = np.asarray(exog, dtype=float)
            if E.ndim == 1:
                E = E[:, None]
            if len(E) < last + h:
                raise MissingExogenous("exogenous data does not cover the forecast horizon")
            parts.append(E[t0 : last + h])
        if model.fourier is not None:
            parts.append(model.fourier.columns(t0, span))
        X = np.column_stack(parts)
    w = difference(hist, o.d, o.D, o.m)
    Xd = None if X is None else difference_columns(X, o.d, o.D, o.m)
    Xd_hist = None if Xd is None else Xd[: len(w)]
    e, r = css_residuals(
        w, Xd_hist, model.phi, model.theta, model.seasonal_phi, model.seasonal_theta, model.c, model.beta, o.m
    )
    # index of the first forecast in w/r coordinates; e is shifted by ar_lags
    pos = cutoffs - t0 - o.diff_lags
    r_idx = pos[:, None] + np.arange(-o.ar_lags, 0)[None, :]
    e_idx = pos[:, None] - o.ar_lags + np.arange(-o.ma_lags, 0)[None, :]
    e_hist = np.where(e_idx >= 0, e[np.clip(e_idx, 0, None)], 0.0) if o.ma_lags else np.zeros((len(pos), 0))
    r_hat = _arma_recursion(r[r_idx], e_hist, model.ar_polynomial(), model.ma_polynomial(), model.c, h)
    if Xd is not None:
        f_idx = pos[:, None] + np.arange(h)[None, :]
        r_hat = r_hat + Xd[f_idx] @ model.beta
    L = o.diff_lags
    if L:
        y_hist = y[cutoffs[:, None] + np.arange(-L, 0)[None, :]]
    else:
        y_hist = np.zeros((len(cutoffs), 0))
    return undifference_batch(r_hat, y_hist, o.d, o.D, o.m)

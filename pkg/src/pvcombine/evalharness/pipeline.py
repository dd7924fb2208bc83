"""Per-house evaluation: base forecasts, weight fitting, blending and scoring."""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import zlib
from collections import OrderedDict
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np

from .. import combine
from ..combine import BASE_METHODS, WeightVector
from ..errors import NonConvergence, PvCombineError
from ..metrics import mase_scale, sample_mase
from ..ml_forecast import DesignMatrix, fit_mlr, fit_svr, predict_mlr, predict_svr
from ..series import DAY, FIVE_MINUTES, HOUR, MINUTE, Resolution, TimeSeries, WeatherFrame, duration_label, resample, seasonal_period
from ..stat_forecast import SearchConfig, fit_high_resolution_arima, forecast_rolling, seasonal_naive_at
from ..swarm import PsoParams
from ..tuning import SearchSpace, pso_space, random_search, re_space, svr_space
from .splits import make_splits, sample_cutoffs

log = logging.getLogger(__name__)

COMBINED_METHODS = ("PSO-unconstrained", "PSO-box01", "PSO-convex", "Average", "RE")
METHODS = BASE_METHODS + COMBINED_METHODS
# method id -> weight strategy tag
STRATEGY_OF = {
    "PSO-unconstrained": "unconstrained",
    "PSO-box01": "box01",
    "PSO-convex": "convex",
    "Average": "average",
    "RE": "recursive",
}

DEFAULT_PAIRS = (
    (DAY, timedelta(days=3)),
    (HOUR, timedelta(days=1)),
    (FIVE_MINUTES, timedelta(hours=1)),
    (MINUTE, timedelta(minutes=5)),
)


def pair_label(res: Resolution, horizon: timedelta) -> str:
    return f"{res.label}-{duration_label(horizon)}"


def parse_pair(text: str):
    res, _, horizon = text.partition("-")
    if not horizon:
        raise ValueError(f"pair {text!r} must look like '<resolution>-<horizon>'")
    res = Resolution.parse(res)
    span = Resolution.parse(horizon).step
    res.steps_per(span)
    return res, span


class LeakageDetected(AssertionError):
    """A forecast changed when data after its cutoff was perturbed."""


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    arima: SearchConfig = SearchConfig()
    svr_C: float = 1.0
    svr_max_rows: int = 1000
    svr_iterations: int = 30
    svr_space: SearchSpace = field(default_factory=svr_space)
    pso: PsoParams = PsoParams()
    pso_iterations: int = 30
    pso_space: SearchSpace | None = None
    re_iterations: int = 30
    re_max_iterations: int = 50
    re_space: SearchSpace = field(default_factory=re_space)
    leakage_checks: int = 3


@dataclass
class HouseResult:
    house_id: str
    pair: str
    mean_mase: dict
    weights: dict
    k: int
    cutoffs: np.ndarray
    actuals: np.ndarray
    forecasts: dict
    sample_mase: dict
    scale: float
    base_forecasts: np.ndarray | None = None  # raw (k, h, 5) before clamping
    leakage_checked: int = 0
    orders: dict = field(default_factory=dict)
    tuned: dict = field(default_factory=dict)

    @property
    def methods(self) -> tuple:
        return tuple(self.mean_mase)


@dataclass
class HouseFailure:
    house_id: str
    pair: str
    error: str
    message: str


# ---------------------------------------------------------------- base forecasters


def _svr_rows(stop: int, limit: int) -> np.ndarray:
    """Evenly spaced training rows, so every part of the range is represented."""
    if stop <= limit:
        return np.arange(stop)
    return np.unique(np.round(np.linspace(0, stop - 1, limit)).astype(int))


# fitted ARIMA models keyed by a digest of their inputs; seeds never reach
# these fits, so repeated runs over the same data can share them
_ARIMA_CACHE: OrderedDict = OrderedDict()
ARIMA_CACHE_SIZE = 128


def clear_fit_cache():
    _ARIMA_CACHE.clear()


def _cached_arima(train: TimeSeries, exog, config: SearchConfig, order):
    digest = hashlib.blake2b(digest_size=20)
    digest.update(np.ascontiguousarray(train.values).tobytes())
    if exog is not None:
        digest.update(np.ascontiguousarray(exog).tobytes())
    digest.update(repr((train.start, train.resolution, config, order, exog is None)).encode())
    key = digest.hexdigest()
    if key in _ARIMA_CACHE:
        _ARIMA_CACHE.move_to_end(key)
        return _ARIMA_CACHE[key]
    model = fit_high_resolution_arima(train, exog=exog, config=config, order=order)
    _ARIMA_CACHE[key] = model
    while len(_ARIMA_CACHE) > ARIMA_CACHE_SIZE:
        _ARIMA_CACHE.popitem(last=False)
    return model


class BaseForecasters:
    """The five base models fitted on y[:stop] and their batched forecasts."""

    def __init__(self, ts: TimeSeries, weather: np.ndarray, h: int, config: PipelineConfig):
        self.ts = ts
        self.y = np.asarray(ts.values, dtype=float)
        self.X = weather
        self.h = h
        self.m = seasonal_period(ts.resolution)
        self.config = config
        self.arima = {}
        self.mlr = None
        self.svr = None

    def fit(self, stop: int, orders: dict | None = None, svr_params: dict | None = None):
        train = self.ts.slice(0, stop)
        for name, use_exog in (("SARIMA", False), ("SARIMAX", True)):
            order = None if orders is None else orders[name]
            exog = self.X[:stop] if use_exog else None
            try:
                self.arima[name] = _cached_arima(train, exog, self.config.arima, order)
            except NonConvergence:
                if order is None:
                    raise
                # the reused order can hit the boundary on the longer window; search afresh
                log.info("%s order %s does not refit on %d points; searching again", name, order, stop)
                self.arima[name] = _cached_arima(train, exog, self.config.arima, None)
        self.mlr = fit_mlr(DesignMatrix(self.X[:stop], self.y[:stop]))
        self.stop = stop
        if svr_params is not None:
            self.fit_svr(svr_params)
        return self

    def fit_svr(self, params: dict):
        rows = _svr_rows(self.stop, self.config.svr_max_rows)
        self.svr = fit_svr(DesignMatrix(self.X[rows], self.y[rows]), params["gamma"], params["epsilon"], self.config.svr_C)
        return self.svr

    @property
    def orders(self) -> dict:
        return {name: model.order for name, model in self.arima.items()}

    def _rows_at(self, values, cutoffs):
        return values[np.asarray(cutoffs)[:, None] + np.arange(self.h)[None, :]]

    def forecast_one(self, name, y, cutoffs) -> np.ndarray:
        h = self.h
        if name == "SN":
            return seasonal_naive_at(y, cutoffs, self.m, h)
        if name == "SARIMA":
            return forecast_rolling(self.arima[name], y, cutoffs, h)
        if name == "SARIMAX":
            return forecast_rolling(self.arima[name], y, cutoffs, h, exog=self.X)
        if name == "MLR":
            return self._rows_at(predict_mlr(self.mlr, self.X, clamp=False), cutoffs)
        if name == "SVR":
            idx = np.asarray(cutoffs)[:, None] + np.arange(h)[None, :]
            flat = predict_svr(self.svr, self.X[idx.reshape(-1)], clamp=False)
            return flat.reshape(idx.shape)
        raise KeyError(name)

    def forecast(self, cutoffs, y=None) -> np.ndarray:
        """(k, h, 5) forecasts for samples starting at `cutoffs`."""
        y = self.y if y is None else y
        return np.stack([self.forecast_one(name, y, cutoffs) for name in BASE_METHODS], axis=-1)


def check_leakage(base: BaseForecasters, cutoffs, F, rng, checks: int) -> int:
    """Perturb everything after sampled cutoffs; their forecasts must not move."""
    if checks <= 0 or len(cutoffs) == 0:
        return 0
    picks = rng.choice(len(cutoffs), size=min(checks, len(cutoffs)), replace=False)
    for i in np.sort(picks):
        c = int(cutoffs[i])
        y = np.array(base.y)
        y[c:] = y[c:] * 3.0 + 1.0 + rng.random(len(y) - c)
        clean = base.forecast(np.array([c]))[0]
        again = base.forecast(np.array([c]), y=y)[0]
        # same call shape on both sides, so any difference at all is leakage
        if not np.array_equal(again, clean):
            raise LeakageDetected(f"forecast at cutoff {c} depends on data after the cutoff")
        # the batched path may round differently (BLAS blocking) but must agree
        if not np.allclose(clean, F[i], rtol=1e-9, atol=1e-9):
            raise LeakageDetected(f"batched forecast at cutoff {c} disagrees with the single-origin one")
    return len(picks)


# ---------------------------------------------------------------- per-house pipeline


def _seeds(seed: int, house_id: str, label: str, n: int = 6):
    ss = np.random.SeedSequence([int(seed), zlib.crc32(house_id.encode()), zlib.crc32(label.encode())])
    return [int(s) for s in ss.generate_state(n)]


def _tune_svr(base, ho_cut, A_ho, scale, config, seed):
    def evaluate(params):
        try:
            base.fit_svr(params)
        except PvCombineError:
            return np.inf
        f = np.maximum(base.forecast_one("SVR", base.y, ho_cut), 0.0)
        return float(np.mean(sample_mase(A_ho, f, scale)))

    best, _ = random_search(config.svr_space, evaluate, config.svr_iterations, seed)
    return best


def _fit_pso(F, A, scale, strategy, config, seed):
    base = dataclasses.replace(config.pso, seed=seed)
    space = config.pso_space or pso_space(base.swarm_size)
    objective = combine.MaseObjective(F, A, scale=scale)
    found = {}  # id(params) -> weights; random_search hands back the winning dict itself

    def evaluate(params):
        try:
            W = combine.fit_weights_pso(F, A, None, 1, strategy, dataclasses.replace(base, **params), scale=scale)
        except PvCombineError:
            return np.inf
        found[id(params)] = W
        return objective(W.w)

    best, _ = random_search(space, evaluate, config.pso_iterations, seed)
    if id(best) not in found:
        raise PvCombineError(f"no PSO run succeeded for strategy {strategy}")
    return found[id(best)], best


def _fit_re(F, A, scale, config, seed):
    objective = combine.MaseObjective(F, A, scale=scale)
    found = {}

    def evaluate(params):
        W = combine.fit_weights_recursive(F, A, None, 1, params["threshold"], config.re_max_iterations, scale=scale)
        found[id(params)] = W
        return objective(W.w)

    best, _ = random_search(config.re_space, evaluate, config.re_iterations, seed)
    return found[id(best)], best


def evaluate_house(power: TimeSeries, weather: WeatherFrame, pair, config: PipelineConfig = PipelineConfig(), house_id: str = "house") -> HouseResult:
    """Run the full holdout/test protocol for one house at one resolution/horizon.

    `power` and `weather` may be at any resolution that converts to the pair's;
    both are resampled, then aligned.
    """
    res, horizon = pair
    label = pair_label(res, horizon)
    h = res.steps_per(horizon)
    ts = resample(power, res)
    wf = resample(weather, res).align_to(ts)
    X = np.asarray(wf.values, dtype=float)
    plan = make_splits(ts)
    m = seasonal_period(res)
    y = np.asarray(ts.values, dtype=float)
    scale_ho = mase_scale(y[: plan.train.stop], m)
    scale_te = mase_scale(y[: plan.holdout.stop], m)
    ho_cut = sample_cutoffs(plan.holdout, h)
    te_cut = sample_cutoffs(plan.test, h)
    A_ho = y[ho_cut[:, None] + np.arange(h)]
    A_te = y[te_cut[:, None] + np.arange(h)]
    s = _seeds(config.seed, house_id, label)

    # stage 1: fit on train, forecast the holdout samples
    stage1 = BaseForecasters(ts, X, h, config).fit(plan.train.stop)
    svr_params = _tune_svr(stage1, ho_cut, A_ho, scale_ho, config, s[0])
    stage1.fit_svr(svr_params)
    F_ho = stage1.forecast(ho_cut)

    # stage 2: combination weights from holdout forecasts
    weights = {}
    tuned = {"SVR": svr_params}
    for method, seed in zip(("PSO-unconstrained", "PSO-box01", "PSO-convex"), s[1:4]):
        W, params = _fit_pso(F_ho, A_ho, scale_ho, STRATEGY_OF[method], config, seed)
        weights[STRATEGY_OF[method]] = W
        tuned[method] = params
    weights["average"] = combine.average_weights(len(BASE_METHODS))
    weights["recursive"], tuned["RE"] = _fit_re(F_ho, A_ho, scale_ho, config, s[4])

    # stage 3: refit on train + holdout with the orders and SVR settings found above
    stage2 = BaseForecasters(ts, X, h, config).fit(plan.holdout.stop, orders=stage1.orders, svr_params=svr_params)
    F_te = stage2.forecast(te_cut)
    checked = check_leakage(stage2, te_cut, F_te, np.random.default_rng(s[5]), config.leakage_checks)

    forecasts = {}
    for j, name in enumerate(BASE_METHODS):
        forecasts[name] = np.maximum(F_te[..., j], 0.0)
    for method in COMBINED_METHODS:
        forecasts[method] = np.maximum(combine.blend(F_te, weights[STRATEGY_OF[method]]), 0.0)
    per_sample = {name: sample_mase(A_te, f, scale_te) for name, f in forecasts.items()}
    return HouseResult(
        house_id=house_id,
        pair=label,
        mean_mase={name: float(np.mean(v)) for name, v in per_sample.items()},
        weights=weights,
        k=len(te_cut),
        cutoffs=te_cut,
        actuals=A_te,
        forecasts=forecasts,
        sample_mase=per_sample,
        scale=scale_te,
        base_forecasts=F_te,
        leakage_checked=checked,
        orders={name: str(o) for name, o in stage2.orders.items()},
        tuned=tuned,
    )


def evaluate_house_safe(power, weather, pair, config=PipelineConfig(), house_id="house"):
    """evaluate_house, but failures come back as a HouseFailure with a warning."""
    try:
        return evaluate_house(power, weather, pair, config, house_id)
    except PvCombineError as exc:
        label = pair_label(*pair)
        log.warning("house %s excluded at %s: %s: %s", house_id, label, type(exc).__name__, exc)
        return HouseFailure(house_id, label, type(exc).__name__, str(exc))

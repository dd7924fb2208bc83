import dataclasses

import numpy as np
import pytest

from pvcombine import combine
from pvcombine.evalharness import (
    BaseForecasters,
    HouseFailure,
    LeakageDetected,
    PipelineConfig,
    check_leakage,
    evaluate_house,
    evaluate_house_safe,
    parse_pair,
)
from pvcombine.evalharness.pipeline import BASE_METHODS, METHODS
from pvcombine.series import TimeSeries, resample
from pvcombine.stat_forecast.auto import SearchConfig
from pvcombine.swarm import PsoParams
from pvcombine.synthetic import make_cohort

FAST = PipelineConfig(
    arima=SearchConfig(max_p=2, max_q=2, max_P=1, max_Q=1, max_models=12),
    svr_iterations=3,
    svr_max_rows=400,
    pso=PsoParams(max_iterations=60, swarm_size=20, neighbors=20),
    pso_iterations=3,
    re_iterations=3,
)
PAIR = parse_pair("1h-1d")


@pytest.fixture(scope="module")
def house():
    power, weather, locs = make_cohort(seed=3, houses={"h01": "site_a"})
    return power["h01"], weather["site_a"]


@pytest.fixture(scope="module")
def result(house):
    return evaluate_house(*house, PAIR, FAST, "h01")


def test_result_shape(result):
    assert result.pair == "1h-1d"
    assert set(result.mean_mase) == set(METHODS)
    assert result.actuals.shape == (result.k, 24)
    assert result.base_forecasts.shape == (result.k, 24, 5)
    # the last month holds at least 28 whole days
    assert result.k >= 28
    assert result.leakage_checked > 0


def test_average_equals_row_means(result):
    expected = np.maximum(result.base_forecasts.mean(axis=-1), 0.0)
    np.testing.assert_allclose(result.forecasts["Average"], expected, rtol=0, atol=1e-12)


def test_blends_replay_from_weights(result):
    for method, tag in [("PSO-unconstrained", "unconstrained"), ("PSO-box01", "box01"), ("PSO-convex", "convex"), ("RE", "recursive")]:
        w = result.weights[tag].w
        replay = np.maximum(np.einsum("khn,n->kh", result.base_forecasts, w), 0.0)
        np.testing.assert_allclose(result.forecasts[method], replay, rtol=0, atol=1e-12)


def test_per_sample_mase_replay(result):
    # loop transcription: mean absolute error over the sample divided by the scale
    for name, f in result.forecasts.items():
        for i in range(result.k):
            err = sum(abs(result.actuals[i, t] - f[i, t]) for t in range(24)) / 24
            assert result.sample_mase[name][i] == pytest.approx(err / result.scale, abs=1e-12)
        assert result.mean_mase[name] == pytest.approx(np.mean(result.sample_mase[name]), abs=1e-12)


def test_weight_constraints(result):
    assert np.all((result.weights["box01"].w >= 0) & (result.weights["box01"].w <= 1))
    assert result.weights["convex"].w.sum() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_array_equal(result.weights["average"].w, np.full(5, 0.2))


def test_forecasts_non_negative(result):
    for f in result.forecasts.values():
        assert np.all(f >= 0)


def test_same_seed_same_result(house, result):
    again = evaluate_house(*house, PAIR, FAST, "h01")
    for name in METHODS:
        np.testing.assert_array_equal(again.forecasts[name], result.forecasts[name])


def test_exact_column_wins(house, monkeypatch):
    """With one base forecaster perfect, box01 lands on it."""
    original = BaseForecasters.forecast_one

    def oracle(self, name, y, cutoffs):
        if name == "SARIMAX":
            return np.asarray(y, float)[np.asarray(cutoffs)[:, None] + np.arange(self.h)]
        return original(self, name, y, cutoffs)

    monkeypatch.setattr(BaseForecasters, "forecast_one", oracle)
    res = evaluate_house(*house, PAIR, dataclasses.replace(FAST, leakage_checks=0), "h01")
    # grid check on the test samples: no point of a coarse simplex grid beats the one-hot
    obj = combine.MaseObjective(res.base_forecasts, res.actuals, scale=res.scale)
    e = np.eye(5)[BASE_METHODS.index("SARIMAX")]
    assert obj(e) == 0.0
    rng = np.random.default_rng(0)
    assert min(obj(w) for w in rng.dirichlet(np.ones(5), 200)) > 0
    best_base = min(res.mean_mase[n] for n in BASE_METHODS)
    assert res.mean_mase["PSO-box01"] <= best_base + 1e-6


def test_leaky_forecaster_is_caught(house, monkeypatch):
    def leaky(self, cutoffs, y=None):
        y = self.y if y is None else y
        sn = self.forecast_one("SN", y, cutoffs)
        # peeks at the first value after the cutoff
        sn = sn + 1e-3 * y[np.asarray(cutoffs)][:, None]
        return np.stack([sn] * 5, axis=-1)

    monkeypatch.setattr(BaseForecasters, "forecast", leaky)
    ts = resample(house[0], PAIR[0])
    base = BaseForecasters(ts, np.zeros((len(ts), 7)), 24, FAST)
    cutoffs = np.arange(len(ts) - 24 * 30, len(ts) - 23, 24)
    F = base.forecast(cutoffs)
    with pytest.raises(LeakageDetected):
        check_leakage(base, cutoffs, F, np.random.default_rng(0), 3)


def test_honest_forecaster_passes(house, monkeypatch):
    monkeypatch.setattr(BaseForecasters, "forecast", lambda self, c, y=None: np.stack([self.forecast_one("SN", self.y if y is None else y, c)] * 5, axis=-1))
    ts = resample(house[0], PAIR[0])
    base = BaseForecasters(ts, np.zeros((len(ts), 7)), 24, FAST)
    cutoffs = np.arange(len(ts) - 24 * 30, len(ts) - 23, 24)
    assert check_leakage(base, cutoffs, base.forecast(cutoffs), np.random.default_rng(0), 3) == 3


def test_constant_power_is_excluded(house, caplog):
    power, weather = house
    flat = TimeSeries(power.start, power.resolution, np.full(len(power), 2.0))
    out = evaluate_house_safe(flat, weather, PAIR, FAST, "flat")
    assert isinstance(out, HouseFailure)
    assert out.error == "DegenerateDenominator"
    assert "flat" in caplog.text

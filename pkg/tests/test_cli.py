import json

import numpy as np
import pandas as pd
import pytest

from pvcombine.cli import main
from pvcombine.cli.config import RunConfig, load_config
from pvcombine.cli.io import ingest_power, ingest_weather, write_power_csv, write_weather_csv
from pvcombine.cli.run import OUTPUT_FILES
from pvcombine.errors import MissingThresholdExceeded, NonMonotonicTimestamps, SchemaError
from pvcombine.evalharness.pipeline import METHODS
from pvcombine.series import MINUTE
from pvcombine.synthetic import write_cohort

WEATHER_HEADER = "timestamp,wind_speed,temperature,dew_point,cloud_cover,uv_index,humidity,pressure"


def write(path, text):
    path.write_text(text)
    return path


class TestIngestPower:
    def test_three_rows(self, tmp_path):
        p = write(tmp_path / "p.csv", "timestamp,power_kw\n2021-01-01T00:00:00Z,0.5\n2021-01-01T00:01:00Z,0.7\n2021-01-01T00:02:00Z,0.6\n")
        ts = ingest_power(p)
        assert len(ts) == 3
        assert ts.resolution == MINUTE
        assert ts.start == pd.Timestamp("2021-01-01", tz="UTC")
        np.testing.assert_array_equal(ts.values, [0.5, 0.7, 0.6])

    def test_out_of_order(self, tmp_path):
        p = write(tmp_path / "p.csv", "timestamp,power_kw\n2021-01-01T00:01:00Z,0.5\n2021-01-01T00:00:00Z,0.7\n")
        with pytest.raises(NonMonotonicTimestamps):
            ingest_power(p)

    def test_two_minute_gap(self, tmp_path):
        p = write(tmp_path / "p.csv", "timestamp,power_kw\n2021-01-01T00:00:00Z,1.0\n2021-01-01T00:01:00Z,2.0\n2021-01-01T00:03:00Z,4.0\n")
        ts = ingest_power(p, max_missing_fraction=0.5)
        assert len(ts) == 4
        np.testing.assert_allclose(ts.values, [1.0, 2.0, 3.0, 4.0])

    def test_gap_over_default_threshold(self, tmp_path):
        p = write(tmp_path / "p.csv", "timestamp,power_kw\n2021-01-01T00:00:00Z,1.0\n2021-01-01T00:01:00Z,2.0\n2021-01-01T00:03:00Z,4.0\n")
        with pytest.raises(MissingThresholdExceeded):
            ingest_power(p)

    def test_wrong_header(self, tmp_path):
        p = write(tmp_path / "p.csv", "time,kw\n2021-01-01T00:00:00Z,1.0\n")
        with pytest.raises(SchemaError):
            ingest_power(p)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        p = write(tmp_path / "p.csv", "timestamp,power_kw\n" + "".join(
            f"2021-03-01T{i // 60:02d}:{i % 60:02d}:00Z,{float(v)!r}\n" for i, v in enumerate(rng.random(200) * 3)
        ))
        ts = ingest_power(p)
        write_power_csv(ts, tmp_path / "q.csv")
        again = ingest_power(tmp_path / "q.csv")
        assert again.start == ts.start and again.resolution == ts.resolution
        np.testing.assert_array_equal(again.values, ts.values)
        write_power_csv(again, tmp_path / "r.csv")
        assert (tmp_path / "q.csv").read_bytes() == (tmp_path / "r.csv").read_bytes()


def weather_rows(n, drop=None, blank=None):
    cols = WEATHER_HEADER.split(",")
    rows = []
    for i in range(n):
        vals = [f"2021-01-01T{i:02d}:00:00Z"] + [str(float(i + j)) for j in range(7)]
        if blank is not None and i == blank[0]:
            vals[cols.index(blank[1])] = ""
        rows.append(vals)
    if drop:
        k = cols.index(drop)
        cols = cols[:k] + cols[k + 1:]
        rows = [r[:k] + r[k + 1:] for r in rows]
    return ",".join(cols) + "\n" + "".join(",".join(r) + "\n" for r in rows)


class TestIngestWeather:
    def test_well_formed(self, tmp_path):
        wf = ingest_weather(write(tmp_path / "w.csv", weather_rows(5)))
        assert wf.values.shape == (5, 7)

    def test_missing_uv_index(self, tmp_path):
        with pytest.raises(SchemaError, match="uv_index"):
            ingest_weather(write(tmp_path / "w.csv", weather_rows(5, drop="uv_index")))

    def test_missing_cell_interpolated(self, tmp_path):
        wf = ingest_weather(write(tmp_path / "w.csv", weather_rows(5, blank=(2, "humidity"))))
        assert wf.values[2, 5] == pytest.approx(2.0 + 5)

    def test_round_trip(self, tmp_path):
        wf = ingest_weather(write(tmp_path / "w.csv", weather_rows(6)))
        write_weather_csv(wf, tmp_path / "x.csv")
        np.testing.assert_array_equal(ingest_weather(tmp_path / "x.csv").values, wf.values)


class TestConfig:
    def test_minimal(self, tmp_path):
        cfg = RunConfig(power_dir=tmp_path, weather={"a": tmp_path / "w.csv"}, houses={"h": "a"})
        assert cfg.pairs == ["1d-3d", "1h-1d", "5min-1h", "1min-5min"]
        assert cfg.pipeline().seed == 0

    def test_unknown_field_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            RunConfig(power_dir=tmp_path, weather={}, houses={}, colour="red")

    def test_bad_pair(self, tmp_path):
        with pytest.raises(ValueError):
            RunConfig(power_dir=tmp_path, weather={}, houses={}, pairs=["7min-1h"])

    def test_unknown_location(self, tmp_path):
        with pytest.raises(ValueError, match="nowhere"):
            RunConfig(power_dir=tmp_path, weather={}, houses={"h": "nowhere"})

    def test_missing_path(self, tmp_path):
        cfg = RunConfig(power_dir=tmp_path / "absent", weather={}, houses={})
        with pytest.raises(SchemaError):
            cfg.resolve(tmp_path)


FAST = {
    "pairs": ["1h-1d"],
    "arima": {"max_p": 2, "max_q": 2, "max_P": 1, "max_Q": 1, "max_models": 12},
    "svr": {"max_rows": 400, "iterations": 3},
    "pso": {"swarm_size": 20, "max_iterations": 60, "iterations": 3},
    "re": {"iterations": 3},
}


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    root = tmp_path_factory.mktemp("cohort")
    path = write_cohort(root, seed=1, houses={"h01": "site_a", "h04": "site_b"})
    cfg = json.loads(path.read_text())
    path.write_text(json.dumps({**cfg, **FAST}))
    return path


@pytest.fixture(scope="module")
def run_out(cohort):
    out = cohort.parent / "run1"
    assert main(["run", "--config", str(cohort), "--out", str(out)]) == 0
    return out


def test_run_outputs(run_out):
    for name in OUTPUT_FILES:
        assert (run_out / name).exists(), name
    summary = pd.read_csv(run_out / "summary.csv")
    assert list(summary.columns) == ["method", "pair", "median_mase", "rank", "final_rank"]
    assert len(summary) == 10
    assert list(summary["method"]) == list(METHODS)
    per_house = pd.read_csv(run_out / "per_house_mase.csv")
    assert list(per_house.columns) == ["house_id", "method", "pair", "mean_mase", "k"]
    assert len(per_house) == 20
    weights = pd.read_csv(run_out / "weights.csv")
    assert list(weights.columns) == ["house_id", "pair", "strategy", "w_1", "w_2", "w_3", "w_4", "w_5"]
    sig = pd.read_csv(run_out / "significance.csv")
    assert list(sig.columns) == ["method", "pair", "U", "p", "significant"]


def test_csvs_use_lf_and_six_decimals(run_out):
    text = (run_out / "summary.csv").read_bytes()
    assert b"\r" not in text
    row = text.decode().splitlines()[1].split(",")
    assert len(row[2].split(".")[1]) == 6


def test_samples_replay(run_out):
    """Recompute every per-sample MASE from the dumped samples."""
    per_house = pd.read_csv(run_out / "per_house_mase.csv")
    for house in ("h01", "h04"):
        df = pd.read_csv(run_out / "samples" / house / "1h-1d.csv")
        for method in METHODS:
            per_sample = []
            for _, g in df.groupby("sample"):
                per_sample.append(np.mean(np.abs(g["actual"] - g[method])) / g["scale"].iloc[0])
            stored = per_house[(per_house.house_id == house) & (per_house.method == method)]
            assert float(stored.mean_mase.iloc[0]) == pytest.approx(np.mean(per_sample), abs=1e-6)
            assert int(stored.k.iloc[0]) == len(per_sample)


def test_rerun_is_byte_identical(cohort, run_out):
    out = cohort.parent / "run2"
    assert main(["run", "--config", str(cohort), "--out", str(out)]) == 0
    for name in OUTPUT_FILES:
        assert (out / name).read_bytes() == (run_out / name).read_bytes(), name
    for f in (run_out / "samples").rglob("*.csv"):
        assert (out / f.relative_to(run_out)).read_bytes() == f.read_bytes()


def test_report_reaggregates(run_out, tmp_path):
    import shutil

    copy = tmp_path / "copy"
    shutil.copytree(run_out, copy)
    (copy / "summary.csv").unlink()
    assert main(["report", "--out", str(copy)]) == 0
    assert (copy / "summary.csv").read_bytes() == (run_out / "summary.csv").read_bytes()
    assert main(["report", "--out", str(copy), "--houses", "h01"]) == 0
    assert len(pd.read_csv(copy / "per_house_mase.csv")) == 10


def test_plot(run_out, tmp_path):
    import shutil

    copy = tmp_path / "copy"
    shutil.copytree(run_out, copy)
    assert main(["plot", "--out", str(copy)]) == 0
    first = (copy / "summary.svg").read_bytes()
    assert first.startswith(b"<?xml") and b"<svg" in first
    assert main(["plot", "--out", str(copy)]) == 0
    assert (copy / "summary.svg").read_bytes() == first


def test_ingest_subcommand(cohort, tmp_path, capsys):
    assert main(["ingest", "--config", str(cohort), "--out", str(tmp_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["houses"]["h01"]["points"] == 121 * 1440
    assert (tmp_path / "normalized" / "power" / "h04.csv").exists()


def test_empty_cohort(tmp_path, capsys):
    (tmp_path / "power").mkdir()
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"power_dir": "power", "weather": {}, "houses": {}}))
    assert main(["run", "--config", str(cfg)]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "EmptyCohort"


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"power_dir": "nope", "weather": {}, "houses": {}}))
    assert main(["run", "--config", str(cfg)]) == 2
    assert json.loads(capsys.readouterr().err)["status"] == "error"

"""Orchestration: house x pair jobs, report aggregation and CSV outputs."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import timedelta
from pathlib import Path

import numpy as np

from ..combine import BASE_METHODS
from ..errors import EmptyCohort
from ..evalharness import (
    METHODS,
    HouseFailure,
    HouseResult,
    aggregate_report,
    evaluate_house_safe,
    parse_pair,
)
from ..series import resample
from .config import RunConfig
from .io import ingest_power, ingest_weather

log = logging.getLogger(__name__)

OUTPUT_FILES = ("per_house_mase.csv", "summary.csv", "significance.csv", "weights.csv")
STRATEGY_ORDER = ("unconstrained", "box01", "convex", "average", "recursive")
CACHE_FILE = "results.json"


def _f(x: float) -> str:
    return f"{x:.6f}"


def _write(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)] + [",".join(r) for r in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class _Job:
    house: str
    location: str
    pair: str
    config: RunConfig


def _load_house(cfg: RunConfig, house: str, location: str):
    power = ingest_power(
        cfg.power_path(house),
        cfg.cleaning.max_missing_fraction,
        timedelta(days=cfg.cleaning.max_gap_days),
    )
    return power, ingest_weather(cfg.weather[location])


def _run_house(cfg: RunConfig, house: str, location: str, pairs: list) -> list:
    """All pairs for one house; ingest once, evaluate each pair independently."""
    from ..errors import PvCombineError

    try:
        power, weather = _load_house(cfg, house, location)
    except PvCombineError as exc:
        log.warning("house %s excluded: %s: %s", house, type(exc).__name__, exc)
        return [HouseFailure(house, p, type(exc).__name__, str(exc)) for p in pairs]
    pipeline = cfg.pipeline()
    out = []
    for label in pairs:
        res, horizon = parse_pair(label)
        out.append(evaluate_house_safe(resample(power, res), weather, (res, horizon), pipeline, house))
    return out


def _star(args):
    return _run_house(*args)


def run_cohort(cfg: RunConfig) -> list:
    houses = sorted(cfg.houses)
    if not houses:
        raise EmptyCohort("no houses selected")
    jobs = [(cfg, h, cfg.houses[h], list(cfg.pairs)) for h in houses]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(jobs))) as pool:
            nested = list(pool.map(_star, jobs))
    else:
        nested = [_star(j) for j in jobs]
    order = {p: i for i, p in enumerate(cfg.pairs)}
    flat = [r for group in nested for r in group]
    return sorted(flat, key=lambda r: (order[r.pair], r.house_id))


# ---------------------------------------------------------------- outputs


def write_samples(result: HouseResult, out: Path) -> None:
    header = ["sample", "cutoff", "step", "scale", "actual"] + list(METHODS)
    rows = []
    for i, c in enumerate(result.cutoffs):
        for j in range(result.actuals.shape[1]):
            rows.append(
                [str(i), str(int(c)), str(j + 1), repr(float(result.scale)), repr(float(result.actuals[i, j]))]
                + [repr(float(result.forecasts[m][i, j])) for m in METHODS]
            )
    _write(out / "samples" / result.house_id / f"{result.pair}.csv", header, rows)


def result_record(r: HouseResult) -> dict:
    return {
        "house_id": r.house_id,
        "pair": r.pair,
        "k": r.k,
        "mean_mase": {m: r.mean_mase[m] for m in METHODS},
        "weights": {s: [float(x) for x in r.weights[s].w] for s in STRATEGY_ORDER},
        "orders": r.orders,
        "leakage_checked": r.leakage_checked,
    }


@dataclass
class CachedResult:
    """The slice of a HouseResult that reporting needs."""

    house_id: str
    pair: str
    k: int
    mean_mase: dict
    weights: dict
    orders: dict
    leakage_checked: int = 0

    @property
    def methods(self):
        return tuple(self.mean_mase)


def _weights_of(r, strategy):
    w = r.weights[strategy]
    return np.asarray(getattr(w, "w", w), dtype=float)


def write_report(results, failures, cfg_meta: dict, out: Path) -> None:
    """Per-house, summary, significance and weights tables plus the result cache."""
    out.mkdir(parents=True, exist_ok=True)
    pairs = cfg_meta["pairs"]
    rows = [
        [r.house_id, m, r.pair, _f(r.mean_mase[m]), str(r.k)]
        for r in results
        for m in METHODS
    ]
    _write(out / "per_house_mase.csv", ["house_id", "method", "pair", "mean_mase", "k"], rows)

    rows = []
    for r in results:
        for s in STRATEGY_ORDER:
            rows.append([r.house_id, r.pair, s] + [_f(x) for x in _weights_of(r, s)])
    _write(out / "weights.csv", ["house_id", "pair", "strategy"] + [f"w_{i + 1}" for i in range(len(BASE_METHODS))], rows)

    summary_rows, sig_rows = [], []
    if results:
        report = aggregate_report(results, cfg_meta["houses"], cfg_meta.get("groups"), METHODS, pairs)
        for p in pairs:
            if p not in report.medians:
                continue
            for m in METHODS:
                summary_rows.append([m, p, _f(report.medians[p][m]), _f(report.ranks[p][m]), _f(report.final_rank[m])])
        for s in report.significance:
            sig_rows.append([s.method, s.pair, _f(s.U), _f(s.p), "true" if s.significant else "false"])
    _write(out / "summary.csv", ["method", "pair", "median_mase", "rank", "final_rank"], summary_rows)
    _write(out / "significance.csv", ["method", "pair", "U", "p", "significant"], sig_rows)
    _write(
        out / "failures.csv",
        ["house_id", "pair", "error", "message"],
        [[f.house_id, f.pair, f.error, json.dumps(f.message)] for f in failures],
    )
    cache = {
        "meta": cfg_meta,
        "results": [result_record(r) if isinstance(r, HouseResult) else r.__dict__ for r in results],
        "failures": [f.__dict__ for f in failures],
    }
    (out / CACHE_FILE).write_text(json.dumps(cache, indent=1, sort_keys=True) + "\n")


def load_cache(out: Path):
    data = json.loads((out / CACHE_FILE).read_text())
    results = [CachedResult(**r) for r in data["results"]]
    failures = [HouseFailure(**f) for f in data["failures"]]
    return results, failures, data["meta"]


def run(cfg: RunConfig) -> dict:
    """Execute the whole cohort and write every output; returns a small summary."""
    everything = run_cohort(cfg)
    results = [r for r in everything if isinstance(r, HouseResult)]
    failures = [r for r in everything if isinstance(r, HouseFailure)]
    out = cfg.output_dir
    for r in results:
        write_samples(r, out)
    meta = {"pairs": list(cfg.pairs), "houses": dict(cfg.houses), "groups": list(cfg.groups) if cfg.groups else None, "seed": cfg.seed}
    write_report(results, failures, meta, out)
    return {
        "houses": len(cfg.houses),
        "results": len(results),
        "failures": len(failures),
        "leakage_checked": sum(r.leakage_checked for r in results),
        "output_dir": str(out),
    }

"""Command-line front end: ingest, run, report and plot subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import timedelta
from pathlib import Path

from pydantic import ValidationError

from ..errors import EmptyCohort, PvCombineError
from .config import RunConfig, load_config
from .io import ingest_power, ingest_weather

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_EMPTY = 0, 1, 2, 3


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pvcombine", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (
        ("ingest", "validate and normalize the configured inputs"),
        ("run", "run the full evaluation pipeline"),
        ("report", "re-aggregate reports from cached per-house results"),
        ("plot", "write SVG charts from the report CSVs"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", type=Path, required=name in ("ingest", "run"))
        s.add_argument("--out", type=Path, help="output directory (overrides the config)")
        if name in ("ingest", "run", "report"):
            s.add_argument("--houses", type=_csv_list, help="comma-separated house ids")
        if name in ("run", "report"):
            s.add_argument("--pairs", type=_csv_list, help="comma-separated pairs such as 1h-1d")
        if name == "run":
            s.add_argument("--seed", type=int)
            s.add_argument("--jobs", type=int)
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    update = {}
    if getattr(args, "houses", None):
        unknown = sorted(set(args.houses) - set(cfg.houses))
        if unknown:
            raise PvCombineError(f"unknown house ids: {unknown}")
        update["houses"] = {h: cfg.houses[h] for h in args.houses}
    for key in ("pairs", "seed", "jobs"):
        if getattr(args, key, None) is not None:
            update[key] = getattr(args, key)
    if args.out is not None:
        update["output_dir"] = args.out.resolve()
    merged = RunConfig.model_validate({**cfg.model_dump(), **update})
    return merged.resolve(args.config.resolve().parent)


def _ingest(args) -> dict:
    from .io import write_power_csv, write_weather_csv

    cfg = _config(args)
    if not cfg.houses:
        raise EmptyCohort("no houses selected")
    norm = cfg.output_dir / "normalized"
    rows = {}
    for loc, path in sorted(cfg.weather.items()):
        wf = ingest_weather(path)
        write_weather_csv(wf, norm / "weather" / f"{loc}.csv")
    for house in sorted(cfg.houses):
        ts = ingest_power(cfg.power_path(house), cfg.cleaning.max_missing_fraction, timedelta(days=cfg.cleaning.max_gap_days))
        write_power_csv(ts, norm / "power" / f"{house}.csv")
        rows[house] = {"start": str(ts.start), "end": str(ts.end), "points": len(ts)}
    return {"houses": rows, "output_dir": str(norm)}


def _run(args) -> dict:
    from .run import run

    return run(_config(args))


def _report(args) -> dict:
    from .run import load_cache, write_report

    out = args.out
    if out is None:
        if args.config is None:
            raise PvCombineError("report needs --out or --config")
        out = _config(args).output_dir
    results, failures, meta = load_cache(out)
    if getattr(args, "houses", None):
        results = [r for r in results if r.house_id in set(args.houses)]
        failures = [f for f in failures if f.house_id in set(args.houses)]
    if getattr(args, "pairs", None):
        meta["pairs"] = [p for p in meta["pairs"] if p in set(args.pairs)]
        results = [r for r in results if r.pair in set(meta["pairs"])]
    write_report(results, failures, meta, out)
    return {"results": len(results), "output_dir": str(out)}


def _plot(args) -> dict:
    from .plot import plot_summary, plot_weights

    out = args.out if args.out is not None else _config(args).output_dir
    written = [
        str(plot_summary(out / "summary.csv", out / "summary.svg")),
        str(plot_weights(out / "weights.csv", out / "weights_box01.svg")),
    ]
    return {"written": written}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = {"ingest": _ingest, "run": _run, "report": _report, "plot": _plot}[args.command]
    try:
        summary = handler(args)
    except EmptyCohort as exc:
        return _fail(EXIT_EMPTY, exc)
    except ValidationError as exc:
        return _fail(EXIT_CONFIG, exc, "ConfigError")
    except (PvCombineError, OSError) as exc:
        return _fail(EXIT_CONFIG if type(exc).__name__ == "SchemaError" else EXIT_FAILED, exc)
    print(json.dumps({"status": "ok", "command": args.command, **summary}, sort_keys=True))
    return EXIT_OK


def _fail(code, exc, name=None) -> int:
    msg = str(exc).splitlines()[0] if str(exc) else ""
    print(json.dumps({"status": "error", "error": name or type(exc).__name__, "message": msg}), file=sys.stderr)
    return code


__all__ = ["main", "RunConfig", "load_config", "ingest_power", "ingest_weather"]

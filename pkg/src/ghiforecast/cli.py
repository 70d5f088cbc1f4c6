"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys
from pathlib import Path

from . import preprocess as pp
from .config import MODEL_KINDS, SPLIT_KINDS, load_config
from .errors import ConfigError, DataError, ForecastError, NumericError
from .fetch import default_cache_root, fetch
from .pipeline import RunManifest, emit_plot_data, run
from .surfrad import STATIONS, load_station, write_daily_files
from .synthetic import build_archive, gen_synthetic

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _csv_list(cast=str):
    def parse(text):
        return tuple(cast(v.strip()) for v in text.split(",") if v.strip())

    return parse


def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--offline", action="store_true", default=None, help="never touch the network")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghiforecast", description="Next-minute GHI forecasting on SURFRAD data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train and evaluate models")
    p.add_argument("--config", help="JSON run configuration")
    _add_common(p)
    p.add_argument("--stations", type=_csv_list(), default=None)
    p.add_argument("--train-years", type=_csv_list(int), default=None)
    p.add_argument("--validation-year", type=int, default=None)
    p.add_argument("--models", type=_csv_list(), default=None, help=f"subset of {','.join(MODEL_KINDS)}")
    p.add_argument("--xgb-preset", default=None)
    p.add_argument("--ga-generations", type=int, default=None)
    p.add_argument("--ga-population", type=int, default=None)
    p.add_argument("--ga-fit-rows", type=int, default=None, help="rows per GA fitness fit (0 = all)")
    p.add_argument("--ga-rerank", type=int, default=None, help="leaders re-scored on all rows (0 = off)")
    p.add_argument("--no-warm-start", dest="ga_warm_start", action="store_false", default=None, help="random initial GA population only")
    p.add_argument("--forest-trees", type=int, default=None)
    p.add_argument("--k-features", type=int, default=None)
    p.add_argument("--data-root", default=None)
    p.add_argument("--split", choices=SPLIT_KINDS, default=None)
    p.add_argument("--fetch", action="store_true", help="download missing archive files first")

    p = sub.add_parser("fetch", help="download SURFRAD daily files into the cache")
    p.add_argument("--stations", type=_csv_list(), default=tuple(STATIONS))
    p.add_argument("--years", type=_csv_list(int), default=(2018, 2019, 2020))
    p.add_argument("--cache", default=None, help="cache root (default: $GHIFORECAST_CACHE)")
    p.add_argument("--offline", action="store_true")

    p = sub.add_parser("stats", help="summary statistics of cleaned daytime data")
    p.add_argument("--station", default="bondville")
    p.add_argument("--years", type=_csv_list(int), default=(2018, 2019))
    p.add_argument("--data-root", default=None)
    p.add_argument("--out", default=None, help="write the table as CSV here")

    p = sub.add_parser("plot-data", help="validation actual vs predicted for one month")
    p.add_argument("manifest", help="run directory or manifest.json")
    p.add_argument("--station", default="bondville")
    p.add_argument("--month", type=int, default=5)
    p.add_argument("--out", default=None)

    p = sub.add_parser("gen-synthetic", help="write synthetic SURFRAD-format data")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=2021)
    p.add_argument("--days", type=int, default=None, help="days for a single station (default: full archive)")
    p.add_argument("--station", default=None)
    p.add_argument("--start", default="2019-05-01")
    p.add_argument("--sentinel-rate", type=float, default=0.002)
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(
        args.config,
        stations=args.stations,
        train_years=args.train_years,
        validation_year=args.validation_year,
        models=args.models,
        xgb_preset=args.xgb_preset,
        ga_generations=args.ga_generations,
        ga_population=args.ga_population,
        ga_fit_rows=args.ga_fit_rows,
        ga_rerank=args.ga_rerank,
        ga_warm_start=args.ga_warm_start,
        forest_trees=args.forest_trees,
        k_features=args.k_features,
        data_root=args.data_root,
        split=args.split,
        seed=args.seed,
        output_dir=args.out,
        offline=args.offline,
    )
    if args.fetch:
        fetch(cfg.stations, cfg.train_years + (cfg.validation_year,), cfg.data_root, offline=cfg.offline)
    manifest = run(cfg)
    if manifest.metrics_csv:
        print(manifest.path("metrics.txt").read_text(), end="")
    print(f"manifest: {manifest.root / 'manifest.json'}")
    for f in manifest.failures:
        print(f"FAILED {f['station']} at {f['stage']}: {f['type']}: {f['message']}", file=sys.stderr)
    kinds = {f["kind"] for f in manifest.failures}
    for kind, code in (("config", EXIT_CONFIG), ("data", EXIT_DATA), ("numeric", EXIT_NUMERIC)):
        if kind in kinds:
            return code
    return EXIT_OK


def _cmd_fetch(args) -> int:
    res = fetch(args.stations, args.years, args.cache or default_cache_root(), offline=args.offline)
    print(f"{len(res.paths)} files available, {len(res.downloaded)} downloaded, {len(res.skipped)} already cached")
    return EXIT_OK


def _cmd_stats(args) -> int:
    root = args.data_root or default_cache_root()
    raw = load_station(root, args.station, args.years)
    cleaned = pp.clean(raw)
    day = pp.daytime_filter(cleaned)
    stats = pp.summary_stats(day)
    print(f"rows: raw {len(raw)}, cleaned {len(cleaned)}, daytime {len(day)}")
    print(stats.to_text())
    if args.out:
        stats.to_csv(args.out)
    return EXIT_OK


def _cmd_plot(args) -> int:
    manifest = RunManifest.load(args.manifest)
    path = emit_plot_data(manifest, args.station, args.month, args.out)
    print(path)
    return EXIT_OK


def _cmd_gen(args) -> int:
    out = Path(args.out)
    if args.days is None and args.station is None:
        build_archive(out, seed=args.seed, sentinel_rate=args.sentinel_rate)
        print(f"synthetic archive written to {out}")
        return EXIT_OK
    station = args.station or "bondville"
    try:
        start = _dt.date.fromisoformat(args.start)
    except ValueError as exc:
        raise ConfigError(f"--start: {exc}") from exc
    if args.days is not None and args.days < 1:
        raise ConfigError("--days must be >= 1")
    ds = gen_synthetic(args.seed, args.days or 1, station, start=start, sentinel_rate=args.sentinel_rate)
    paths = write_daily_files(ds, out, station)
    print(f"{len(paths)} daily files written under {out}")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "fetch": _cmd_fetch, "stats": _cmd_stats, "plot-data": _cmd_plot, "gen-synthetic": _cmd_gen}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ForecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

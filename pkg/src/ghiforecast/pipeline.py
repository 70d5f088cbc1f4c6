"""End-to-end training and validation run over one or more stations.

Per station: load the training years, clean, keep the daytime window, frame
next-minute targets, split, fit normalisation and feature selection on the
training split only, train the requested models, then score them on the
test split and on the untouched validation year.
"""
from __future__ import annotations

import csv
import json
import logging
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ga
from . import preprocess as pp
from .config import RunConfig
from .errors import ConfigError, ForecastError, NoSuchMonth, NumericError
from .importance import ForestConfig, fit_forest, impurity_importance, select_top_k
from .metrics import build_comparison
from .models import fit_gbdt, fit_linear, four_xgb_presets, get_preset, predict_gbdt, predict_linear, save_model
from .surfrad import load_station

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def station_seeds(master_seed: int, station: str) -> dict[str, int]:
    """Independent seeds per station and purpose, fixed by the master seed."""
    ss = np.random.SeedSequence([int(master_seed), zlib.crc32(station.encode())])
    split, forest, ga_seed, model = (int(v) for v in ss.generate_state(4))
    return {"split": split, "forest": forest, "ga": ga_seed, "model": model}


class _Stages:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self.current = "start"

    def start(self, name: str):
        self.current = name
        self._t0 = time.perf_counter()

    def stop(self):
        self.timings[self.current] = round(time.perf_counter() - self._t0, 4)


@dataclass
class StationOutcome:
    station: str
    counts: dict = field(default_factory=dict)
    features: list = field(default_factory=list)
    importance: list = field(default_factory=list)
    models: dict = field(default_factory=dict)  # label -> relative path
    ga_best: dict | None = None
    timings: dict = field(default_factory=dict)
    error: dict | None = None


@dataclass
class RunManifest:
    config: dict
    output_dir: str
    stations: dict
    files: list
    metrics_csv: str | None
    failures: list

    @property
    def root(self) -> Path:
        return Path(self.output_dir)

    def path(self, rel: str) -> Path:
        return self.root / rel

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "output_dir": self.output_dir,
            "stations": self.stations,
            "files": sorted(self.files),
            "metrics_csv": self.metrics_csv,
            "failures": self.failures,
        }

    def write(self) -> Path:
        path = self.root / MANIFEST_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "RunManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_NAME
        d = json.loads(path.read_text())
        # resolve against the manifest's location so moved run folders still work
        d["output_dir"] = str(path.parent)
        return cls(**d)

    @property
    def ok(self) -> bool:
        return not self.failures


def _kind(exc: ForecastError) -> str:
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, NumericError):
        return "numeric"
    return "data"


def _prepare(ds, features):
    ds = pp.daytime_filter(pp.clean(ds))
    return ds, pp.make_supervised(ds, features)


def _write_predictions(path: Path, frame, preds: dict) -> None:
    keys = list(preds)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "actual", *keys])
        cols = [preds[k] for k in keys]
        for i, (ts, y) in enumerate(zip(frame.row_keys.astype(str), frame.y.tolist())):
            w.writerow([ts, repr(y), *(repr(float(c[i])) for c in cols)])


def _ga_slices(train, fit_rows: int):
    """Inner 80/20 slice of the training split for GA fitness.

    Returns the (possibly row-capped) fitting slice, the uncapped one and
    the holdout.
    """
    n = len(train)
    k = int(0.8 * n)
    full = train.take(np.arange(k))
    fit = full
    if fit_rows and k > fit_rows:
        fit = full.take(np.arange(fit_rows))
    return fit, full, train.take(np.arange(k, n))


def run_station(cfg: RunConfig, station: str, out: Path, results: list, files: list) -> StationOutcome:
    outcome = StationOutcome(station)
    stages = _Stages()
    seeds = station_seeds(cfg.seed, station)
    all_columns = list(pp.CANDIDATE_FEATURES) + list(pp.TIME_FEATURES)
    try:
        stages.start("load")
        raw = load_station(cfg.data_root, station, cfg.train_years)
        stages.stop()

        stages.start("preprocess")
        cleaned = pp.clean(raw)
        day = pp.daytime_filter(cleaned)
        stats = pp.summary_stats(day)
        rel = f"stats_{station}.csv"
        stats.to_csv(out / rel)
        files.append(rel)
        frame = pp.make_supervised(day, all_columns)
        split = pp.split_70_30 if cfg.split == "random" else (lambda f, seed: pp.split_chronological(f))
        train, test = split(frame, seeds["split"])
        norm = pp.zscore_fit(train)
        train, test = pp.zscore_apply(train, norm), pp.zscore_apply(test, norm)
        outcome.counts.update(raw=len(raw), cleaned=len(cleaned), daytime=len(day), samples=len(frame), train=len(train), test=len(test))
        stages.stop()

        stages.start("feature_selection")
        forest = fit_forest(train.select_columns(pp.CANDIDATE_FEATURES), ForestConfig(n_trees=cfg.forest_trees, seed=seeds["forest"]))
        report = impurity_importance(forest)
        rel = f"importance_{station}.csv"
        report.to_csv(out / rel)
        files.append(rel)
        top = select_top_k(report, cfg.k_features)
        features = top + [c for c in pp.TIME_FEATURES if c not in top]
        outcome.features = features
        outcome.importance = [[name, score] for name, score in report.ranked()]
        train, test = train.select_columns(features), test.select_columns(features)
        stages.stop()

        fitted = {}
        if "lr" in cfg.models:
            stages.start("train_lr")
            fitted["lr"] = ("LR", fit_linear(train), predict_linear)
            stages.stop()
        if "xgb" in cfg.models:
            stages.start("train_xgb")
            preset = get_preset(cfg.xgb_preset, seed=seeds["model"])
            fitted["xgb"] = (preset.name, fit_gbdt(train, preset), predict_gbdt)
            stages.stop()
        if "ga" in cfg.models:
            stages.start("train_ga")
            fit_slice, full_slice, holdout = _ga_slices(train, cfg.ga_fit_rows)
            ga_cfg = ga.GaConfig(population_size=cfg.ga_population, generations=cfg.ga_generations, seed=seeds["ga"])
            template = ga.make_template()
            warm = [ga.encode(template, c) for c in four_xgb_presets()] if cfg.ga_warm_start else []
            best, history = ga.evolve(template, ga_cfg, fit_slice, holdout, model_seed=seeds["model"], seeds=warm[: cfg.ga_population])
            if cfg.ga_rerank and len(full_slice) > len(fit_slice):
                # hyperparameters found on few rows need not transfer; re-check the leaders
                full_fit = ga.GbdtFitness(full_slice, holdout, seed=seeds["model"])
                best, _ = ga.rerank(ga.top_genomes(history, cfg.ga_rerank), full_fit)
            rel = f"ga_history_{station}.csv"
            history.to_csv(out / rel)
            files.append(rel)
            outcome.ga_best = best.as_dict()
            fitted["ga"] = (cfg.ga_label, fit_gbdt(train, best.decode(seeds["model"])), predict_gbdt)
            stages.stop()

        stages.start("evaluate_test")
        (out / "models").mkdir(exist_ok=True)
        for kind, (label, model, predict) in fitted.items():
            rel = f"models/{station}_{kind}.json"
            save_model(model, out / rel)
            files.append(rel)
            outcome.models[label] = rel
            results.append((station, "train-test", label, test.y, predict(model, test)))
        stages.stop()

        stages.start("validation")
        vraw = load_station(cfg.data_root, station, [cfg.validation_year])
        vday, vframe = _prepare(vraw, all_columns)
        vframe = pp.zscore_apply(vframe, norm).select_columns(features)
        outcome.counts.update(validation_raw=len(vraw), validation_daytime=len(vday), validation_samples=len(vframe))
        preds = {}
        for kind, (label, model, predict) in fitted.items():
            preds[kind] = predict(model, vframe)
            results.append((station, "validation", label, vframe.y, preds[kind]))
        rel = f"predictions_{station}.csv"
        _write_predictions(out / rel, vframe, preds)
        files.append(rel)
        stages.stop()
    except ForecastError as exc:
        log.error("station %s failed at %s: %s", station, stages.current, exc)
        outcome.error = {"stage": stages.current, "type": type(exc).__name__, "kind": _kind(exc), "message": str(exc)}
    outcome.timings = stages.timings
    return outcome


def run(cfg: RunConfig) -> RunManifest:
    """Run every configured station and write the reports and manifest.

    Station failures are recorded in the manifest rather than raised, so the
    outputs of the other stations survive.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results: list = []
    files: list = []
    stations = {}
    failures = []
    for station in cfg.stations:
        outcome = run_station(cfg, station, out, results, files)
        stations[station] = {
            "counts": outcome.counts,
            "features": outcome.features,
            "importance": outcome.importance,
            "models": outcome.models,
            "ga_best": outcome.ga_best,
            "timings": outcome.timings,
            "error": outcome.error,
        }
        if outcome.error is not None:
            failures.append({"station": station, **outcome.error})
    metrics_rel = None
    if results:
        table = build_comparison(results)
        metrics_rel = "metrics.csv"
        table.to_csv(out / metrics_rel)
        (out / "metrics.txt").write_text(table.to_text() + "\n")
        files += [metrics_rel, "metrics.txt"]
    manifest = RunManifest(cfg.to_dict(), str(out), stations, files, metrics_rel, failures)
    manifest.write()
    return manifest


def emit_plot_data(manifest: RunManifest, station: str, month: int, path=None) -> Path:
    """Validation-year actual vs predicted GHI for one calendar month."""
    info = manifest.stations.get(station)
    rel = f"predictions_{station}.csv"
    if info is None or rel not in manifest.files:
        raise NoSuchMonth(f"no validation predictions for station {station!r}")
    with manifest.path(rel).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    keep = [r for r in body if r[0] and int(r[0][5:7]) == int(month)]
    if not keep:
        raise NoSuchMonth(f"station {station} has no validation rows in month {month}")
    out_rel = f"plot_{station}_{int(month):02d}.csv"
    target = Path(path) if path is not None else manifest.path(out_rel)
    with target.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(keep)
    if path is None and out_rel not in manifest.files:
        manifest.files.append(out_rel)
        manifest.write()
    return target

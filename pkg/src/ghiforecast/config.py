"""Run configuration: a JSON document plus command-line overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .models.gbdt import four_xgb_presets
from .surfrad import STATIONS

MODEL_KINDS = ("lr", "xgb", "ga")
SPLIT_KINDS = ("random", "chronological")


@dataclass(frozen=True)
class RunConfig:
    stations: tuple[str, ...] = tuple(STATIONS)
    train_years: tuple[int, ...] = (2018, 2019)
    validation_year: int = 2020
    models: tuple[str, ...] = MODEL_KINDS
    xgb_preset: str = "XGB-100"
    ga_generations: int = 10
    ga_population: int = 16
    # rows of the GA's inner training slice used per fitness evaluation; 0 = all
    ga_fit_rows: int = 1000
    # best genomes of the capped search re-scored on the uncapped slice; 0 = off
    ga_rerank: int = 4
    # start the GA population from the fixed XGB presets
    ga_warm_start: bool = True
    forest_trees: int = 100
    seed: int = 0
    k_features: int = 8
    data_root: str = "data/synthetic"
    offline: bool = False
    output_dir: str = "runs/latest"
    split: str = "random"

    def __post_init__(self):
        for name in ("stations", "train_years", "models"):
            value = getattr(self, name)
            if isinstance(value, (str, int)):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        object.__setattr__(self, "train_years", tuple(int(y) for y in self.train_years))
        object.__setattr__(self, "models", tuple(m.lower() for m in self.models))
        object.__setattr__(self, "stations", tuple(s.lower() for s in self.stations))
        if not self.stations:
            raise ConfigError("at least one station is required")
        for s in self.stations:
            if s not in STATIONS:
                raise ConfigError(f"unknown station {s!r}; choose from {', '.join(STATIONS)}")
        if len(set(self.stations)) != len(self.stations):
            raise ConfigError("stations must not repeat")
        if not self.train_years:
            raise ConfigError("train_years must not be empty")
        if self.validation_year in self.train_years:
            raise ConfigError("validation_year must not be one of the train_years")
        if not self.models:
            raise ConfigError("at least one model is required")
        for m in self.models:
            if m not in MODEL_KINDS:
                raise ConfigError(f"unknown model {m!r}; choose from {', '.join(MODEL_KINDS)}")
        if self.xgb_preset.lower() not in {c.name.lower() for c in four_xgb_presets()}:
            names = ", ".join(c.name for c in four_xgb_presets())
            raise ConfigError(f"unknown xgb_preset {self.xgb_preset!r}; choose from {names}")
        if self.k_features < 1:
            raise ConfigError("k_features must be >= 1")
        if self.ga_generations < 0:
            raise ConfigError("ga_generations must be >= 0")
        if self.ga_population < 3:
            raise ConfigError("ga_population must be >= 3")
        if self.ga_fit_rows < 0:
            raise ConfigError("ga_fit_rows must be >= 0")
        if self.ga_rerank < 0:
            raise ConfigError("ga_rerank must be >= 0")
        if self.forest_trees < 1:
            raise ConfigError("forest_trees must be >= 1")
        if self.split not in SPLIT_KINDS:
            raise ConfigError(f"split must be one of {SPLIT_KINDS}")

    @property
    def ga_label(self) -> str:
        return f"GA-{self.ga_generations}"

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def with_overrides(self, **changes) -> "RunConfig":
        """Apply non-None overrides (flags win over the file)."""
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes) if changes else self


def load_config(path=None, **overrides) -> RunConfig:
    if path is None:
        base = RunConfig()
    else:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        base = RunConfig.from_dict(doc)
    return base.with_overrides(**overrides)


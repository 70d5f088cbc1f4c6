"""Cleaning, daytime restriction, summary statistics, supervised framing,
normalisation and the 70/30 split."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import audit
from .errors import EmptyAfterClean, FeatureMismatch, InsufficientRows
from .surfrad import MEASURED_FIELDS, StationDataset, is_sentinel

TARGET = "dw_solar"

# the fifteen variables summarised for Bondville; the selection pool
CANDIDATE_FEATURES = (
    "dt",
    "zen",
    "dw_solar",
    "diffuse",
    "dw_ir",
    "uw_dometemp",
    "uvb",
    "par",
    "netsolar",
    "totalnet",
    "temp",
    "rh",
    "windspd",
    "winddir",
    "pressure",
)
TIME_FEATURES = ("minute", "hour", "month")
MODEL_VARIABLES = CANDIDATE_FEATURES

DAY_START_HOUR = 7
DAY_END_HOUR = 16


def clean(ds: StationDataset, variables: Sequence[str] = MODEL_VARIABLES) -> StationDataset:
    """Drop every row with a sentinel, non-finite value or non-zero QC flag in
    any of ``variables``. Nothing is imputed."""
    keep = np.ones(len(ds), dtype=bool)
    for name in variables:
        v = ds.column(name)
        keep &= np.isfinite(v) & ~is_sentinel(v)
        if name in MEASURED_FIELDS:
            keep &= ds.column("qc_" + name) == 0
    if not keep.any():
        raise EmptyAfterClean(f"{ds.meta.name}: no rows survive cleaning ({len(ds)} in)")
    if keep.all():
        return ds
    return ds.select(keep)


def daytime_filter(ds: StationDataset, start_hour=DAY_START_HOUR, end_hour=DAY_END_HOUR) -> StationDataset:
    """Keep rows whose recorded hour lies in ``[start_hour, end_hour)``."""
    hour = ds.column("hour")
    keep = (hour >= start_hour) & (hour < end_hour)
    if keep.all():
        return ds
    return ds.select(keep)


# --- summary statistics ---------------------------------------------------------

STAT_NAMES = ("count", "mean", "std", "min", "25%", "50%", "75%", "max")


@dataclass(frozen=True)
class SummaryStats:
    variables: tuple[str, ...]
    table: np.ndarray  # (len(STAT_NAMES), len(variables))

    def get(self, variable: str, stat: str) -> float:
        return float(self.table[STAT_NAMES.index(stat), self.variables.index(variable)])

    def to_text(self) -> str:
        width = max(len(v) for v in self.variables) if self.variables else 8
        lines = ["variable".ljust(width) + "".join(s.rjust(11) for s in STAT_NAMES)]
        for j, var in enumerate(self.variables):
            cells = [f"{int(self.table[0, j])}".rjust(11)] + [f"{v:.2f}".rjust(11) for v in self.table[1:, j]]
            lines.append(var.ljust(width) + "".join(cells))
        return "\n".join(lines)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["stat", *self.variables])
            for i, stat in enumerate(STAT_NAMES):
                if stat == "count":
                    w.writerow([stat, *(str(int(v)) for v in self.table[i])])
                else:
                    w.writerow([stat, *(f"{v:.2f}" for v in self.table[i])])
        return path


def summary_stats(ds: StationDataset, variables: Sequence[str] = CANDIDATE_FEATURES) -> SummaryStats:
    """count/mean/std/min/quartiles/max per variable; population std and linear
    interpolation between order statistics for the quartiles."""
    out = np.full((len(STAT_NAMES), len(variables)), np.nan)
    for j, name in enumerate(variables):
        v = ds.column(name)
        out[0, j] = v.size
        if v.size == 0:
            continue
        out[1, j] = v.mean()
        out[2, j] = v.std()
        out[3, j] = v.min()
        out[4:7, j] = np.percentile(v, [25, 50, 75])
        out[7, j] = v.max()
    return SummaryStats(tuple(variables), out)


# --- supervised frames --------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    """Feature matrix with named columns, aligned target and row timestamps."""

    columns: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    row_keys: np.ndarray  # datetime64[m]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            X = X.reshape(len(self.y), -1)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64))
        object.__setattr__(self, "row_keys", np.asarray(self.row_keys, dtype="datetime64[m]"))
        if not (X.shape[0] == self.y.shape[0] == self.row_keys.shape[0]):
            raise ValueError("X, y and row_keys must have the same number of rows")
        if X.shape[1] != len(self.columns):
            raise ValueError("column names do not match X width")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(self.y))):
            raise ValueError("frame contains non-finite values")
        if np.any(is_sentinel(X)) or np.any(is_sentinel(self.y)):
            raise ValueError("frame contains sentinel values")

    def __len__(self) -> int:
        return self.y.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def years(self) -> np.ndarray:
        return self.row_keys.astype("datetime64[Y]").astype(int) + 1970

    def take(self, index) -> "Frame":
        return Frame(self.columns, self.X[index], self.y[index], self.row_keys[index])

    def select_columns(self, names: Sequence[str]) -> "Frame":
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise FeatureMismatch(f"frame has no column(s) {missing}")
        idx = [self.columns.index(n) for n in names]
        return Frame(tuple(names), self.X[:, idx], self.y, self.row_keys)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([*self.columns, "target", "timestamp"])
            keys = self.row_keys.astype(str)
            for row, target, key in zip(self.X.tolist(), self.y.tolist(), keys):
                w.writerow([*(repr(v) for v in row), repr(target), key])
        return path

    @classmethod
    def from_csv(cls, path) -> "Frame":
        with Path(path).open(newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        if header[-2:] != ["target", "timestamp"]:
            raise ValueError("frame CSV must end with target,timestamp columns")
        body = rows[1:]
        p = len(header) - 2
        X = np.array([[float(v) for v in r[:p]] for r in body], dtype=np.float64).reshape(len(body), p)
        y = np.array([float(r[p]) for r in body])
        keys = np.array([r[p + 1] for r in body], dtype="datetime64[m]")
        return cls(tuple(header[:p]), X, y, keys)


def _feature_column(ds: StationDataset, name: str) -> np.ndarray:
    return ds.column(name).astype(np.float64)


def make_supervised(ds: StationDataset, features: Sequence[str]) -> Frame:
    """Pair the features of minute t with the GHI of minute t+1.

    ``features`` may name any observation field or one of the derived time
    features (minute, hour, month). Pairs are matched on timestamps, so a
    missing successor minute skips the sample.
    """
    if len(ds) < 2:
        raise InsufficientRows(f"need at least 2 rows to frame next-minute targets, got {len(ds)}")
    ts = ds.column("ts")
    has_next = np.zeros(len(ds), dtype=bool)
    has_next[:-1] = ts[1:] == ts[:-1] + 1
    idx = np.flatnonzero(has_next)
    X = np.column_stack([_feature_column(ds, f)[idx] for f in features]) if features else np.zeros((idx.size, 0))
    y = ds.column(TARGET)[idx + 1]
    return Frame(tuple(features), X, y, ts[idx].astype("datetime64[m]"))


# --- normalisation --------------------------------------------------------------------


@dataclass(frozen=True)
class NormParams:
    columns: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NormParams":
        return cls(tuple(d["columns"]), np.array(d["mean"], float), np.array(d["std"], float))


def zscore_fit(frame: Frame) -> NormParams:
    audit.record("zscore_fit", frame)
    return NormParams(frame.columns, frame.X.mean(axis=0), frame.X.std(axis=0))


def _check_columns(frame: Frame, params: NormParams):
    if frame.columns != params.columns:
        raise FeatureMismatch(f"normalisation fitted on {params.columns}, frame has {frame.columns}")


def zscore_apply(frame: Frame, params: NormParams) -> Frame:
    """Standardise features; constant columns map to 0. The target is left in W/m^2."""
    _check_columns(frame, params)
    safe = np.where(params.std > 0, params.std, 1.0)
    X = (frame.X - params.mean) / safe
    X[:, params.std == 0] = 0.0
    return Frame(frame.columns, X, frame.y, frame.row_keys)


def zscore_invert(frame: Frame, params: NormParams) -> Frame:
    _check_columns(frame, params)
    X = frame.X * params.std + params.mean
    return Frame(frame.columns, X, frame.y, frame.row_keys)


# --- splitting ------------------------------------------------------------------------


def _train_count(n: int, train_fraction_tenths: int = 7) -> int:
    # ceil(0.7 n) in integer arithmetic
    return -(-train_fraction_tenths * n // 10)


def split_70_30(frame: Frame, seed: int = 0) -> tuple[Frame, Frame]:
    """Random permutation under ``seed``; the first ceil(0.7 n) rows train."""
    n = len(frame)
    if n < 10:
        raise InsufficientRows(f"need at least 10 rows to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    k = _train_count(n)
    return frame.take(perm[:k]), frame.take(perm[k:])


def split_chronological(frame: Frame) -> tuple[Frame, Frame]:
    """Earliest ceil(0.7 n) rows train, the rest test."""
    n = len(frame)
    if n < 10:
        raise InsufficientRows(f"need at least 10 rows to split, got {n}")
    order = np.argsort(frame.row_keys, kind="stable")
    k = _train_count(n)
    return frame.take(order[:k]), frame.take(order[k:])

"""Error metrics and the station x split x model comparison grid.

``accuracy_pct`` is 100 * (1 - MAE / mean(y)). There is no published
definition for the accuracy figures this toolkit is compared against; this
one reproduces them from the published MAE and mean GHI to within half a
point. ``variance_pct`` is the explained-variance score times 100.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInput, LengthMismatch, ZeroMean, ZeroVariance

log = logging.getLogger(__name__)

SPLITS = ("train-test", "validation")


def _pair(y, yhat):
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise LengthMismatch(f"y has {y.size} values, yhat has {yhat.size}")
    if y.size == 0:
        raise EmptyInput("metrics need at least one observation")
    return y, yhat


def mse(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.mean((y - yhat) ** 2))


def mae(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def explained_variance_pct(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    var_y = float(np.var(y))
    if var_y <= 0:
        raise ZeroVariance("target has zero variance")
    return 100.0 * (1.0 - float(np.var(y - yhat)) / var_y)


def accuracy_from_mae(mae_value: float, mean_target: float) -> float:
    if mean_target == 0:
        raise ZeroMean("mean target is zero")
    return max(0.0, 100.0 * (1.0 - mae_value / mean_target))


def accuracy_pct(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    if float(np.mean(np.abs(y))) == 0.0:
        raise ZeroMean("mean |y| is zero")
    return accuracy_from_mae(mae(y, yhat), float(np.mean(y)))


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    mse: float
    variance_pct: float
    accuracy_pct: float
    n: int

    @classmethod
    def compute(cls, y, yhat) -> "MetricsReport":
        y, yhat = _pair(y, yhat)
        return cls(
            mae=mae(y, yhat),
            mse=mse(y, yhat),
            variance_pct=explained_variance_pct(y, yhat),
            accuracy_pct=accuracy_pct(y, yhat),
            n=int(y.size),
        )


METRIC_ROWS = (("MAE", "mae"), ("MSE", "mse"), ("Variance", "variance_pct"), ("Accuracy", "accuracy_pct"), ("N", "n"))


@dataclass
class ComparisonTable:
    cells: dict = field(default_factory=dict)  # (station, split, model) -> MetricsReport

    def __len__(self) -> int:
        return len(self.cells)

    def _axes(self):
        stations, models = [], []
        for station, _, model in self.cells:
            if station not in stations:
                stations.append(station)
            if model not in models:
                models.append(model)
        splits = [s for s in SPLITS if any(k[1] == s for k in self.cells)]
        splits += sorted({k[1] for k in self.cells} - set(splits))
        return stations, splits, models

    def get(self, station, split, model) -> MetricsReport | None:
        return self.cells.get((station, split, model))

    def grid(self) -> list[list[str]]:
        """Rows of the station x period x model layout; absent cells read ``NA``."""
        stations, splits, models = self._axes()
        header = ["split", "metric"] + [f"{s}:{m}" for s in stations for m in models]
        rows = [header]
        for split in splits:
            for label, attr in METRIC_ROWS:
                row = [split, label]
                for s in stations:
                    for m in models:
                        cell = self.cells.get((s, split, m))
                        if cell is None:
                            row.append("NA")
                        elif attr == "n":
                            row.append(str(cell.n))
                        else:
                            row.append(f"{getattr(cell, attr):.4f}")
                rows.append(row)
        return rows

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            csv.writer(fh).writerows(self.grid())
        return path

    def to_text(self) -> str:
        rows = self.grid()
        if len(rows) == 1 and len(rows[0]) == 2:
            return "(empty comparison table)"
        widths = [max(len(r[j]) for r in rows) for j in range(len(rows[0]))]
        lines = []
        for i, r in enumerate(rows):
            cells = [c.ljust(w) if j < 2 else c.rjust(w) for j, (c, w) in enumerate(zip(r, widths))]
            lines.append("  ".join(cells))
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def build_comparison(results) -> ComparisonTable:
    """``results`` yields (station, split, model, y, yhat) tuples.

    A repeated key overwrites the earlier cell and logs a warning.
    """
    table = ComparisonTable()
    for station, split, model, y, yhat in results:
        key = (station, split, model)
        if key in table.cells:
            log.warning("duplicate comparison cell %s; keeping the later one", key)
        table.cells[key] = MetricsReport.compute(y, yhat)
    return table


def is_finite_report(report: MetricsReport) -> bool:
    return all(math.isfinite(v) for v in (report.mae, report.mse, report.variance_pct, report.accuracy_pct))

"""Random-forest impurity importance and top-k feature selection."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import audit
from .errors import ConfigError, EmptyFrame, KTooLarge
from .models.tree import RegressionTree, Workspace, grow_tree, max_nodes_for, presort


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 5
    features_per_split: int | None = None  # None -> ceil(p / 3)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")

    def resolve_mtry(self, p: int) -> int:
        k = self.features_per_split if self.features_per_split is not None else math.ceil(p / 3)
        if not 1 <= k <= p:
            raise ConfigError(f"features_per_split must lie in [1, {p}], got {k}")
        return k


@dataclass(frozen=True)
class Forest:
    trees: tuple[RegressionTree, ...]
    offsets: tuple[float, ...]
    columns: tuple[str, ...]
    config: ForestConfig

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.zeros(X.shape[0])
        for tree, c in zip(self.trees, self.offsets):
            out += tree.predict(X) + c
        return out / len(self.trees)


def fit_forest(frame, cfg: ForestConfig = ForestConfig()) -> Forest:
    """Bagged variance-reduction trees with a random feature subset per node.

    Each tree gets its own generator spawned from ``cfg.seed``, so results do
    not depend on the order trees are built in.
    """
    audit.record("feature_selection", frame)
    X = np.ascontiguousarray(frame.X, dtype=np.float64)
    y = np.asarray(frame.y, dtype=np.float64)
    n, p = X.shape
    if n == 0 or p == 0:
        raise EmptyFrame("cannot fit a forest on an empty frame")
    mtry = cfg.resolve_mtry(p)
    order = presort(X)
    ws = Workspace(n, p)
    trees, offsets = [], []
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees):
        rng = np.random.default_rng(child)
        if cfg.bootstrap:
            w = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
        else:
            w = np.ones(n)
        in_sample = w > 0
        c = float(np.dot(w, y) / w.sum())
        node_mask = None
        if mtry < p:
            m = max_nodes_for(int(in_sample.sum()), cfg.max_depth)
            picks = np.argsort(rng.random((m, p)), axis=1)[:, :mtry]
            node_mask = np.zeros((m, p), dtype=bool)
            np.put_along_axis(node_mask, picks, True, axis=1)
        tree = grow_tree(
            X,
            order,
            w * (c - y),
            w,
            max_depth=cfg.max_depth,
            min_child_weight=float(cfg.min_samples_leaf),
            in_sample=in_sample,
            node_mask=node_mask,
            workspace=ws,
        )
        trees.append(tree)
        offsets.append(c)
    return Forest(tuple(trees), tuple(offsets), tuple(frame.columns), cfg)


@dataclass(frozen=True)
class ImportanceReport:
    columns: tuple[str, ...]
    scores: np.ndarray
    degenerate: bool = False

    @property
    def ranking(self) -> np.ndarray:
        # stable sort keeps column order among equal scores
        return np.argsort(-self.scores, kind="stable")

    def ranked(self) -> list[tuple[str, float]]:
        return [(self.columns[i], float(self.scores[i])) for i in self.ranking]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["feature", "score"])
            for name, score in self.ranked():
                w.writerow([name, f"{score:.12f}"])
        return path


def impurity_importance(forest: Forest) -> ImportanceReport:
    """Total split gain credited to each feature, normalised to sum 1."""
    p = len(forest.columns)
    totals = np.zeros(p)
    for tree in forest.trees:
        split = tree.feature >= 0
        totals += np.bincount(tree.feature[split], weights=tree.gain[split], minlength=p)
    total = totals.sum()
    if total <= 0:
        return ImportanceReport(forest.columns, np.zeros(p), degenerate=True)
    return ImportanceReport(forest.columns, totals / total)


def select_top_k(report: ImportanceReport, k: int) -> list[str]:
    if k > len(report.columns):
        raise KTooLarge(f"asked for {k} features, only {len(report.columns)} available")
    if k < 0:
        raise ConfigError("k must be non-negative")
    return [report.columns[i] for i in report.ranking[:k]]

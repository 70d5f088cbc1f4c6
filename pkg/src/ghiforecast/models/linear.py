"""Ordinary least squares, y = w.x + b."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import FeatureMismatch, InsufficientRows, RankDeficientWarning
from .gbdt import as_matrix


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    columns: tuple[str, ...] = ()
    rank: int = -1

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]


def fit_linear(train) -> LinearModel:
    """Least-squares fit through an SVD-based solver.

    A rank-deficient design triggers :class:`RankDeficientWarning` and the
    minimum-norm solution is returned.
    """
    X, columns = as_matrix(train)
    y = np.asarray(train.y, dtype=np.float64)
    n, p = X.shape
    if n < p + 1:
        raise InsufficientRows(f"need at least {p + 1} rows for {p} features, got {n}")
    # centring decouples the intercept and keeps the system well conditioned
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    coef, _, rank, _ = np.linalg.lstsq(X - x_mean, y - y_mean, rcond=None)
    if rank < p:
        warnings.warn(f"design matrix has rank {rank} < {p}; using the minimum-norm solution", RankDeficientWarning, stacklevel=2)
    bias = float(y_mean - x_mean @ coef)
    return LinearModel(coef, bias, tuple(columns or ()), int(rank))


def predict_linear(model: LinearModel, X) -> np.ndarray:
    X, columns = as_matrix(X)
    if columns is not None and model.columns and tuple(columns) != model.columns:
        raise FeatureMismatch(f"model expects columns {model.columns}, got {tuple(columns)}")
    if X.shape[1] != model.n_features:
        raise FeatureMismatch(f"model expects {model.n_features} features, got {X.shape[1]}")
    return X @ model.weights + model.bias

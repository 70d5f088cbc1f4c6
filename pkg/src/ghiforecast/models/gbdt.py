"""Gradient-boosted regression trees with squared-error loss."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import ConfigError, FeatureMismatch, InsufficientRows
from .tree import RegressionTree, Workspace, grow_tree, presort


@dataclass(frozen=True)
class GbdtConfig:
    n_rounds: int = 100
    eta: float = 0.3
    max_depth: int = 6
    min_child_weight: float = 1.0
    reg_lambda: float = 1.0
    gamma: float = 0.0
    subsample: float = 1.0
    colsample: float = 1.0
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.n_rounds < 0 or int(self.n_rounds) != self.n_rounds:
            raise ConfigError(f"n_rounds must be a non-negative integer, got {self.n_rounds}")
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError(f"eta must lie in (0, 1], got {self.eta}")
        if self.max_depth < 1 or int(self.max_depth) != self.max_depth:
            raise ConfigError(f"max_depth must be a positive integer, got {self.max_depth}")
        for name in ("min_child_weight", "reg_lambda", "gamma"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("subsample", "colsample"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoostedEnsemble:
    base_score: float
    eta: float
    trees: tuple[RegressionTree, ...]
    columns: tuple[str, ...] = ()
    config: GbdtConfig | None = None
    train_mse: tuple[float, ...] = field(default=(), compare=False)

    @property
    def n_features(self) -> int:
        return len(self.columns)


def _xy(frame):
    return np.ascontiguousarray(frame.X, dtype=np.float64), np.asarray(frame.y, dtype=np.float64)


def fit_gbdt(train, cfg: GbdtConfig = GbdtConfig(), *, track_loss: bool = False) -> BoostedEnsemble:
    """Boost ``cfg.n_rounds`` trees on the frame's features.

    Gradients are g = yhat - y and hessians h = 1; the ensemble starts from
    the mean training target. With ``track_loss`` the training MSE after
    each round is stored on the result (index 0 is the base score).
    """
    X, y = _xy(train)
    n, p = X.shape
    if n < 2:
        raise InsufficientRows(f"need at least 2 rows to boost, got {n}")
    base = float(y.mean())
    pred = np.full(n, base)
    order = presort(X)
    ws = Workspace(n, p)
    h = np.ones(n)
    all_rows = np.ones(n, dtype=np.bool_)
    rng = np.random.default_rng(cfg.seed)
    trees = []
    losses = [float(np.mean((y - pred) ** 2))] if track_loss else []
    n_cols = max(1, int(round(cfg.colsample * p)))
    for _ in range(cfg.n_rounds):
        g = pred - y
        in_sample = None
        if cfg.subsample < 1.0:
            in_sample = rng.random(n) < cfg.subsample
            if not in_sample.any():
                in_sample[rng.integers(n)] = True
        col_mask = None
        if cfg.colsample < 1.0 and n_cols < p:
            col_mask = np.zeros(p, dtype=bool)
            col_mask[rng.choice(p, n_cols, replace=False)] = True
        tree = grow_tree(
            X,
            order,
            g,
            h,
            max_depth=cfg.max_depth,
            min_child_weight=cfg.min_child_weight,
            reg_lambda=cfg.reg_lambda,
            gamma=cfg.gamma,
            in_sample=in_sample,
            col_mask=col_mask,
            workspace=ws,
        )
        # in-sample rows already know their leaf; only held-out rows are routed
        tree.boost_update(pred, X, cfg.eta, ws.leaf_of, all_rows if in_sample is None else in_sample)
        trees.append(tree)
        if track_loss:
            losses.append(float(np.mean((y - pred) ** 2)))
    columns = tuple(getattr(train, "columns", ())) or tuple(f"x{j}" for j in range(p))
    return BoostedEnsemble(base, cfg.eta, tuple(trees), columns, cfg, tuple(losses))


def _check_width(model, X, columns):
    if columns is not None and model.columns and tuple(columns) != tuple(model.columns):
        raise FeatureMismatch(f"model expects columns {model.columns}, got {tuple(columns)}")
    if X.ndim != 2 or X.shape[1] != len(model.columns):
        raise FeatureMismatch(f"model expects {len(model.columns)} features, got shape {X.shape}")


def as_matrix(X):
    """Accept a Frame or an array; return (matrix, column names or None)."""
    if hasattr(X, "X") and hasattr(X, "columns"):
        return np.ascontiguousarray(X.X, dtype=np.float64), X.columns
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    return np.ascontiguousarray(X), None


def predict_gbdt(model: BoostedEnsemble, X) -> np.ndarray:
    X, columns = as_matrix(X)
    _check_width(model, X, columns)
    out = np.full(X.shape[0], model.base_score)
    for tree in model.trees:
        out += model.eta * tree.predict(X)
    return out


def four_xgb_presets() -> list[GbdtConfig]:
    """The four fixed configurations compared against the GA.

    "XGB-100" is the flagship (xgboost's defaults with 100 rounds); the
    other three bracket it: shallow/fast, slow-and-sampled, deep/regularised.
    """
    return [
        GbdtConfig(name="XGB-100", n_rounds=100, eta=0.3, max_depth=6, min_child_weight=1.0, reg_lambda=1.0),
        GbdtConfig(name="XGB-50-shallow", n_rounds=50, eta=0.3, max_depth=3, min_child_weight=1.0, reg_lambda=1.0),
        GbdtConfig(
            name="XGB-200-sampled",
            n_rounds=200,
            eta=0.05,
            max_depth=6,
            min_child_weight=1.0,
            reg_lambda=1.0,
            subsample=0.8,
            colsample=0.8,
        ),
        GbdtConfig(name="XGB-150-deep", n_rounds=150, eta=0.1, max_depth=8, min_child_weight=5.0, reg_lambda=5.0),
    ]


def get_preset(name: str, seed: int | None = None) -> GbdtConfig:
    for cfg in four_xgb_presets():
        if cfg.name.lower() == name.lower():
            return cfg if seed is None else replace(cfg, seed=seed)
    names = ", ".join(c.name for c in four_xgb_presets())
    raise ConfigError(f"unknown XGB preset {name!r}; choose one of {names}")

"""Versioned JSON documents for fitted models.

Floats are written with ``repr`` precision by the json module, so a loaded
model predicts bit-for-bit what the saved one did.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .gbdt import BoostedEnsemble, GbdtConfig
from .linear import LinearModel
from .tree import RegressionTree

FORMAT = "ghiforecast-model"
VERSION = 1


def model_to_dict(model) -> dict:
    if isinstance(model, LinearModel):
        return {
            "format": FORMAT,
            "version": VERSION,
            "kind": "linear",
            "columns": list(model.columns),
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "rank": model.rank,
        }
    if isinstance(model, BoostedEnsemble):
        return {
            "format": FORMAT,
            "version": VERSION,
            "kind": "gbdt",
            "columns": list(model.columns),
            "base_score": model.base_score,
            "eta": model.eta,
            "config": model.config.to_dict() if model.config else None,
            "trees": [t.to_dict() for t in model.trees],
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT:
        raise ValueError("not a ghiforecast model document")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model document version {doc.get('version')}")
    kind = doc["kind"]
    if kind == "linear":
        return LinearModel(np.array(doc["weights"], dtype=np.float64), float(doc["bias"]), tuple(doc["columns"]), int(doc.get("rank", -1)))
    if kind == "gbdt":
        cfg = GbdtConfig(**doc["config"]) if doc.get("config") else None
        trees = tuple(RegressionTree.from_dict(t) for t in doc["trees"])
        return BoostedEnsemble(float(doc["base_score"]), float(doc["eta"]), trees, tuple(doc["columns"]), cfg)
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model), separators=(",", ":")))
    return path


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))

from .gbdt import BoostedEnsemble, GbdtConfig, fit_gbdt, four_xgb_presets, get_preset, predict_gbdt
from .io import load_model, model_from_dict, model_to_dict, save_model
from .linear import LinearModel, fit_linear, predict_linear
from .tree import RegressionTree, grow_tree, presort


def predict(model, X):
    """Dispatch to the predictor matching ``model``'s type."""
    if isinstance(model, LinearModel):
        return predict_linear(model, X)
    return predict_gbdt(model, X)


__all__ = [
    "BoostedEnsemble",
    "GbdtConfig",
    "LinearModel",
    "RegressionTree",
    "fit_gbdt",
    "fit_linear",
    "four_xgb_presets",
    "get_preset",
    "grow_tree",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "predict",
    "predict_gbdt",
    "predict_linear",
    "presort",
    "save_model",
]

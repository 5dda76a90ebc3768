"""Six regression families behind one fit/predict contract."""

from __future__ import annotations

import numpy as np

from .base import (
    PREDICTION_CLIP,
    ModelFamily,
    Scaler,
    TrainedModel,
    check_prediction_input,
    clip_predictions,
    model_from_dict,
    model_to_dict,
    standardize_apply,
    standardize_fit,
)
from .boosting import GBM_DEFAULTS, fit_gbm, gbm_forward
from .linear import BAYES_DEFAULTS, fit_bayesian_ridge, fit_ols, fit_ridge, linear_forward
from .mlp import MLP_DEFAULTS, fit_mlp
from .mlp import forward as _mlp_forward
from .tree import TREE_DEFAULTS, fit_tree, tree_forward

__all__ = [
    "ModelFamily",
    "Scaler",
    "TrainedModel",
    "PREDICTION_CLIP",
    "standardize_fit",
    "standardize_apply",
    "fit_ols",
    "fit_ridge",
    "fit_bayesian_ridge",
    "fit_tree",
    "fit_gbm",
    "fit_mlp",
    "fit_family",
    "predict",
    "predict_raw",
    "model_to_dict",
    "model_from_dict",
    "TREE_DEFAULTS",
    "GBM_DEFAULTS",
    "MLP_DEFAULTS",
    "BAYES_DEFAULTS",
]


def fit_family(
    family: ModelFamily,
    X: np.ndarray,
    y: np.ndarray,
    hp: dict | None = None,
    seed: int = 0,
    schema: tuple[str, ...] | None = None,
) -> TrainedModel:
    """Dispatch to the family-specific fit with a uniform signature."""
    if family is ModelFamily.LINEAR:
        return fit_ols(X, y, schema=schema)
    if family is ModelFamily.RIDGE:
        penalty = (hp or {}).get("penalty", 1.0)
        return fit_ridge(X, y, penalty, schema=schema)
    if family is ModelFamily.BAYESIAN_RIDGE:
        return fit_bayesian_ridge(X, y, hp, schema=schema)
    if family is ModelFamily.TREE:
        return fit_tree(X, y, hp, schema=schema)
    if family is ModelFamily.GBM:
        return fit_gbm(X, y, hp, schema=schema)
    if family is ModelFamily.MLP:
        return fit_mlp(X, y, hp, seed=seed, schema=schema)
    raise ValueError(f"unknown family {family}")


def predict_raw(
    model: TrainedModel,
    X: np.ndarray,
    schema: tuple[str, ...] | None = None,
) -> np.ndarray:
    """Family forward pass without clipping; applies the stored scaler."""
    X = check_prediction_input(model, X, schema)
    if model.scaler is not None:
        X = standardize_apply(model.scaler, X)
    if model.family in (ModelFamily.LINEAR, ModelFamily.RIDGE, ModelFamily.BAYESIAN_RIDGE):
        return linear_forward(model.params, X)
    if model.family is ModelFamily.TREE:
        return tree_forward(model.params["nodes"], X)
    if model.family is ModelFamily.GBM:
        return gbm_forward(model.params, X)
    if model.family is ModelFamily.MLP:
        return _mlp_forward(model.params, X)
    raise ValueError(f"unknown family {model.family}")


def predict(
    model: TrainedModel,
    X: np.ndarray,
    schema: tuple[str, ...] | None = None,
) -> np.ndarray:
    """Predicted maintenance dose in mg/day, clipped to the plausible range."""
    return clip_predictions(predict_raw(model, X, schema))

"""Shared model plumbing: scaling, the fitted-model container, serialization.

Linear-family and MLP fits operate on z-scored features; tree-based
fits see raw features. Predictions from every family are clipped to the
plausible dose range [0.5, 30] mg/day.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, SchemaMismatch

PREDICTION_CLIP = (0.5, 30.0)
DEGENERATE_STD = 1e-12


class ModelFamily(enum.Enum):
    LINEAR = "LINEAR"
    RIDGE = "RIDGE"
    BAYESIAN_RIDGE = "BAYESIAN_RIDGE"
    TREE = "TREE"
    GBM = "GBM"
    MLP = "MLP"


SCALED_FAMILIES = frozenset(
    {ModelFamily.LINEAR, ModelFamily.RIDGE, ModelFamily.BAYESIAN_RIDGE, ModelFamily.MLP}
)


@dataclass(frozen=True)
class Scaler:
    """Per-column (mean, scale); scale is 1.0 for near-constant columns."""

    mean: np.ndarray
    scale: np.ndarray


def standardize_fit(X: np.ndarray) -> Scaler:
    """Population-std z-score parameters; degenerate columns center only."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std < DEGENERATE_STD, 1.0, std)
    return Scaler(mean=mean, scale=scale)


def standardize_apply(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != scaler.mean.shape[0]:
        raise DimensionMismatch(
            f"scaler has {scaler.mean.shape[0]} columns, X has {X.shape[1]}"
        )
    return (X - scaler.mean) / scaler.scale


@dataclass
class TrainedModel:
    family: ModelFamily
    params: dict
    hyperparams: dict
    schema: tuple[str, ...] | None = None
    scaler: Scaler | None = None
    seed: int | None = None
    flags: dict = field(default_factory=dict)


def check_xy(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("X must be 2-dimensional")
    if y.shape != (X.shape[0],):
        raise DimensionMismatch(
            f"y has shape {y.shape}, expected ({X.shape[0]},)"
        )
    return X, y


def check_prediction_input(
    model: TrainedModel, X: np.ndarray, schema: tuple[str, ...] | None
) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if schema is not None and model.schema is not None and tuple(schema) != model.schema:
        raise SchemaMismatch(
            f"model was fit on {model.schema}, got {tuple(schema)}"
        )
    if model.schema is not None and X.shape[1] != len(model.schema):
        raise SchemaMismatch(
            f"model expects {len(model.schema)} columns, got {X.shape[1]}"
        )
    return X


def clip_predictions(pred: np.ndarray) -> np.ndarray:
    return np.clip(pred, PREDICTION_CLIP[0], PREDICTION_CLIP[1])


def _array_out(a: np.ndarray | None):
    return None if a is None else np.asarray(a, dtype=float).tolist()


def model_to_dict(model: TrainedModel) -> dict:
    """Self-describing document; floats keep full round-trip precision."""
    return {
        "family": model.family.value,
        "schema": list(model.schema) if model.schema is not None else None,
        "scaler": None
        if model.scaler is None
        else {"mean": _array_out(model.scaler.mean), "scale": _array_out(model.scaler.scale)},
        "params": _params_out(model.family, model.params),
        "hyperparams": dict(model.hyperparams),
        "seed": model.seed,
        "flags": dict(model.flags),
    }


def model_from_dict(doc: dict) -> TrainedModel:
    family = ModelFamily(doc["family"])
    scaler = None
    if doc.get("scaler") is not None:
        scaler = Scaler(
            mean=np.asarray(doc["scaler"]["mean"], dtype=float),
            scale=np.asarray(doc["scaler"]["scale"], dtype=float),
        )
    return TrainedModel(
        family=family,
        params=_params_in(family, doc["params"]),
        hyperparams=dict(doc["hyperparams"]),
        schema=tuple(doc["schema"]) if doc.get("schema") is not None else None,
        scaler=scaler,
        seed=doc.get("seed"),
        flags=dict(doc.get("flags", {})),
    )


def _tree_nodes_out(nodes: dict) -> dict:
    return {
        "feature": [int(v) for v in nodes["feature"]],
        "threshold": _array_out(nodes["threshold"]),
        "left": [int(v) for v in nodes["left"]],
        "right": [int(v) for v in nodes["right"]],
        "value": _array_out(nodes["value"]),
    }


def _tree_nodes_in(doc: dict) -> dict:
    return {
        "feature": np.asarray(doc["feature"], dtype=int),
        "threshold": np.asarray(doc["threshold"], dtype=float),
        "left": np.asarray(doc["left"], dtype=int),
        "right": np.asarray(doc["right"], dtype=int),
        "value": np.asarray(doc["value"], dtype=float),
    }


def _params_out(family: ModelFamily, params: dict) -> dict:
    if family in (ModelFamily.LINEAR, ModelFamily.RIDGE):
        return {"coef": _array_out(params["coef"]), "intercept": float(params["intercept"])}
    if family is ModelFamily.BAYESIAN_RIDGE:
        return {
            "coef": _array_out(params["coef"]),
            "intercept": float(params["intercept"]),
            "alpha": float(params["alpha"]),
            "beta": float(params["beta"]),
            "n_iter": int(params["n_iter"]),
        }
    if family is ModelFamily.TREE:
        return {"nodes": _tree_nodes_out(params["nodes"])}
    if family is ModelFamily.GBM:
        return {
            "base": float(params["base"]),
            "learning_rate": float(params["learning_rate"]),
            "trees": [_tree_nodes_out(t) for t in params["trees"]],
        }
    if family is ModelFamily.MLP:
        return {
            "w1": _array_out(params["w1"]),
            "b1": _array_out(params["b1"]),
            "w2": _array_out(params["w2"]),
            "b2": float(params["b2"]),
        }
    raise ValueError(f"unknown family {family}")


def _params_in(family: ModelFamily, doc: dict) -> dict:
    if family in (ModelFamily.LINEAR, ModelFamily.RIDGE):
        return {"coef": np.asarray(doc["coef"], dtype=float), "intercept": doc["intercept"]}
    if family is ModelFamily.BAYESIAN_RIDGE:
        return {
            "coef": np.asarray(doc["coef"], dtype=float),
            "intercept": doc["intercept"],
            "alpha": doc["alpha"],
            "beta": doc["beta"],
            "n_iter": doc["n_iter"],
        }
    if family is ModelFamily.TREE:
        return {"nodes": _tree_nodes_in(doc["nodes"])}
    if family is ModelFamily.GBM:
        return {
            "base": doc["base"],
            "learning_rate": doc["learning_rate"],
            "trees": [_tree_nodes_in(t) for t in doc["trees"]],
        }
    if family is ModelFamily.MLP:
        return {
            "w1": np.asarray(doc["w1"], dtype=float),
            "b1": np.asarray(doc["b1"], dtype=float),
            "w2": np.asarray(doc["w2"], dtype=float),
            "b2": doc["b2"],
        }
    raise ValueError(f"unknown family {family}")

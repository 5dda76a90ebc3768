"""Single-hidden-layer perceptron trained by full-batch gradient descent.

ReLU hidden units, linear output, squared-error loss. Training is fully
deterministic for a given (data, hyperparameters, seed): the seeded
generator drives the validation split and then the weight
initialization, and updates use the whole batch with a fixed step size.
Early stopping keeps the weights with the best validation loss.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, DivergenceError
from .base import ModelFamily, TrainedModel, check_xy, standardize_apply, standardize_fit

MLP_DEFAULTS = {
    "hidden_units": 16,
    "learning_rate": 1e-2,
    "max_epochs": 500,
    "patience": 25,
    "validation_fraction": 0.15,
}


def init_params(n_features: int, hidden_units: int, rng: np.random.Generator) -> dict:
    """Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases."""
    a1 = np.sqrt(6.0 / (n_features + hidden_units))
    a2 = np.sqrt(6.0 / (hidden_units + 1))
    return {
        "w1": rng.uniform(-a1, a1, size=(n_features, hidden_units)),
        "b1": np.zeros(hidden_units),
        "w2": rng.uniform(-a2, a2, size=hidden_units),
        "b2": 0.0,
    }


def forward(params: dict, X: np.ndarray) -> np.ndarray:
    hidden = np.maximum(X @ params["w1"] + params["b1"], 0.0)
    return hidden @ params["w2"] + params["b2"]


def loss(params: dict, X: np.ndarray, y: np.ndarray) -> float:
    resid = forward(params, X) - y
    return float(np.mean(resid * resid))


def loss_and_grads(params: dict, X: np.ndarray, y: np.ndarray) -> tuple[float, dict]:
    """Mean-squared-error loss and its analytic gradients."""
    n = X.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        pre = X @ params["w1"] + params["b1"]
        hidden = np.maximum(pre, 0.0)
        pred = hidden @ params["w2"] + params["b2"]
        resid = pred - y
        value = float(np.mean(resid * resid))

        dpred = 2.0 * resid / n
        gw2 = hidden.T @ dpred
        gb2 = float(dpred.sum())
        dhidden = np.outer(dpred, params["w2"])
        dhidden[pre <= 0.0] = 0.0
        gw1 = X.T @ dhidden
        gb1 = dhidden.sum(axis=0)
    return value, {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2}


def _copy(params: dict) -> dict:
    return {
        "w1": params["w1"].copy(),
        "b1": params["b1"].copy(),
        "w2": params["w2"].copy(),
        "b2": params["b2"],
    }


def train(
    Z: np.ndarray,
    y: np.ndarray,
    hp: dict,
    seed: int,
) -> tuple[dict, dict]:
    """Gradient-descent loop on already-standardized features.

    Returns (best parameters, info). With a zero validation fraction the
    loop runs all epochs and returns the final weights.
    """
    hidden_units = int(hp["hidden_units"])
    learning_rate = float(hp["learning_rate"])
    max_epochs = int(hp["max_epochs"])
    patience = int(hp["patience"])
    val_fraction = float(hp["validation_fraction"])

    rng = np.random.default_rng(seed)
    n = Z.shape[0]
    n_val = int(round(n * val_fraction))
    perm = rng.permutation(n)
    val_rows = perm[:n_val]
    train_rows = perm[n_val:]
    Zt, yt = Z[train_rows], y[train_rows]
    Zv, yv = Z[val_rows], y[val_rows]

    params = init_params(Z.shape[1], hidden_units, rng)

    use_val = n_val > 0
    best_val = loss(params, Zv, yv) if use_val else np.inf
    best_params = _copy(params)
    stale = 0
    epochs_run = 0
    for epoch in range(1, max_epochs + 1):
        value, grads = loss_and_grads(params, Zt, yt)
        if not np.isfinite(value):
            raise DivergenceError(f"training loss became non-finite at epoch {epoch}")
        params["w1"] -= learning_rate * grads["w1"]
        params["b1"] -= learning_rate * grads["b1"]
        params["w2"] -= learning_rate * grads["w2"]
        params["b2"] -= learning_rate * grads["b2"]
        epochs_run = epoch
        if use_val:
            val = loss(params, Zv, yv)
            if not np.isfinite(val):
                raise DivergenceError(f"validation loss became non-finite at epoch {epoch}")
            if val < best_val:
                best_val = val
                best_params = _copy(params)
                stale = 0
            else:
                stale += 1
                if stale >= patience:
                    break
    if not use_val:
        best_params = params
    info = {"epochs_run": epochs_run, "best_val_loss": best_val if use_val else None}
    return best_params, info


def fit_mlp(
    X: np.ndarray,
    y: np.ndarray,
    hp: dict | None = None,
    seed: int = 0,
    schema: tuple[str, ...] | None = None,
) -> TrainedModel:
    X, y = check_xy(X, y)
    if X.shape[0] < 4:
        raise DimensionMismatch(f"need n >= 4 rows, got n={X.shape[0]}")
    cfg = dict(MLP_DEFAULTS)
    if hp:
        cfg.update(hp)
    scaler = standardize_fit(X)
    Z = standardize_apply(scaler, X)
    params, info = train(Z, y, cfg, seed)
    return TrainedModel(
        family=ModelFamily.MLP,
        params=params,
        hyperparams=cfg,
        schema=tuple(schema) if schema is not None else None,
        scaler=scaler,
        seed=seed,
        flags=info,
    )

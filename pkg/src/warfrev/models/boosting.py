"""Least-squares gradient boosting over CART trees.

The model starts from the training mean and adds shrunken regression
trees fit to the current residuals, so with zero rounds it is exactly
the mean predictor and every added round can only lower training MSE.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from .base import ModelFamily, TrainedModel, check_xy
from .tree import build_tree_nodes, tree_forward

GBM_DEFAULTS = {
    "n_rounds": 100,
    "learning_rate": 0.1,
    "max_depth": 3,
    "min_samples_leaf": 5,
}


def fit_gbm(
    X: np.ndarray,
    y: np.ndarray,
    hp: dict | None = None,
    schema: tuple[str, ...] | None = None,
) -> TrainedModel:
    X, y = check_xy(X, y)
    cfg = dict(GBM_DEFAULTS)
    if hp:
        cfg.update(hp)
    n_rounds = int(cfg["n_rounds"])
    learning_rate = float(cfg["learning_rate"])
    max_depth = int(cfg["max_depth"])
    min_leaf = int(cfg["min_samples_leaf"])
    if n_rounds < 0:
        raise ValueError("n_rounds must be >= 0")
    if not 0.0 < learning_rate <= 1.0:
        raise ValueError("learning_rate must be in (0, 1]")
    if X.shape[0] < min_leaf:
        raise DimensionMismatch(
            f"need n >= min_samples_leaf rows, got n={X.shape[0]}"
        )

    base = float(y.mean())
    current = np.full(X.shape[0], base)
    trees = []
    for _ in range(n_rounds):
        nodes = build_tree_nodes(X, y - current, max_depth, min_leaf)
        current = current + learning_rate * tree_forward(nodes, X)
        trees.append(nodes)
    return TrainedModel(
        family=ModelFamily.GBM,
        params={"base": base, "learning_rate": learning_rate, "trees": trees},
        hyperparams={
            "n_rounds": n_rounds,
            "learning_rate": learning_rate,
            "max_depth": max_depth,
            "min_samples_leaf": min_leaf,
        },
        schema=tuple(schema) if schema is not None else None,
    )


def gbm_forward(params: dict, X: np.ndarray, n_rounds: int | None = None) -> np.ndarray:
    """Sum of base and shrunken tree outputs, optionally truncated to a prefix."""
    trees = params["trees"]
    if n_rounds is not None:
        trees = trees[:n_rounds]
    out = np.full(np.asarray(X).shape[0], float(params["base"]))
    lr = float(params["learning_rate"])
    for nodes in trees:
        out = out + lr * tree_forward(nodes, X)
    return out

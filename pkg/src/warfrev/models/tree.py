"""Binary CART regression trees grown by squared-deviation reduction.

Candidate thresholds are midpoints between consecutive distinct sorted
feature values. Ties are broken toward the lowest feature index, then
the smallest threshold, so growth is fully deterministic. Leaves
predict the mean of their training samples.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from .base import ModelFamily, TrainedModel, check_xy

TREE_DEFAULTS = {"max_depth": 3, "min_samples_leaf": 5}

_ZERO_VARIANCE_SSE = 1e-12


def _best_split(
    X: np.ndarray, y: np.ndarray, idx: np.ndarray, min_leaf: int
) -> tuple[int, float] | None:
    """Exhaustive scan for the (feature, threshold) minimizing child SSE.

    For each feature the sorted prefix sums give every split's pooled
    sum of squared deviations in one vector pass.
    """
    n = idx.size
    if n < 2 * min_leaf:
        return None
    ysub = y[idx]
    total_sum = float(ysub.sum())
    total_sq = float((ysub * ysub).sum())
    parent_sse = total_sq - total_sum * total_sum / n
    if parent_sse <= _ZERO_VARIANCE_SSE:
        return None

    best_sse = np.inf
    best: tuple[int, float] | None = None
    counts_left = np.arange(1, n)
    counts_right = n - counts_left
    size_ok = (counts_left >= min_leaf) & (counts_right >= min_leaf)
    for feature in range(X.shape[1]):
        x = X[idx, feature]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = ysub[order]
        valid = size_ok & (xs[1:] != xs[:-1])
        if not valid.any():
            continue
        csum = np.cumsum(ys)[:-1]
        csq = np.cumsum(ys * ys)[:-1]
        sse = (csq - csum * csum / counts_left) + (
            (total_sq - csq) - (total_sum - csum) ** 2 / counts_right
        )
        sse = np.where(valid, sse, np.inf)
        k = int(np.argmin(sse))
        if sse[k] < best_sse:
            best_sse = float(sse[k])
            best = (feature, float((xs[k] + xs[k + 1]) / 2.0))
    return best


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    max_depth: int,
    min_leaf: int,
    nodes: dict,
) -> int:
    node_id = len(nodes["feature"])
    for key in nodes:
        nodes[key].append(0)
    nodes["value"][node_id] = float(y[idx].mean())
    nodes["feature"][node_id] = -1
    nodes["threshold"][node_id] = 0.0
    nodes["left"][node_id] = -1
    nodes["right"][node_id] = -1

    if depth >= max_depth:
        return node_id
    split = _best_split(X, y, idx, min_leaf)
    if split is None:
        return node_id
    feature, threshold = split
    go_left = X[idx, feature] <= threshold
    nodes["feature"][node_id] = feature
    nodes["threshold"][node_id] = threshold
    nodes["left"][node_id] = _grow(
        X, y, idx[go_left], depth + 1, max_depth, min_leaf, nodes
    )
    nodes["right"][node_id] = _grow(
        X, y, idx[~go_left], depth + 1, max_depth, min_leaf, nodes
    )
    return node_id


def build_tree_nodes(
    X: np.ndarray, y: np.ndarray, max_depth: int, min_samples_leaf: int
) -> dict:
    """Grow a tree and return it as flat parallel node arrays."""
    nodes: dict = {"feature": [], "threshold": [], "left": [], "right": [], "value": []}
    _grow(X, y, np.arange(X.shape[0]), 0, max_depth, min_samples_leaf, nodes)
    return {
        "feature": np.asarray(nodes["feature"], dtype=int),
        "threshold": np.asarray(nodes["threshold"], dtype=float),
        "left": np.asarray(nodes["left"], dtype=int),
        "right": np.asarray(nodes["right"], dtype=int),
        "value": np.asarray(nodes["value"], dtype=float),
    }


def tree_forward(nodes: dict, X: np.ndarray) -> np.ndarray:
    """Route every row to its leaf; rows at a leaf share that leaf's mean."""
    X = np.asarray(X, dtype=float)
    feature = nodes["feature"]
    threshold = nodes["threshold"]
    left = nodes["left"]
    right = nodes["right"]
    value = nodes["value"]
    out = np.empty(X.shape[0])
    active = {0: np.arange(X.shape[0])}
    while active:
        node_id, rows = active.popitem()
        f = feature[node_id]
        if f < 0:
            out[rows] = value[node_id]
            continue
        go_left = X[rows, f] <= threshold[node_id]
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        if left_rows.size:
            active[left[node_id]] = left_rows
        if right_rows.size:
            active[right[node_id]] = right_rows
    return out


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    hp: dict | None = None,
    schema: tuple[str, ...] | None = None,
) -> TrainedModel:
    X, y = check_xy(X, y)
    cfg = dict(TREE_DEFAULTS)
    if hp:
        cfg.update(hp)
    max_depth = int(cfg["max_depth"])
    min_leaf = int(cfg["min_samples_leaf"])
    if max_depth < 1 or min_leaf < 1:
        raise ValueError("max_depth and min_samples_leaf must be >= 1")
    if X.shape[0] < min_leaf:
        raise DimensionMismatch(
            f"need n >= min_samples_leaf rows, got n={X.shape[0]}"
        )
    nodes = build_tree_nodes(X, y, max_depth, min_leaf)
    return TrainedModel(
        family=ModelFamily.TREE,
        params={"nodes": nodes},
        hyperparams={"max_depth": max_depth, "min_samples_leaf": min_leaf},
        schema=tuple(schema) if schema is not None else None,
    )

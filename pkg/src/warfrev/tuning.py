"""Race-stratified splitting, k-fold CV, and grid search.

The split shuffles within each race stratum and rounds the per-stratum
test count half-to-even, so every race keeps (to within one patient)
the global test fraction. Grid search scores each hyperparameter cell
by mean validation MSE over seeded folds; a failing cell scores +inf
instead of aborting the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FoldError
from .features import FeatureMatrix
from .metrics import mse
from .models import ModelFamily, fit_family, predict
from .models.base import clip_predictions
from .models.boosting import gbm_forward

DEFAULT_GRIDS: dict[ModelFamily, list[dict]] = {
    ModelFamily.LINEAR: [{}],
    ModelFamily.RIDGE: [{"penalty": v} for v in (0.01, 0.1, 1.0, 10.0, 100.0)],
    ModelFamily.BAYESIAN_RIDGE: [
        {"alpha0": a, "beta0": b}
        for a in (1e-6, 1e-4, 1e-2)
        for b in (1e-6, 1e-4, 1e-2)
    ],
    ModelFamily.TREE: [
        {"max_depth": d, "min_samples_leaf": m}
        for d in (2, 3, 4, 6)
        for m in (5, 10, 20)
    ],
    ModelFamily.GBM: [
        {"n_rounds": r, "learning_rate": lr, "max_depth": d, "min_samples_leaf": m}
        for r in (50, 100, 200)
        for lr in (0.05, 0.1)
        for d in (2, 3)
        for m in (5, 10)
    ],
    ModelFamily.MLP: [
        {"hidden_units": h, "learning_rate": lr}
        for h in (16, 32)
        for lr in (1e-3, 1e-2)
    ],
}


@dataclass(frozen=True)
class SplitIndices:
    train_rows: tuple[int, ...]
    test_rows: tuple[int, ...]
    seed: int
    strata_column: str
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "train_rows": list(self.train_rows),
            "test_rows": list(self.test_rows),
            "seed": self.seed,
            "strata_column": self.strata_column,
            "warnings": list(self.warnings),
        }


def _race_strata(matrix: FeatureMatrix) -> dict[str, np.ndarray]:
    race_cols = [i for i, c in enumerate(matrix.schema) if c.startswith("race_")]
    if not race_cols:
        return {"all": np.arange(matrix.n)}
    strata = {}
    for col in race_cols:
        rows = np.flatnonzero(matrix.rows[:, col] == 1.0)
        if rows.size:
            strata[matrix.schema[col]] = rows
    return strata


def stratified_split(
    matrix: FeatureMatrix,
    test_fraction: float = 0.2,
    seed: int = 0,
) -> SplitIndices:
    """Shuffle within each race stratum; round(stratum * fraction) rows to test."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train: list[int] = []
    test: list[int] = []
    warnings: list[str] = []
    for name, rows in _race_strata(matrix).items():
        if rows.size < 2:
            warnings.append(f"stratum {name} has {rows.size} row(s)")
        shuffled = rows[rng.permutation(rows.size)]
        n_test = round(rows.size * test_fraction)
        test.extend(int(i) for i in shuffled[:n_test])
        train.extend(int(i) for i in shuffled[n_test:])
    return SplitIndices(
        train_rows=tuple(sorted(train)),
        test_rows=tuple(sorted(test)),
        seed=seed,
        strata_column="race",
        warnings=tuple(warnings),
    )


def kfold_indices(n: int, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """Seeded shuffle then contiguous chunks; sizes differ by at most one."""
    if k > n:
        raise FoldError(f"cannot make {k} folds from {n} rows")
    if k < 2:
        raise FoldError(f"need k >= 2 folds, got {k}")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(np.sort(perm[start:start + size]))
        start += size
    return folds


@dataclass(frozen=True)
class GridResult:
    family: ModelFamily
    grid: tuple[dict, ...]
    cv_mse_mean: tuple[float, ...]
    cv_mse_std: tuple[float, ...]
    best_index: int
    best: dict
    fold_assignments: tuple[tuple[int, ...], ...]
    cell_errors: tuple[str | None, ...] = field(default=())

    def to_dict(self) -> dict:
        def _finite(v: float):
            return v if math.isfinite(v) else None

        return {
            "family": self.family.value,
            "grid": [dict(g) for g in self.grid],
            "cv_mse_mean": [_finite(v) for v in self.cv_mse_mean],
            "cv_mse_std": [_finite(v) for v in self.cv_mse_std],
            "best_index": self.best_index,
            "best": dict(self.best),
            "fold_assignments": [list(f) for f in self.fold_assignments],
            "cell_errors": list(self.cell_errors),
        }


def _score_cells_plain(
    family: ModelFamily,
    grid: list[dict],
    X: np.ndarray,
    y: np.ndarray,
    folds: list[np.ndarray],
    seed: int,
) -> tuple[np.ndarray, list[str | None]]:
    n = X.shape[0]
    scores = np.full((len(grid), len(folds)), np.inf)
    errors: list[str | None] = [None] * len(grid)
    for ci, hp in enumerate(grid):
        for fi, fold in enumerate(folds):
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            try:
                model = fit_family(family, X[mask], y[mask], hp, seed=seed)
                scores[ci, fi] = mse(y[fold], predict(model, X[fold]))
            except Exception as exc:  # record and move on
                errors[ci] = f"{type(exc).__name__}: {exc}"
                scores[ci, fi] = np.inf
    return scores, errors


def _score_cells_gbm(
    grid: list[dict],
    X: np.ndarray,
    y: np.ndarray,
    folds: list[np.ndarray],
    seed: int,
) -> tuple[np.ndarray, list[str | None]]:
    """Boosting cells sharing everything but n_rounds reuse one staged fit.

    The first m trees of a longer fit are identical to an m-round fit, so
    scoring prefixes gives bit-identical results to independent fits.
    """
    n = X.shape[0]
    scores = np.full((len(grid), len(folds)), np.inf)
    errors: list[str | None] = [None] * len(grid)
    groups: dict[tuple, list[int]] = {}
    for ci, hp in enumerate(grid):
        key = tuple(sorted((k, v) for k, v in hp.items() if k != "n_rounds"))
        groups.setdefault(key, []).append(ci)
    for cells in groups.values():
        max_rounds = max(int(grid[ci].get("n_rounds", 0)) for ci in cells)
        proto = dict(grid[cells[0]])
        proto["n_rounds"] = max_rounds
        for fi, fold in enumerate(folds):
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            try:
                model = fit_family(ModelFamily.GBM, X[mask], y[mask], proto, seed=seed)
            except Exception as exc:
                msg = f"{type(exc).__name__}: {exc}"
                for ci in cells:
                    errors[ci] = msg
                    scores[ci, fi] = np.inf
                continue
            for ci in cells:
                rounds = int(grid[ci].get("n_rounds", 0))
                pred = clip_predictions(
                    gbm_forward(model.params, X[fold], n_rounds=rounds)
                )
                scores[ci, fi] = mse(y[fold], pred)
    return scores, errors


def grid_search(
    family: ModelFamily,
    grid: list[dict] | None,
    X_train: np.ndarray,
    y_train: np.ndarray,
    k: int = 10,
    seed: int = 0,
) -> GridResult:
    """Pick the grid point minimizing mean k-fold validation MSE.

    Ties break toward the earlier grid entry. Fold assignments are
    seeded and recorded in the result.
    """
    if grid is None:
        grid = DEFAULT_GRIDS[family]
    if not grid:
        raise ValueError("grid must be non-empty")
    X = np.asarray(X_train, dtype=float)
    y = np.asarray(y_train, dtype=float)
    folds = kfold_indices(X.shape[0], k=k, seed=seed)
    if family is ModelFamily.GBM:
        scores, errors = _score_cells_gbm(list(grid), X, y, folds, seed)
    else:
        scores, errors = _score_cells_plain(family, list(grid), X, y, folds, seed)
    with np.errstate(invalid="ignore"):
        means = scores.mean(axis=1)
        stds = scores.std(axis=1)
    best_index = 0
    for i in range(1, len(grid)):
        if means[i] < means[best_index]:
            best_index = i
    return GridResult(
        family=family,
        grid=tuple(dict(g) for g in grid),
        cv_mse_mean=tuple(float(v) for v in means),
        cv_mse_std=tuple(float(v) if math.isfinite(v) else math.inf for v in stds),
        best_index=best_index,
        best=dict(grid[best_index]),
        fold_assignments=tuple(tuple(int(i) for i in f) for f in folds),
        cell_errors=tuple(errors),
    )

"""Least-squares, ridge, and evidence-maximizing Bayesian ridge fits.

All three standardize the features first and keep the intercept
unpenalized. Solves go through orthogonal decompositions (SVD-backed
least squares), so rank-deficient designs get the minimum-norm answer.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from .base import (
    ModelFamily,
    TrainedModel,
    check_xy,
    standardize_apply,
    standardize_fit,
)

BAYES_DEFAULTS = {"alpha0": 1e-6, "beta0": 1e-6, "max_iter": 300, "tol": 1e-8}


def fit_ols(
    X: np.ndarray, y: np.ndarray, schema: tuple[str, ...] | None = None
) -> TrainedModel:
    """Ordinary least squares on z-scored features."""
    X, y = check_xy(X, y)
    n, p = X.shape
    if n < p + 1:
        raise DimensionMismatch(f"need n >= p + 1 rows, got n={n}, p={p}")
    scaler = standardize_fit(X)
    Z = standardize_apply(scaler, X)
    intercept = float(y.mean())
    coef, *_ = np.linalg.lstsq(Z, y - intercept, rcond=None)
    return TrainedModel(
        family=ModelFamily.LINEAR,
        params={"coef": coef, "intercept": intercept},
        hyperparams={},
        schema=tuple(schema) if schema is not None else None,
        scaler=scaler,
    )


def fit_ridge(
    X: np.ndarray,
    y: np.ndarray,
    penalty: float,
    schema: tuple[str, ...] | None = None,
) -> TrainedModel:
    """L2-penalized least squares; solved via the augmented design

        [Z; sqrt(penalty) I] beta = [y - ybar; 0]

    which keeps the orthogonal-decomposition route of the plain solver.
    """
    X, y = check_xy(X, y)
    if penalty < 0:
        raise ValueError(f"penalty must be >= 0, got {penalty}")
    scaler = standardize_fit(X)
    Z = standardize_apply(scaler, X)
    p = Z.shape[1]
    intercept = float(y.mean())
    yc = y - intercept
    if penalty == 0.0:
        coef, *_ = np.linalg.lstsq(Z, yc, rcond=None)
    else:
        A = np.vstack([Z, np.sqrt(penalty) * np.eye(p)])
        b = np.concatenate([yc, np.zeros(p)])
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    return TrainedModel(
        family=ModelFamily.RIDGE,
        params={"coef": coef, "intercept": intercept},
        hyperparams={"penalty": float(penalty)},
        schema=tuple(schema) if schema is not None else None,
        scaler=scaler,
    )


def fit_bayesian_ridge(
    X: np.ndarray,
    y: np.ndarray,
    hp: dict | None = None,
    schema: tuple[str, ...] | None = None,
) -> TrainedModel:
    """Evidence maximization for the Gaussian linear model.

    Alternates the posterior mean
        coef = beta * solve(beta * Z'Z + alpha * I, Z'y)
    with the precision re-estimates
        gamma = sum_i lam_i / (lam_i + alpha),  lam_i = eigvals(beta * Z'Z)
        alpha = gamma / ||coef||^2
        beta  = (n - gamma) / ||y - Z coef||^2
    until the coefficient change drops below tol or max_iter is hit.
    Non-convergence is flagged on the model, not raised.
    """
    X, y = check_xy(X, y)
    n, p = X.shape
    if n < 2:
        raise DimensionMismatch(f"need n >= 2 rows, got n={n}")
    cfg = dict(BAYES_DEFAULTS)
    if hp:
        cfg.update(hp)
    alpha = float(cfg["alpha0"])
    beta = float(cfg["beta0"])
    max_iter = int(cfg["max_iter"])
    tol = float(cfg["tol"])

    scaler = standardize_fit(X)
    Z = standardize_apply(scaler, X)
    intercept = float(y.mean())
    yc = y - intercept

    gram = Z.T @ Z
    zy = Z.T @ yc
    base_eigs = np.linalg.eigvalsh(gram)

    coef = np.zeros(p)
    converged = False
    n_iter = 0
    tiny = np.finfo(float).tiny
    for n_iter in range(1, max_iter + 1):
        new_coef = beta * np.linalg.solve(beta * gram + alpha * np.eye(p), zy)
        eigs = beta * base_eigs
        gamma = float(np.sum(eigs / (eigs + alpha)))
        coef_norm2 = float(new_coef @ new_coef)
        rss = float(np.sum((yc - Z @ new_coef) ** 2))
        alpha = gamma / max(coef_norm2, tiny)
        beta = (n - gamma) / max(rss, tiny)
        delta = float(np.max(np.abs(new_coef - coef))) if p else 0.0
        coef = new_coef
        if delta < tol:
            converged = True
            break
    return TrainedModel(
        family=ModelFamily.BAYESIAN_RIDGE,
        params={
            "coef": coef,
            "intercept": intercept,
            "alpha": float(alpha),
            "beta": float(beta),
            "n_iter": n_iter,
        },
        hyperparams={k: cfg[k] for k in ("alpha0", "beta0", "max_iter", "tol")},
        schema=tuple(schema) if schema is not None else None,
        scaler=scaler,
        flags={"converged": converged},
    )


def linear_forward(params: dict, Z: np.ndarray) -> np.ndarray:
    return Z @ np.asarray(params["coef"], dtype=float) + params["intercept"]

from __future__ import annotations

import numpy as np
import pytest

from warfrev.errors import DivergenceError
from warfrev.models import fit_mlp, predict_raw
from warfrev.models.mlp import forward, init_params, loss, loss_and_grads, train


def finite_difference_grads(params: dict, X: np.ndarray, y: np.ndarray, eps: float = 1e-5) -> dict:
    grads = {}
    for key in ("w1", "b1", "w2"):
        arr = params[key]
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = arr[ix]
            arr[ix] = orig + eps
            up = loss(params, X, y)
            arr[ix] = orig - eps
            down = loss(params, X, y)
            arr[ix] = orig
            g[ix] = (up - down) / (2.0 * eps)
        grads[key] = g
    b2 = params["b2"]
    params["b2"] = b2 + eps
    up = loss(params, X, y)
    params["b2"] = b2 - eps
    down = loss(params, X, y)
    params["b2"] = b2
    grads["b2"] = (up - down) / (2.0 * eps)
    return grads


def max_relative_error(analytic: dict, numeric: dict) -> float:
    worst = 0.0
    for key in ("w1", "b1", "w2", "b2"):
        a = np.asarray(analytic[key], dtype=float)
        b = np.asarray(numeric[key], dtype=float)
        denom = np.maximum(np.abs(a) + np.abs(b), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    return worst


@pytest.mark.parametrize("seed", range(10))
def test_gradient_check_at_initialization(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(8, 3))
    y = rng.normal(size=8)
    params = init_params(3, 5, np.random.default_rng(seed + 100))
    _, analytic = loss_and_grads(params, X, y)
    numeric = finite_difference_grads(params, X, y)
    assert max_relative_error(analytic, numeric) < 1e-4


@pytest.mark.parametrize("seed", range(10))
def test_gradient_check_after_ten_epochs(seed):
    rng = np.random.default_rng(seed + 500)
    X = rng.normal(size=(8, 3))
    y = rng.normal(size=8)
    hp = {"hidden_units": 5, "learning_rate": 1e-2, "max_epochs": 10,
          "patience": 100, "validation_fraction": 0.0}
    params, info = train(X, y, hp, seed=seed)
    assert info["epochs_run"] == 10
    _, analytic = loss_and_grads(params, X, y)
    numeric = finite_difference_grads(params, X, y)
    assert max_relative_error(analytic, numeric) < 1e-4


def test_constant_target_converges():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(24, 4))
    y = np.full(24, 5.0)
    model = fit_mlp(X, y, {"max_epochs": 2000, "patience": 2000,
                           "validation_fraction": 0.0, "learning_rate": 5e-2}, seed=0)
    pred = predict_raw(model, X)
    assert float(np.mean((pred - y) ** 2)) < 1e-3


def test_same_seed_bit_identical():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30) + 5.0
    hp = {"hidden_units": 8, "max_epochs": 50}
    a = fit_mlp(X, y, hp, seed=11)
    b = fit_mlp(X, y, hp, seed=11)
    for key in ("w1", "b1", "w2"):
        assert np.array_equal(a.params[key], b.params[key])
    assert a.params["b2"] == b.params["b2"]


def test_different_seed_differs():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    a = fit_mlp(X, y, {"max_epochs": 20}, seed=1)
    b = fit_mlp(X, y, {"max_epochs": 20}, seed=2)
    assert not np.array_equal(a.params["w1"], b.params["w1"])


def test_divergence_raises():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(20, 3)) * 10
    y = rng.normal(size=20) * 100
    with pytest.raises(DivergenceError):
        fit_mlp(X, y, {"learning_rate": 1e6, "max_epochs": 200,
                       "validation_fraction": 0.0}, seed=0)


def test_early_stopping_keeps_best_validation_weights():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 3))
    y = X @ np.array([1.0, -0.5, 0.3]) + rng.normal(scale=0.1, size=60)
    model = fit_mlp(X, y, {"hidden_units": 8, "max_epochs": 400, "patience": 10}, seed=3)
    assert model.flags["epochs_run"] <= 400
    assert model.flags["best_val_loss"] is not None
    assert np.isfinite(model.flags["best_val_loss"])

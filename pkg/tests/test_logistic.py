import numpy as np
import pytest

from fraudlab.errors import ConfigError, FitError
from fraudlab.models import (LogisticParams, fit_logistic, predict,
                             predict_proba)
from fraudlab.models.logistic import objective_and_grad


def test_gradient_matches_finite_differences():
    # central differences at 20 random points; relative error <= 1e-4
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 3))
    y = (rng.random(40) < 0.4).astype(np.float64)
    w = rng.uniform(0.5, 2.0, size=40)
    eps = 1e-6
    for trial in range(20):
        theta = rng.normal(scale=0.8, size=4)
        _, grad = objective_and_grad(theta, x, y, w, 1.0 / 2.0, True)
        num = np.empty_like(theta)
        for j in range(theta.size):
            up, dn = theta.copy(), theta.copy()
            up[j] += eps
            dn[j] -= eps
            fu, _ = objective_and_grad(up, x, y, w, 1.0 / 2.0, True)
            fd, _ = objective_and_grad(dn, x, y, w, 1.0 / 2.0, True)
            num[j] = (fu - fd) / (2.0 * eps)
        rel = np.abs(grad - num) / np.maximum(1.0, np.abs(num))
        assert float(rel.max()) <= 1e-4


def test_gradient_without_intercept():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(25, 2))
    y = (rng.random(25) < 0.5).astype(np.float64)
    w = np.ones(25)
    theta = rng.normal(size=2)
    _, grad = objective_and_grad(theta, x, y, w, 0.5, False)
    eps = 1e-6
    for j in range(2):
        up, dn = theta.copy(), theta.copy()
        up[j] += eps
        dn[j] -= eps
        fu, _ = objective_and_grad(up, x, y, w, 0.5, False)
        fd, _ = objective_and_grad(dn, x, y, w, 0.5, False)
        assert abs(grad[j] - (fu - fd) / (2 * eps)) <= 1e-4 * max(
            1.0, abs(grad[j]))


def test_fit_converges_on_blobs(blob_xy):
    x, y = blob_xy
    model = fit_logistic(x, y)
    assert model.converged
    assert model.grad_inf_norm <= model.params.tol
    assert 0 < model.n_iter <= model.params.max_iter
    acc = float(np.mean(predict(model, x) == y))
    assert acc > 0.85


def test_fit_separable_direction():
    # one informative feature: the learned coefficient must point with it
    rng = np.random.default_rng(1)
    x = np.column_stack([np.concatenate([rng.normal(-2, 0.3, 100),
                                         rng.normal(2, 0.3, 100)]),
                         rng.normal(size=200)])
    y = np.concatenate([np.zeros(100, np.int8), np.ones(100, np.int8)])
    model = fit_logistic(x, y)
    assert model.coef[0] > 1.0
    assert abs(model.coef[1]) < abs(model.coef[0]) / 4
    p = predict_proba(model, np.array([[-2.0, 0.0], [2.0, 0.0]]))
    assert p[0] < 0.05 < 0.95 < p[1]


def test_fit_label_symmetry(blob_xy):
    # flipping labels must flip the decision function's sign
    x, y = blob_xy
    a = fit_logistic(x, y)
    b = fit_logistic(x, 1 - y)
    assert np.allclose(a.coef, -b.coef, atol=1e-3)
    assert a.intercept == pytest.approx(-b.intercept, abs=1e-3)


def test_weight_doubling_equals_row_doubling(blob_xy):
    # doubling every weight matches duplicating every row when the
    # penalty is scaled to keep the objective proportional
    x, y = blob_xy
    w2 = np.full(y.size, 2.0)
    a = fit_logistic(x, y, weights=w2, params=LogisticParams(l2_c=0.5))
    b = fit_logistic(np.vstack([x, x]), np.concatenate([y, y]),
                     params=LogisticParams(l2_c=0.5))
    assert np.allclose(a.coef, b.coef, atol=1e-4)
    assert a.intercept == pytest.approx(b.intercept, abs=1e-4)


def test_stronger_penalty_shrinks_coefficients(blob_xy):
    x, y = blob_xy
    loose = fit_logistic(x, y, params=LogisticParams(l2_c=100.0))
    tight = fit_logistic(x, y, params=LogisticParams(l2_c=1e-3))
    assert np.linalg.norm(tight.coef) < np.linalg.norm(loose.coef)


def test_intercept_not_penalized():
    # all-zero features: the intercept alone should match the class prior
    x = np.zeros((100, 2))
    y = np.concatenate([np.zeros(25, np.int8), np.ones(75, np.int8)])
    model = fit_logistic(x, y, params=LogisticParams(l2_c=1e-6))
    p = predict_proba(model, np.zeros((1, 2)))[0]
    assert p == pytest.approx(0.75, abs=1e-3)
    assert np.allclose(model.coef, 0.0, atol=1e-6)


def test_max_iter_caps_work(blob_xy):
    x, y = blob_xy
    model = fit_logistic(x, y, params=LogisticParams(max_iter=2))
    assert model.n_iter <= 2


def test_single_class_rejected():
    x = np.random.default_rng(0).normal(size=(10, 2))
    with pytest.raises(FitError):
        fit_logistic(x, np.zeros(10, dtype=np.int8))


def test_logistic_params_validation():
    with pytest.raises(ConfigError):
        LogisticParams(max_iter=0)
    with pytest.raises(ConfigError):
        LogisticParams(tol=0.0)
    with pytest.raises(ConfigError):
        LogisticParams(l2_c=0.0)


def test_deterministic(blob_xy):
    x, y = blob_xy
    a = fit_logistic(x, y)
    b = fit_logistic(x, y)
    assert np.array_equal(a.coef, b.coef)
    assert a.intercept == b.intercept

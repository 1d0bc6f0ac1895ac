import math

import numpy as np
import pytest

from fraudlab.errors import ConfigError, FitError
from fraudlab.models import GbtParams, fit_gbt, predict, predict_proba


def test_train_loss_never_increases(blob_xy):
    x, y = blob_xy
    model = fit_gbt(x, y, params=GbtParams(n_rounds=20))
    losses = np.asarray(model.train_log_loss)
    assert losses.size == 20
    assert np.all(np.diff(losses) <= 1e-12)
    assert losses[-1] < losses[0]


def test_base_score_is_weighted_log_odds(blob_xy):
    x, y = blob_xy
    w = np.random.default_rng(2).uniform(0.5, 2.0, size=y.size)
    model = fit_gbt(x, y, weights=w, params=GbtParams(n_rounds=1))
    p_bar = float(np.sum(w * y)) / float(np.sum(w))
    assert model.base_score_logit == pytest.approx(
        math.log(p_bar / (1 - p_bar)), abs=1e-12)


def test_base_score_includes_scale_pos_weight(blob_xy):
    x, y = blob_xy
    spw = 3.0
    model = fit_gbt(x, y, params=GbtParams(n_rounds=1, scale_pos_weight=spw))
    eff = np.where(y == 1, spw, 1.0)
    p_bar = float(np.sum(eff * y)) / float(np.sum(eff))
    assert model.base_score_logit == pytest.approx(
        math.log(p_bar / (1 - p_bar)), abs=1e-12)


def test_scale_pos_weight_raises_minority_probability():
    rng = np.random.default_rng(7)
    x = np.vstack([rng.normal(0, 1, (300, 3)), rng.normal(1.2, 1, (30, 3))])
    y = np.concatenate([np.zeros(300, np.int8), np.ones(30, np.int8)])
    plain = fit_gbt(x, y, params=GbtParams(n_rounds=10))
    boosted = fit_gbt(x, y, params=GbtParams(n_rounds=10,
                                             scale_pos_weight=10.0))
    pos = x[y == 1]
    assert float(predict_proba(boosted, pos).mean()) > \
        float(predict_proba(plain, pos).mean())


def test_fits_blobs_well(blob_xy):
    x, y = blob_xy
    model = fit_gbt(x, y, params=GbtParams(n_rounds=40))
    acc = float(np.mean(predict(model, x) == y))
    assert acc > 0.9


def test_depth_one_trees_are_stumps(blob_xy):
    x, y = blob_xy
    model = fit_gbt(x, y, params=GbtParams(n_rounds=5, max_depth=1))
    for rnd in model.trees:
        assert rnd.feature.size <= 3


def test_learning_rate_scales_logit_steps(blob_xy):
    x, y = blob_xy
    slow = fit_gbt(x, y, params=GbtParams(n_rounds=1, learning_rate=0.05))
    fast = fit_gbt(x, y, params=GbtParams(n_rounds=1, learning_rate=0.5))
    # identical single tree (gradients agree at round 0), scaled step
    assert np.array_equal(slow.trees[0].value, fast.trees[0].value)
    dz_slow = slow.decision_logit(x) - slow.base_score_logit
    dz_fast = fast.decision_logit(x) - fast.base_score_logit
    assert np.allclose(dz_fast, 10.0 * dz_slow, atol=1e-12, rtol=0.0)


def test_deterministic_without_seed_parameter(blob_xy):
    # boosting has no randomness; two fits agree bitwise
    x, y = blob_xy
    a = fit_gbt(x, y, params=GbtParams(n_rounds=8))
    b = fit_gbt(x, y, params=GbtParams(n_rounds=8))
    assert np.array_equal(predict_proba(a, x), predict_proba(b, x))
    assert a.train_log_loss == b.train_log_loss


def test_gbt_params_validation():
    with pytest.raises(ConfigError):
        GbtParams(n_rounds=0)
    with pytest.raises(ConfigError):
        GbtParams(max_depth=0)
    with pytest.raises(ConfigError):
        GbtParams(learning_rate=0.0)
    with pytest.raises(ConfigError):
        GbtParams(learning_rate=1.5)
    with pytest.raises(ConfigError):
        GbtParams(scale_pos_weight=0.0)
    with pytest.raises(ConfigError):
        GbtParams(l2_leaf=-0.1)
    with pytest.raises(ConfigError):
        GbtParams(min_child_weight=-1.0)


def test_single_class_rejected():
    x = np.zeros((8, 2))
    with pytest.raises(FitError):
        fit_gbt(x, np.ones(8, dtype=np.int8))

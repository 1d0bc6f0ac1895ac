"""Gradient-boosted regression trees on logistic loss, second-order style.

Each round fits a small tree to the current gradient/hessian pairs
(g = p - y, h = p(1-p), scaled by scale_pos_weight for positive rows and
by the sample weight always). Leaf values are -sum(g) / (sum(h) + l2_leaf)
and enter the logit with a learning-rate multiplier. The starting logit is
the log-odds of the weighted base rate, which is exactly the constant
minimizing the round-zero loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import ConfigError
from . import common


@dataclass(frozen=True)
class GbtParams:
    n_rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    scale_pos_weight: float = 1.0
    l2_leaf: float = 1.0
    min_child_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.n_rounds < 1:
            raise ConfigError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigError(
                f"learning_rate must be in (0, 1], got {self.learning_rate}"
            )
        if not self.scale_pos_weight > 0.0:
            raise ConfigError(
                f"scale_pos_weight must be > 0, got {self.scale_pos_weight}"
            )
        if self.l2_leaf < 0.0:
            raise ConfigError(f"l2_leaf must be >= 0, got {self.l2_leaf}")
        if self.min_child_weight < 0.0:
            raise ConfigError(
                f"min_child_weight must be >= 0, got {self.min_child_weight}"
            )


@dataclass(frozen=True)
class GbtRound:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


@dataclass(frozen=True)
class GbtModel:
    kind = "gbt"
    params: GbtParams
    base_score_logit: float
    trees: tuple[GbtRound, ...]
    train_log_loss: tuple[float, ...]
    n_features: int
    feature_columns: tuple[str, ...] = field(default_factory=common.default_feature_columns)

    def decision_logit(self, x) -> np.ndarray:
        x = common.check_predict_input(x, self.n_features)
        z = np.full(x.shape[0], self.base_score_logit, dtype=np.float64)
        for t in self.trees:
            leaf = kernels.apply_tree(t.feature, t.threshold, t.left, t.right, x)
            z += self.params.learning_rate * t.value[leaf]
        return z

    def predict_proba(self, x) -> np.ndarray:
        return common.sigmoid(self.decision_logit(x))


def fit_gbt(x, y, weights=None, params: GbtParams | None = None) -> GbtModel:
    if params is None:
        params = GbtParams()
    x, y = common.check_xy(x, y, require_both_classes=True)
    n, f = x.shape
    w = common.check_weights(weights, n)
    yf = y.astype(np.float64)
    eff = w * np.where(y == 1, params.scale_pos_weight, 1.0)

    p_bar = float(eff @ yf) / float(eff.sum())
    base = math.log(p_bar / (1.0 - p_bar))

    xt, order = common.presort_columns(x)
    z = np.full(n, base, dtype=np.float64)
    trees = []
    losses = []
    eff_total = float(eff.sum())
    for _ in range(params.n_rounds):
        p = common.sigmoid(z)
        grad = eff * (p - yf)
        hess = eff * p * (1.0 - p)
        feat, thr, left, right, value, n_nodes = kernels.build_gbt_tree(
            xt, grad, hess, order, params.max_depth,
            params.min_child_weight, params.l2_leaf,
        )
        sl = slice(0, n_nodes)
        rnd = GbtRound(
            feature=feat[sl].copy(),
            threshold=thr[sl].copy(),
            left=left[sl].copy(),
            right=right[sl].copy(),
            value=value[sl].copy(),
        )
        trees.append(rnd)
        leaf = kernels.apply_tree(rnd.feature, rnd.threshold, rnd.left,
                                  rnd.right, x)
        z = z + params.learning_rate * rnd.value[leaf]
        losses.append(float(eff @ common.log_loss_terms(z, yf)) / eff_total)

    return GbtModel(
        params=params,
        base_score_logit=base,
        trees=tuple(trees),
        train_log_loss=tuple(losses),
        n_features=f,
    )

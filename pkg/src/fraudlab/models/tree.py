"""CART decision tree with Gini impurity and midpoint thresholds.

Rows with value <= threshold go left. Candidate thresholds sit midway
between consecutive distinct sorted values; the best split maximizes the
weighted impurity decrease, with ties broken toward the lower feature
index and then the lower threshold. Leaves keep per-class weight totals
so probability output is the leaf class-1 weight fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import ConfigError, DataError
from . import common


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str = "all"
    seed: int = 42

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ConfigError(
                f"min_samples_split must be >= 2, got {self.min_samples_split}"
            )
        if self.min_samples_leaf < 1:
            raise ConfigError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )
        if self.max_features not in ("all", "sqrt"):
            raise ConfigError(
                f"max_features must be 'all' or 'sqrt', got {self.max_features!r}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


def gini_impurity(weight_totals) -> float:
    """1 - sum((w_c / W)^2) over per-class weight totals."""
    w = np.asarray(weight_totals, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DataError("weight totals must be a non-empty 1-d sequence")
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise DataError("weight totals must be finite and non-negative")
    total = float(w.sum())
    if total <= 0.0:
        raise DataError("total weight must be positive")
    frac = w / total
    return float(1.0 - np.sum(frac * frac))


def n_subset_features(max_features: str, n_features: int) -> int:
    if max_features == "sqrt":
        return int(math.ceil(math.sqrt(n_features)))
    return n_features


def best_split(x, y, weights=None, feature_subset=None, min_samples_leaf: int = 1):
    """Best (feature_index, threshold, impurity_decrease) or None.

    None means no candidate split lowers the weighted Gini, so the caller
    should make a leaf.
    """
    x, y = common.check_xy(x, y)
    n, f = x.shape
    if n < 2:
        return None
    w = common.check_weights(weights, n)
    if feature_subset is None:
        feats = range(f)
    else:
        feats = [int(j) for j in feature_subset]
        if any(j < 0 or j >= f for j in feats):
            raise ConfigError(f"feature subset {feats} out of range for {f} columns")

    xt, order = common.presort_columns(x)
    mult = np.ones(n, dtype=np.int32)
    yf = y.astype(np.float64)
    tot_w1 = float(np.sum(w * yf))
    tot_w0 = float(np.sum(w)) - tot_w1

    best = None
    for j in feats:
        dec, thr = kernels.gini_scan(
            xt, order, j, 0, n, y.astype(np.uint8), w, mult,
            min_samples_leaf, tot_w0, tot_w1, n,
        )
        if dec > 0.0 and (best is None or dec > best[2]):
            best = (j, thr, dec)
    return best


@dataclass(frozen=True)
class TreeModel:
    kind = "tree"
    params: TreeParams
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_w0: np.ndarray
    leaf_w1: np.ndarray
    n_features: int
    feature_columns: tuple[str, ...] = field(default_factory=common.default_feature_columns)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def predict_proba(self, x) -> np.ndarray:
        x = common.check_predict_input(x, self.n_features)
        leaf = kernels.apply_tree(self.feature, self.threshold, self.left,
                                  self.right, x)
        w0 = self.leaf_w0[leaf]
        w1 = self.leaf_w1[leaf]
        return w1 / (w0 + w1)


def fit_tree(x, y, weights=None, params: TreeParams | None = None,
             _presort=None) -> TreeModel:
    """Grow a CART tree; weights scale each row's Gini contribution."""
    if params is None:
        params = TreeParams()
    x, y = common.check_xy(x, y)
    n, f = x.shape
    w = common.check_weights(weights, n)
    xt, order = _presort if _presort is not None else common.presort_columns(x)
    mult = np.ones(n, dtype=np.int32)
    return _fit_from_kernel(xt, y, w, mult, order, params, f)


def _fit_from_kernel(xt, y, w, mult, order, params: TreeParams,
                     n_features: int) -> TreeModel:
    max_depth = -1 if params.max_depth is None else params.max_depth
    feature, threshold, left, right, w0, w1, n_nodes = kernels.build_gini_tree(
        xt, y.astype(np.uint8), w, mult, order,
        max_depth, params.min_samples_split, params.min_samples_leaf,
        n_subset_features(params.max_features, n_features),
        np.uint64(params.seed & ((1 << 64) - 1)),
    )
    sl = slice(0, n_nodes)
    return TreeModel(
        params=params,
        feature=feature[sl].copy(),
        threshold=threshold[sl].copy(),
        left=left[sl].copy(),
        right=right[sl].copy(),
        leaf_w0=w0[sl].copy(),
        leaf_w1=w1[sl].copy(),
        n_features=n_features,
    )

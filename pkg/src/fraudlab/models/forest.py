"""Bagged ensemble of CART trees.

Each tree trains on an n-draw bootstrap resample expressed as per-row
multiplicity counts, which avoids materializing the resampled matrix while
leaving split statistics identical. Per-tree randomness derives from
(seed, tree_index) so the ensemble is reproducible regardless of build
order. Prediction is the arithmetic mean of the trees' class-1 leaf
fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..seeding import derive_seed
from . import common
from .tree import TreeModel, TreeParams, _fit_from_kernel


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int
    tree: TreeParams = TreeParams(max_features="sqrt")
    bootstrap: bool = True
    seed: int = 42

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ConfigError(
                f"n_estimators must be >= 1, got {self.n_estimators}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class ForestModel:
    kind = "forest"
    params: ForestParams
    trees: tuple[TreeModel, ...]
    n_features: int
    feature_columns: tuple[str, ...] = field(default_factory=common.default_feature_columns)

    def predict_proba(self, x) -> np.ndarray:
        x = common.check_predict_input(x, self.n_features)
        acc = np.zeros(x.shape[0], dtype=np.float64)
        for t in self.trees:
            acc += t.predict_proba(x)
        return acc / len(self.trees)


def _tree_streams(seed: int, index: int) -> tuple[int, int]:
    """(bootstrap seed, node feature-subset seed) for one tree."""
    state = np.random.SeedSequence(
        [seed & ((1 << 63) - 1), index]
    ).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def fit_forest(x, y, weights=None, params: ForestParams | None = None,
               _presort=None) -> ForestModel:
    if params is None:
        raise ConfigError("ForestParams required (n_estimators has no default)")
    x, y = common.check_xy(x, y)
    n, f = x.shape
    w = common.check_weights(weights, n)
    xt, order = _presort if _presort is not None else common.presort_columns(x)

    trees = []
    for t in range(params.n_estimators):
        boot_seed, subset_seed = _tree_streams(params.seed, t)
        if params.bootstrap:
            rng = np.random.default_rng(boot_seed)
            mult = np.bincount(rng.integers(0, n, size=n),
                               minlength=n).astype(np.int32)
        else:
            mult = np.ones(n, dtype=np.int32)
        tree_params = TreeParams(
            max_depth=params.tree.max_depth,
            min_samples_split=params.tree.min_samples_split,
            min_samples_leaf=params.tree.min_samples_leaf,
            max_features=params.tree.max_features,
            seed=subset_seed,
        )
        trees.append(_fit_from_kernel(xt, y, w, mult, order, tree_params, f))
    return ForestModel(params=params, trees=tuple(trees), n_features=f)

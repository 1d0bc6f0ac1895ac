"""The four classifiers behind the pipeline, a shared predict interface,
and JSON persistence."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .forest import ForestModel, ForestParams, fit_forest
from .gbt import GbtModel, GbtParams, fit_gbt
from .logistic import LogisticModel, LogisticParams, fit_logistic
from .persist import load_model, model_from_dict, model_to_dict, save_model
from .tree import TreeModel, TreeParams, best_split, fit_tree, gini_impurity

__all__ = [
    "ForestModel", "ForestParams", "fit_forest",
    "GbtModel", "GbtParams", "fit_gbt",
    "LogisticModel", "LogisticParams", "fit_logistic",
    "TreeModel", "TreeParams", "best_split", "fit_tree", "gini_impurity",
    "save_model", "load_model", "model_to_dict", "model_from_dict",
    "predict", "predict_proba",
]


def predict_proba(model, x) -> np.ndarray:
    """Per-row probability of class 1 under any fitted model."""
    return model.predict_proba(x)


def predict(model, x, threshold: float = 0.5) -> np.ndarray:
    """Binary labels: 1 wherever predict_proba >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"threshold must be in (0, 1), got {threshold}")
    return (predict_proba(model, x) >= threshold).astype(np.int8)

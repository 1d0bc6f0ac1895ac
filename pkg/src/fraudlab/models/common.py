"""Shared plumbing for the classifiers: input validation, presorting,
and the stable sigmoid used by the logistic and boosted models."""

from __future__ import annotations

import numpy as np

from ..errors import DataError, FitError
from ..prep import FEATURE_COLUMNS


def check_xy(x, y, require_both_classes: bool = False):
    """Validate and coerce training inputs to (n, f) float64 and 0/1 int8."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] == 0:
        raise FitError(f"feature matrix must be 2-d and non-empty, got shape {x.shape}")
    if y.ndim != 1 or y.size != x.shape[0]:
        raise FitError(f"labels shape {y.shape} does not match {x.shape[0]} rows")
    if not np.all(np.isfinite(x)):
        raise FitError("feature matrix contains non-finite values")
    vals = np.unique(y)
    if not np.all(np.isin(vals, (0, 1))):
        raise FitError(f"labels must be 0/1, found values {vals.tolist()}")
    if require_both_classes and vals.size < 2:
        raise FitError("training data contains a single class; need both")
    return x, y.astype(np.int8)


def check_weights(weights, n: int) -> np.ndarray:
    """All-ones when absent; otherwise a positive float64 vector of length n."""
    if weights is None:
        return np.ones(n, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size != n:
        raise FitError(f"sample weights shape {w.shape} does not match {n} rows")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise FitError("sample weights must be finite and strictly positive")
    return w


def check_predict_input(x, n_features: int) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != n_features:
        raise DataError(
            f"prediction input must have {n_features} columns, got shape {x.shape}"
        )
    return x


def presort_columns(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column-major copy plus stable per-feature sort order.

    Computed once per training set and shared across every tree grown on it;
    the stable sort fixes tie order so results are reproducible.
    """
    xt = np.ascontiguousarray(x.T)
    order = np.argsort(xt, axis=1, kind="stable").astype(np.int32)
    return xt, np.ascontiguousarray(order)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """1 / (1 + exp(-z)) computed without overflow for large |z|."""
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss_terms(z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-row logistic loss from logits: max(z,0) - z*y + log(1+exp(-|z|))."""
    return np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))


def default_feature_columns() -> tuple[str, ...]:
    return tuple(FEATURE_COLUMNS)

"""Stratified cross-validation and exhaustive grid search for the forest.

Model selection optimizes the fraud-class F1 on held-out folds. Candidate
failures are recorded and excluded instead of aborting the search; only a
grid with no surviving candidate raises.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError, FitError, SearchError, StratificationError
from .metrics import confusion_matrix, metrics_from_cm
from .models import ForestModel, ForestParams, TreeParams, fit_forest
from .models.common import presort_columns
from .resample import SmoteConfig, smote
from .seeding import derive_seed


def balanced_class_weights(y) -> dict[int, float]:
    """w_c = n / (2 * count_c); each class ends up with total weight n/2."""
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise DataError("labels must be a non-empty 1-d array")
    labels, counts = np.unique(y, return_counts=True)
    if labels.size < 2:
        raise DataError(
            f"balanced weights need both classes, found only {labels.tolist()}"
        )
    n = y.size
    return {int(c): n / (2.0 * int(k)) for c, k in zip(labels, counts)}


def sample_weights(y, class_weights: dict[int, float]) -> np.ndarray:
    """Per-row weight vector realizing a per-class weight mapping."""
    y = np.asarray(y)
    out = np.empty(y.size, dtype=np.float64)
    for c, w in class_weights.items():
        out[y == c] = w
    return out


def stratified_kfold(y, k: int, seed: int) -> np.ndarray:
    """Fold index per row in [0, k); per class, fold sizes differ by <= 1."""
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise DataError("labels must be a non-empty 1-d array")
    folds = np.empty(y.size, dtype=np.int64)
    for label in np.unique(y):
        rows = np.flatnonzero(y == label)
        if rows.size < k:
            raise StratificationError(
                f"class {int(label)} has {rows.size} rows; cannot fill {k} folds"
            )
        rng = np.random.default_rng(np.random.SeedSequence([seed, int(label)]))
        perm = rng.permutation(rows.size)
        # round-robin over the shuffled order keeps fold sizes within 1
        folds[rows[perm]] = np.arange(rows.size) % k
    return folds


def fold_splits(folds: np.ndarray, k: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """(train_indices, test_indices) per fold, ascending row order."""
    out = []
    for fi in range(k):
        test = np.flatnonzero(folds == fi)
        train = np.flatnonzero(folds != fi)
        out.append((train, test))
    return out


@dataclass(frozen=True)
class ParamGrid:
    """Named axes over forest settings plus the class_weight mode."""

    axes: dict

    def __post_init__(self) -> None:
        if not isinstance(self.axes, dict) or not self.axes:
            raise ConfigError("grid must be a non-empty mapping of axes")
        for name, values in self.axes.items():
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ConfigError(f"grid axis {name!r} must be a non-empty list")


_FOREST_AXES = (
    "n_estimators", "max_depth", "min_samples_split",
    "min_samples_leaf", "max_features", "class_weight", "bootstrap",
)


def default_forest_grid() -> ParamGrid:
    return ParamGrid({
        "n_estimators": [50, 100],
        "max_depth": [None, 10],
        "min_samples_split": [2],
        "min_samples_leaf": [1, 2],
        "max_features": ["sqrt"],
        "class_weight": ["balanced"],
    })


def expand_grid(grid: ParamGrid) -> list[dict]:
    """Cartesian product in axis-declaration order, last axis fastest."""
    names = list(grid.axes)
    combos = itertools.product(*(grid.axes[n] for n in names))
    return [dict(zip(names, values)) for values in combos]


def _normalize_class_weight(value):
    if value is None:
        return None
    if isinstance(value, str):
        low = value.lower()
        if low == "none":
            return None
        if low == "balanced":
            return "balanced"
    raise ConfigError(
        f"class_weight must be 'balanced' or none, got {value!r}"
    )


def _candidate_forest_params(cand: dict, seed: int) -> tuple[ForestParams, object]:
    unknown = set(cand) - set(_FOREST_AXES)
    if unknown:
        raise ConfigError(f"unknown grid axes: {sorted(unknown)}")
    cw = _normalize_class_weight(cand.get("class_weight"))
    tree = TreeParams(
        max_depth=cand.get("max_depth"),
        min_samples_split=int(cand.get("min_samples_split", 2)),
        min_samples_leaf=int(cand.get("min_samples_leaf", 1)),
        max_features=str(cand.get("max_features", "sqrt")),
    )
    params = ForestParams(
        n_estimators=int(cand["n_estimators"]) if "n_estimators" in cand
        else 100,
        tree=tree,
        bootstrap=bool(cand.get("bootstrap", True)),
        seed=seed,
    )
    return params, cw


@dataclass(frozen=True)
class CandidateResult:
    params: dict
    fold_f1: tuple[float, ...]
    mean_f1: float | None
    fit_seconds: float
    eval_seconds: float
    error: str | None = None

    @property
    def status(self) -> str:
        return "ok" if self.error is None else "failed"


@dataclass(frozen=True)
class GridSearchResult:
    candidates: tuple[CandidateResult, ...]
    best_index: int
    best_params: dict
    model: ForestModel
    k: int
    seed: int
    n_fits: int

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "n_candidates": len(self.candidates),
            "n_fits": self.n_fits,
            "best_index": self.best_index,
            "best_params": self.best_params,
            "candidates": [
                {
                    "params": c.params,
                    "fold_f1": list(c.fold_f1),
                    "mean_f1": c.mean_f1,
                    "fit_seconds": c.fit_seconds,
                    "eval_seconds": c.eval_seconds,
                    "status": c.status,
                    **({"error": c.error} if c.error else {}),
                }
                for c in self.candidates
            ],
        }


def _fraud_f1(y_true, y_pred) -> float:
    return metrics_from_cm(confusion_matrix(y_true, y_pred)).class1.f1


def grid_search(x, y, grid: ParamGrid | None = None, k: int = 3,
                seed: int = 42,
                smote_config: SmoteConfig | None = None) -> GridSearchResult:
    """Exhaustive search over the grid, selecting on mean fraud-class F1.

    When smote_config is given, each fold's training part (and the final
    refit set) is resampled independently, so held-out rows never influence
    the synthetic points they are scored against.
    """
    if grid is None:
        grid = default_forest_grid()
    candidates = expand_grid(grid)
    # surface axis typos before spending time on fits
    for cand in candidates:
        _candidate_forest_params(cand, seed=0)

    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y)
    folds = stratified_kfold(y, k, seed)

    prepared = []
    for fi, (train_idx, test_idx) in enumerate(fold_splits(folds, k)):
        if np.intersect1d(train_idx, test_idx).size != 0:
            raise StratificationError(f"fold {fi} train/test sets overlap")
        x_tr, y_tr = x[train_idx], y[train_idx]
        if smote_config is not None:
            cfg = replace(smote_config,
                          seed=derive_seed(smote_config.seed, fi))
            x_tr, y_tr = smote(x_tr, y_tr, cfg)
        xt, order = presort_columns(x_tr)
        prepared.append((x_tr, y_tr, xt, order, test_idx))

    results = []
    n_fits = 0
    for ci, cand in enumerate(candidates):
        fold_f1: list[float] = []
        fit_s = 0.0
        eval_s = 0.0
        error = None
        for fi, (x_tr, y_tr, xt, order, test_idx) in enumerate(prepared):
            params, cw = _candidate_forest_params(
                cand, seed=derive_seed(seed, ci, fi))
            w = sample_weights(y_tr, balanced_class_weights(y_tr)) \
                if cw == "balanced" else None
            try:
                t0 = time.perf_counter()
                model = fit_forest(x_tr, y_tr, w, params, _presort=(xt, order))
                fit_s += time.perf_counter() - t0
                n_fits += 1
                t0 = time.perf_counter()
                pred = (model.predict_proba(x[test_idx]) >= 0.5).astype(np.int8)
                fold_f1.append(_fraud_f1(y[test_idx], pred))
                eval_s += time.perf_counter() - t0
            except FitError as exc:
                error = f"fold {fi}: {exc}"
                break
        mean_f1 = float(np.mean(fold_f1)) if error is None else None
        results.append(CandidateResult(
            params=dict(cand),
            fold_f1=tuple(fold_f1),
            mean_f1=mean_f1,
            fit_seconds=fit_s,
            eval_seconds=eval_s,
            error=error,
        ))

    best_index = -1
    best_mean = -1.0
    for ci, res in enumerate(results):
        if res.mean_f1 is not None and res.mean_f1 > best_mean:
            best_index = ci
            best_mean = res.mean_f1
    if best_index < 0:
        raise SearchError(
            "every grid candidate failed; see per-candidate errors"
        )

    x_fit, y_fit = x, y
    if smote_config is not None:
        cfg = replace(smote_config, seed=derive_seed(smote_config.seed, k))
        x_fit, y_fit = smote(x_fit, y_fit, cfg)
    params, cw = _candidate_forest_params(
        candidates[best_index], seed=derive_seed(seed, best_index, k))
    w = sample_weights(y_fit, balanced_class_weights(y_fit)) \
        if cw == "balanced" else None
    model = fit_forest(x_fit, y_fit, w, params)
    n_fits += 1

    return GridSearchResult(
        candidates=tuple(results),
        best_index=best_index,
        best_params=dict(candidates[best_index]),
        model=model,
        k=k,
        seed=seed,
        n_fits=n_fits,
    )

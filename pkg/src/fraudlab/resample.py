"""Synthetic minority oversampling.

New minority rows are drawn on the segment between a real minority row and
one of its k nearest minority neighbours (Euclidean distance in raw feature
space). Original rows are kept first and untouched; synthetic rows are
appended after them with the minority label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, ResampleError


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 42

    def __post_init__(self) -> None:
        if self.k_neighbors < 1:
            raise ConfigError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if not 0.0 < self.target_ratio <= 1.0:
            raise ConfigError(
                f"target_ratio must be in (0, 1], got {self.target_ratio}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


def _split_classes(y: np.ndarray) -> tuple[int, np.ndarray, int, np.ndarray]:
    """(minority label, minority rows, majority label, majority rows)."""
    y = np.asarray(y)
    labels, counts = np.unique(y, return_counts=True)
    if labels.size < 2:
        raise ResampleError(
            f"oversampling needs two classes, found only {labels.tolist()}"
        )
    if labels.size > 2:
        raise ResampleError(f"expected binary labels, found {labels.tolist()}")
    # On an exact tie the positive class is treated as the minority.
    if counts[0] < counts[1]:
        mi, ma = 0, 1
    else:
        mi, ma = 1, 0
    return (
        int(labels[mi]),
        np.flatnonzero(y == labels[mi]),
        int(labels[ma]),
        np.flatnonzero(y == labels[ma]),
    )


def minority_knn(
    x: np.ndarray, y: np.ndarray, k_neighbors: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest minority neighbours of each minority row.

    Returns (minority row indices into x, (m, k) matrix of neighbour
    positions within the minority subset). Distances are Euclidean; ties
    resolve to the lower row position so results are deterministic.
    """
    if k_neighbors < 1:
        raise ConfigError(f"k_neighbors must be >= 1, got {k_neighbors}")
    _, minority_rows, _, _ = _split_classes(y)
    m = minority_rows.size
    if m < 2:
        raise ResampleError(f"minority class has {m} rows; need at least 2")
    if k_neighbors > m - 1:
        raise ConfigError(
            f"k_neighbors={k_neighbors} but the minority class has only "
            f"{m} rows ({m - 1} possible neighbours)"
        )
    pts = np.ascontiguousarray(np.asarray(x, dtype=np.float64)[minority_rows])
    return minority_rows, kernels.knn_brute(pts, k_neighbors)


def smote(
    x: np.ndarray, y: np.ndarray, config: SmoteConfig | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Oversample the minority class up to target_ratio * majority count."""
    if config is None:
        config = SmoteConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ResampleError(
            f"feature matrix shape {x.shape} does not match {y.size} labels"
        )
    if not np.all(np.isfinite(x)):
        raise ResampleError("features must be finite for neighbour search")

    minority_label, minority_rows, _, majority_rows = _split_classes(y)
    target = round(config.target_ratio * majority_rows.size)
    n_new = target - minority_rows.size
    if n_new <= 0:
        return x.copy(), y.copy()

    _, neighbors = minority_knn(x, y, config.k_neighbors)
    base = x[minority_rows]

    rng = np.random.default_rng(config.seed)
    pick = rng.integers(0, minority_rows.size, size=n_new)
    slot = rng.integers(0, config.k_neighbors, size=n_new)
    u = rng.random(n_new)

    anchors = base[pick]
    mates = base[neighbors[pick, slot]]
    synthetic = anchors + u[:, None] * (mates - anchors)

    x_out = np.vstack([x, synthetic])
    y_out = np.concatenate([y, np.full(n_new, minority_label, dtype=y.dtype)])
    return x_out, y_out

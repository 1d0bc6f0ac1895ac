"""Feature preparation and stratified splitting.

Turns a transaction dataset into a dense numeric matrix and carves it into
train and test partitions that preserve the class mix. All quotas use
round-half-even so repeated splits of the same data are stable and unbiased.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, StratificationError
from .txdata import Dataset, TxType

# Model inputs, in column order. Identifier-like fields (account ids, the
# time step, the rule-based flag) are dropped on purpose: ids do not
# generalise and the flag is an output of another detector.
FEATURE_COLUMNS = (
    "type_code",
    "amount",
    "old_balance_orig",
    "new_balance_orig",
    "old_balance_dest",
    "new_balance_dest",
)


def encode_type(tx_type: TxType | str) -> int:
    """Integer code for a transaction type (alphabetical order of names)."""
    if isinstance(tx_type, str):
        tx_type = TxType.parse(tx_type)
    if not isinstance(tx_type, TxType):
        raise DataError(f"cannot encode transaction type {tx_type!r}")
    return int(tx_type)


def select_features(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Build the (n, 6) float64 feature matrix and the 0/1 label vector."""
    n = len(dataset)
    if n == 0:
        raise DataError("cannot build features from an empty dataset")
    x = np.empty((n, len(FEATURE_COLUMNS)), dtype=np.float64)
    x[:, 0] = dataset.tx_type
    x[:, 1] = dataset.amount
    x[:, 2] = dataset.old_balance_orig
    x[:, 3] = dataset.new_balance_orig
    x[:, 4] = dataset.old_balance_dest
    x[:, 5] = dataset.new_balance_dest
    y = dataset.is_fraud.astype(np.int8)
    return x, y


def _check_labels(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise DataError("labels must be a non-empty 1-d array")
    vals = np.unique(y)
    if not np.all(np.isin(vals, (0, 1))):
        raise DataError(f"labels must be 0/1, found values {vals.tolist()}")
    return y.astype(np.int8)


def _class_quotas(y: np.ndarray, fraction: float) -> dict[int, int]:
    """Per-class row quotas for a stratified draw of the given fraction.

    Each class gets round-half-even(fraction * count). The class with the
    most rows then absorbs the +-1 correction needed to make the total equal
    round-half-even(fraction * n), so the overall size is exact.
    """
    n = int(y.size)
    labels, counts = np.unique(y, return_counts=True)
    quotas = {int(c): round(fraction * int(k)) for c, k in zip(labels, counts)}
    target_total = round(fraction * n)
    delta = target_total - sum(quotas.values())
    if delta != 0:
        major = int(labels[int(np.argmax(counts))])
        quotas[major] += delta
    for c, q in quotas.items():
        k = int(counts[labels.tolist().index(c)])
        if q < 0 or q > k:
            raise StratificationError(
                f"class {c} quota {q} out of range for {k} rows "
                f"at fraction {fraction}"
            )
    return quotas


def _stratified_draw(y: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Row indices of a stratified sample, ascending.

    Rows are picked per class with an independent seeded shuffle, so a draw
    for one class never perturbs another.
    """
    quotas = _class_quotas(y, fraction)
    picked = []
    for label in sorted(quotas):
        rows = np.flatnonzero(y == label)
        rng = np.random.default_rng(np.random.SeedSequence([seed, label]))
        perm = rng.permutation(rows.size)
        picked.append(rows[perm[: quotas[label]]])
    return np.sort(np.concatenate(picked))


@dataclass(frozen=True)
class SplitResult:
    """Outcome of a stratified train/test split."""

    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    train_indices: np.ndarray
    test_indices: np.ndarray
    test_fraction: float
    seed: int

    def summary(self) -> dict:
        def side(y: np.ndarray) -> dict:
            n = int(y.size)
            pos = int(np.sum(y == 1))
            return {
                "rows": n,
                "legit": n - pos,
                "fraud": pos,
                "fraud_rate": pos / n if n else 0.0,
            }

        return {
            "test_fraction": self.test_fraction,
            "seed": self.seed,
            "train": side(self.y_train),
            "test": side(self.y_test),
        }


def stratified_split(
    x: np.ndarray,
    y: np.ndarray,
    test_fraction: float = 0.1,
    seed: int = 42,
) -> SplitResult:
    """Split rows into train/test, preserving the class mix."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    y = _check_labels(y)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise DataError(
            f"feature matrix shape {x.shape} does not match {y.size} labels"
        )
    if y.size < 2:
        raise DataError("need at least 2 rows to split")
    test_idx = _stratified_draw(y, test_fraction, seed)
    mask = np.ones(y.size, dtype=bool)
    mask[test_idx] = False
    train_idx = np.flatnonzero(mask)
    return SplitResult(
        x_train=np.ascontiguousarray(x[train_idx]),
        y_train=y[train_idx].copy(),
        x_test=np.ascontiguousarray(x[test_idx]),
        y_test=y[test_idx].copy(),
        train_indices=train_idx,
        test_indices=test_idx,
        test_fraction=test_fraction,
        seed=seed,
    )


def stratified_take(y: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Indices of a stratified subsample (for trimming a dataset)."""
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"subsample fraction must be in (0, 1], got {fraction}")
    y = _check_labels(y)
    if fraction == 1.0:
        return np.arange(y.size)
    idx = _stratified_draw(y, fraction, seed)
    if idx.size == 0:
        raise StratificationError(
            f"subsample fraction {fraction} selects zero rows from {y.size}"
        )
    return idx

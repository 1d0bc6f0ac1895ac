"""PaySim-schema transaction data: types, CSV round-trip, synthetic generator,
and the exploratory summaries used by the pipeline.

The on-disk layout is the 11-column PaySim CSV. In memory a Dataset is
column-oriented (numpy arrays) so feature preparation and the generator
stay vectorised; single rows materialise as Transaction objects on demand.
"""

from __future__ import annotations

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, DataError, RowParseError, SchemaError

PAYSIM_COLUMNS = (
    "step", "type", "amount", "nameOrig", "oldbalanceOrg", "newbalanceOrig",
    "nameDest", "oldbalanceDest", "newbalanceDest", "isFraud", "isFlaggedFraud",
)

# numeric view used by correlation_matrix, in this fixed order
EDA_CORR_COLUMNS = (
    "type_code", "amount", "old_balance_orig", "new_balance_orig",
    "old_balance_dest", "new_balance_dest", "is_fraud",
)


class TxType(enum.IntEnum):
    """The five PaySim transaction types; values are the alphabetical codes."""

    CASH_IN = 0
    CASH_OUT = 1
    DEBIT = 2
    PAYMENT = 3
    TRANSFER = 4

    @classmethod
    def parse(cls, text: str) -> "TxType":
        """Parse a type name; hyphens and underscores are interchangeable."""
        key = text.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown transaction type {text!r}") from None

    @property
    def label(self) -> str:
        """Canonical serialised name (underscore form)."""
        return self.name


@dataclass(frozen=True)
class Transaction:
    """One transaction row."""

    step: int
    tx_type: TxType
    amount: float
    orig_id: str
    old_balance_orig: float
    new_balance_orig: float
    dest_id: str
    old_balance_dest: float
    new_balance_dest: float
    is_fraud: int
    is_flagged_fraud: int

    def __post_init__(self):
        if self.step < 0:
            raise DataError(f"step must be non-negative, got {self.step}")
        if not isinstance(self.tx_type, TxType):
            raise DataError(f"tx_type must be a TxType, got {self.tx_type!r}")
        for name in ("amount", "old_balance_orig", "new_balance_orig",
                     "old_balance_dest", "new_balance_dest"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise DataError(f"{name} must be finite and non-negative, got {v!r}")
        if not self.orig_id or not self.dest_id:
            raise DataError("orig_id and dest_id must be non-empty")
        if self.is_fraud not in (0, 1):
            raise DataError(f"is_fraud must be 0 or 1, got {self.is_fraud!r}")
        if self.is_flagged_fraud not in (0, 1):
            raise DataError(
                f"is_flagged_fraud must be 0 or 1, got {self.is_flagged_fraud!r}")


_FLOAT_COLS = ("amount", "old_balance_orig", "new_balance_orig",
               "old_balance_dest", "new_balance_dest")


class Dataset:
    """Column-oriented collection of transactions.

    All columns have equal length; dtypes are fixed at construction
    (int64 step, int8 type codes, float64 money columns, object id
    columns, int8 labels). Construction validates the same invariants as
    Transaction, vectorised.
    """

    __slots__ = ("step", "tx_type", "amount", "orig_id", "old_balance_orig",
                 "new_balance_orig", "dest_id", "old_balance_dest",
                 "new_balance_dest", "is_fraud", "is_flagged_fraud")

    def __init__(self, step, tx_type, amount, orig_id, old_balance_orig,
                 new_balance_orig, dest_id, old_balance_dest,
                 new_balance_dest, is_fraud, is_flagged_fraud):
        self.step = np.asarray(step, np.int64)
        self.tx_type = np.asarray(tx_type, np.int8)
        self.amount = np.asarray(amount, np.float64)
        self.orig_id = np.asarray(orig_id, object)
        self.old_balance_orig = np.asarray(old_balance_orig, np.float64)
        self.new_balance_orig = np.asarray(new_balance_orig, np.float64)
        self.dest_id = np.asarray(dest_id, object)
        self.old_balance_dest = np.asarray(old_balance_dest, np.float64)
        self.new_balance_dest = np.asarray(new_balance_dest, np.float64)
        self.is_fraud = np.asarray(is_fraud, np.int8)
        self.is_flagged_fraud = np.asarray(is_flagged_fraud, np.int8)
        self._validate()

    def _validate(self):
        n = len(self.step)
        for name in self.__slots__:
            if len(getattr(self, name)) != n:
                raise DataError(f"column {name} has length "
                                f"{len(getattr(self, name))}, expected {n}")
        if n == 0:
            return
        if self.step.min() < 0:
            raise DataError("step must be non-negative")
        if self.tx_type.min() < 0 or self.tx_type.max() > 4:
            raise DataError("tx_type codes must be in 0..4")
        for name in _FLOAT_COLS:
            col = getattr(self, name)
            if not np.isfinite(col).all() or col.min() < 0:
                raise DataError(f"{name} must be finite and non-negative")
        for name in ("is_fraud", "is_flagged_fraud"):
            col = getattr(self, name)
            if ((col != 0) & (col != 1)).any():
                raise DataError(f"{name} must be 0 or 1")

    def __len__(self) -> int:
        return len(self.step)

    def row(self, i: int) -> Transaction:
        return Transaction(
            step=int(self.step[i]),
            tx_type=TxType(int(self.tx_type[i])),
            amount=float(self.amount[i]),
            orig_id=str(self.orig_id[i]),
            old_balance_orig=float(self.old_balance_orig[i]),
            new_balance_orig=float(self.new_balance_orig[i]),
            dest_id=str(self.dest_id[i]),
            old_balance_dest=float(self.old_balance_dest[i]),
            new_balance_dest=float(self.new_balance_dest[i]),
            is_fraud=int(self.is_fraud[i]),
            is_flagged_fraud=int(self.is_flagged_fraud[i]),
        )

    def __iter__(self) -> Iterator[Transaction]:
        return (self.row(i) for i in range(len(self)))

    def select(self, indices) -> "Dataset":
        """New Dataset holding the given rows (fancy indexing, kept order)."""
        idx = np.asarray(indices)
        return Dataset(*(getattr(self, name)[idx] for name in self.__slots__))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return all(np.array_equal(getattr(self, name), getattr(other, name))
                   for name in self.__slots__)

    @classmethod
    def from_transactions(cls, rows: Iterable[Transaction]) -> "Dataset":
        cols: list[list] = [[] for _ in cls.__slots__]
        for t in rows:
            cols[0].append(t.step)
            cols[1].append(int(t.tx_type))
            cols[2].append(t.amount)
            cols[3].append(t.orig_id)
            cols[4].append(t.old_balance_orig)
            cols[5].append(t.new_balance_orig)
            cols[6].append(t.dest_id)
            cols[7].append(t.old_balance_dest)
            cols[8].append(t.new_balance_dest)
            cols[9].append(t.is_fraud)
            cols[10].append(t.is_flagged_fraud)
        return cls(*cols)


def load_csv(path) -> Dataset:
    """Read a PaySim-layout CSV into a Dataset.

    The header must name exactly the 11 expected columns in order
    (SchemaError otherwise); a bad data row raises RowParseError carrying
    its 1-based line number.
    """
    steps: list[int] = []
    types: list[int] = []
    amounts: list[float] = []
    origs: list[str] = []
    obo: list[float] = []
    nbo: list[float] = []
    dests: list[str] = []
    obd: list[float] = []
    nbd: list[float] = []
    fraud: list[int] = []
    flagged: list[int] = []

    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected a header row")
        got = [c.strip() for c in header]
        if got != list(PAYSIM_COLUMNS):
            missing = [c for c in PAYSIM_COLUMNS if c not in got]
            extra = [c for c in got if c not in PAYSIM_COLUMNS]
            detail = []
            if missing:
                detail.append(f"missing {missing}")
            if extra:
                detail.append(f"unexpected {extra}")
            if not detail:
                detail.append("columns out of order")
            raise SchemaError(f"{path}: header mismatch ({'; '.join(detail)}); "
                              f"expected {','.join(PAYSIM_COLUMNS)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(PAYSIM_COLUMNS):
                raise RowParseError(f"{path}: line {lineno}: expected "
                                    f"{len(PAYSIM_COLUMNS)} fields, got {len(rec)}")
            try:
                steps.append(_parse_step(rec[0]))
                types.append(int(TxType.parse(rec[1])))
                amounts.append(_parse_money(rec[2], "amount"))
                origs.append(rec[3])
                obo.append(_parse_money(rec[4], "oldbalanceOrg"))
                nbo.append(_parse_money(rec[5], "newbalanceOrig"))
                dests.append(rec[6])
                obd.append(_parse_money(rec[7], "oldbalanceDest"))
                nbd.append(_parse_money(rec[8], "newbalanceDest"))
                fraud.append(_parse_label(rec[9], "isFraud"))
                flagged.append(_parse_label(rec[10], "isFlaggedFraud"))
            except ValueError as exc:
                raise RowParseError(f"{path}: line {lineno}: {exc}") from None
    return Dataset(steps, types, amounts, origs, obo, nbo, dests, obd, nbd,
                   fraud, flagged)


def _parse_step(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError(f"step must be non-negative, got {v}")
    return v


def _parse_money(text: str, col: str) -> float:
    v = float(text)
    if not math.isfinite(v) or v < 0:
        raise ValueError(f"{col} must be finite and non-negative, got {text!r}")
    return v


def _parse_label(text: str, col: str) -> int:
    v = text.strip()
    if v not in ("0", "1"):
        raise ValueError(f"{col} must be 0 or 1, got {text!r}")
    return int(v)


def write_csv(dataset: Dataset, path) -> None:
    """Write a Dataset as a PaySim-layout CSV.

    Floats are serialised with repr (shortest round-trip form), so
    load_csv(write_csv(ds)) reproduces ds exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PAYSIM_COLUMNS)
        names = [TxType(c).label for c in range(5)]
        for i in range(len(dataset)):
            writer.writerow((
                int(dataset.step[i]),
                names[dataset.tx_type[i]],
                repr(float(dataset.amount[i])),
                dataset.orig_id[i],
                repr(float(dataset.old_balance_orig[i])),
                repr(float(dataset.new_balance_orig[i])),
                dataset.dest_id[i],
                repr(float(dataset.old_balance_dest[i])),
                repr(float(dataset.new_balance_dest[i])),
                int(dataset.is_fraud[i]),
                int(dataset.is_flagged_fraud[i]),
            ))


@dataclass(frozen=True)
class GeneratorConfig:
    """Settings for the constrained synthetic generator.

    Fraud rows come in TRANSFER -> CASH_OUT pairs routed through a small
    pool of mule accounts; amount_scale_fraud must exceed
    amount_scale_legit so fraudulent amounts sit visibly higher.
    """

    n_rows: int
    fraud_rate: float = 0.00129
    n_customers: int = 2000
    n_merchants: int = 500
    n_mules: int = 25
    amount_scale_legit: float = 10_000.0
    amount_scale_fraud: float = 50_000.0
    seed: int = 42

    def __post_init__(self):
        if self.n_rows < 1:
            raise ConfigError(f"n_rows must be positive, got {self.n_rows}")
        if not (0.0 < self.fraud_rate < 1.0):
            raise ConfigError(f"fraud_rate must be in (0, 1), got {self.fraud_rate}")
        if self.fraud_rate * self.n_rows < 2:
            raise ConfigError("fraud_rate * n_rows must be at least 2 so fraud "
                              "pairs exist")
        for name in ("n_customers", "n_merchants", "n_mules"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.amount_scale_legit <= 0 or self.amount_scale_fraud <= 0:
            raise ConfigError("amount scales must be positive")
        if self.amount_scale_fraud <= self.amount_scale_legit:
            raise ConfigError("amount_scale_fraud must exceed amount_scale_legit")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")


# legit type mix, roughly the shape seen in mobile-money logs
_LEGIT_TYPE_P = (0.22, 0.35, 0.007, 0.338, 0.085)


def generate(config: GeneratorConfig) -> Dataset:
    """Draw a synthetic transaction set under the generator's constraints.

    Deterministic for a given config. round(fraud_rate * n_rows) rows are
    fraudulent, all TRANSFER or CASH_OUT, arranged in TRANSFER->CASH_OUT
    mule pairs (one unpaired TRANSFER when the count is odd). For every
    outflow row new_balance_orig == max(0, old_balance_orig - amount).
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_rows
    n_fraud = int(round(config.fraud_rate * n))

    # legit draws fill every row; fraud positions are overwritten below
    tx = rng.choice(5, size=n, p=_LEGIT_TYPE_P).astype(np.int8)
    amount = np.round(rng.lognormal(np.log(config.amount_scale_legit), 1.3, n), 2)
    obo = np.round(rng.lognormal(np.log(config.amount_scale_legit * 5.0), 1.5, n), 2)
    obd = np.round(rng.lognormal(np.log(config.amount_scale_legit * 5.0), 1.5, n), 2)
    step = rng.integers(1, 745, n)

    cust = np.array([f"C{1_000_000 + i}" for i in range(config.n_customers)], object)
    merch = np.array([f"M{2_000_000 + i}" for i in range(config.n_merchants)], object)
    mules = np.array([f"C{9_000_000 + i}" for i in range(config.n_mules)], object)
    orig = cust[rng.integers(0, config.n_customers, n)]
    dest_c = cust[rng.integers(0, config.n_customers, n)]
    dest_m = merch[rng.integers(0, config.n_merchants, n)]

    is_payment = tx == int(TxType.PAYMENT)
    is_cash_in = tx == int(TxType.CASH_IN)
    dest = np.where(is_payment, dest_m, dest_c)
    nbo = np.where(is_cash_in, obo + amount, np.maximum(0.0, obo - amount))
    # merchants keep zero balances; cash-in agents pay out, others receive
    obd = np.where(is_payment, 0.0, obd)
    nbd = np.where(is_payment, 0.0,
                   np.where(is_cash_in, np.maximum(0.0, obd - amount),
                            obd + amount))
    is_fraud = np.zeros(n, np.int8)

    pos = np.sort(rng.choice(n, size=n_fraud, replace=False))
    n_pairs = n_fraud // 2
    n_transfer = n_fraud - n_pairs            # pairs plus the odd leftover
    tr_pos = np.concatenate([pos[0:2 * n_pairs:2], pos[2 * n_pairs:]])
    co_pos = pos[1:2 * n_pairs:2]

    f_amt = np.round(rng.lognormal(np.log(config.amount_scale_fraud), 0.6,
                                   n_transfer), 2)
    f_step = rng.integers(1, 745, n_transfer)
    f_mule = mules[rng.integers(0, config.n_mules, n_transfer)]
    f_victim = cust[rng.integers(0, config.n_customers, n_transfer)]
    f_counter = cust[rng.integers(0, config.n_customers, n_transfer)]

    # TRANSFER leg: victim account into the mule account. Originator
    # balances keep the base draw (outflow rule recomputed for the fraud
    # amount); destination balances stay unreported (0/0), the usual
    # concealment signature.
    tx[tr_pos] = int(TxType.TRANSFER)
    amount[tr_pos] = f_amt
    step[tr_pos] = f_step
    orig[tr_pos] = f_victim
    dest[tr_pos] = f_mule
    nbo[tr_pos] = np.maximum(0.0, obo[tr_pos] - f_amt)
    obd[tr_pos] = 0.0
    nbd[tr_pos] = 0.0
    is_fraud[tr_pos] = 1

    # CASH_OUT leg: the mule forwards the same amount at the same step,
    # again with unreported destination balances
    pa = f_amt[:n_pairs]
    tx[co_pos] = int(TxType.CASH_OUT)
    amount[co_pos] = pa
    step[co_pos] = f_step[:n_pairs]
    orig[co_pos] = f_mule[:n_pairs]
    dest[co_pos] = f_counter[:n_pairs]
    nbo[co_pos] = np.maximum(0.0, obo[co_pos] - pa)
    obd[co_pos] = 0.0
    nbd[co_pos] = 0.0
    is_fraud[co_pos] = 1

    return Dataset(step, tx, amount, orig, obo, nbo, dest, obd, nbd,
                   is_fraud, np.zeros(n, np.int8))


class ClassDistribution(NamedTuple):
    n_legit: int
    n_fraud: int
    fraud_rate: float


def class_distribution(dataset: Dataset) -> ClassDistribution:
    """Row counts per class and the fraud rate."""
    n = len(dataset)
    if n == 0:
        raise DataError("class_distribution needs at least one row")
    n_fraud = int(np.count_nonzero(dataset.is_fraud))
    return ClassDistribution(n - n_fraud, n_fraud, n_fraud / n)


class TypeFraudShare(NamedTuple):
    n_rows: int
    n_fraud: int
    share_of_fraud: float


def fraud_share_by_type(dataset: Dataset) -> dict[TxType, TypeFraudShare]:
    """Per-type row counts, fraud counts, and each type's share of all fraud."""
    if len(dataset) == 0:
        raise DataError("fraud_share_by_type needs at least one row")
    total_fraud = int(np.count_nonzero(dataset.is_fraud))
    out = {}
    for t in TxType:
        sel = dataset.tx_type == int(t)
        n_rows = int(np.count_nonzero(sel))
        n_fraud = int(np.count_nonzero(dataset.is_fraud[sel]))
        share = n_fraud / total_fraud if total_fraud else 0.0
        out[t] = TypeFraudShare(n_rows, n_fraud, share)
    return out


def correlation_matrix(dataset: Dataset) -> np.ndarray:
    """Pearson correlations of the EDA_CORR_COLUMNS numeric view (7x7).

    Constant columns get 0 off-diagonal (the undefined-correlation
    sentinel) and 1 on the diagonal. Needs at least two rows.
    """
    if len(dataset) < 2:
        raise DataError("correlation_matrix needs at least two rows")
    cols = np.column_stack([
        dataset.tx_type.astype(np.float64),
        dataset.amount,
        dataset.old_balance_orig,
        dataset.new_balance_orig,
        dataset.old_balance_dest,
        dataset.new_balance_dest,
        dataset.is_fraud.astype(np.float64),
    ])
    xc = cols - cols.mean(axis=0)
    cov = xc.T @ xc
    sd = np.sqrt(np.diag(cov))
    denom = np.outer(sd, sd)
    corr = np.divide(cov, denom, out=np.zeros_like(cov), where=denom > 0)
    np.fill_diagonal(corr, 1.0)
    return corr


def top_fraud_destinations(dataset: Dataset, limit: int = 10) -> list[tuple[str, int]]:
    """Destinations receiving the most fraud, count descending.

    Ties break lexicographically on the account id.
    """
    if limit < 1:
        raise ConfigError(f"limit must be positive, got {limit}")
    counts = Counter(str(d) for d in dataset.dest_id[dataset.is_fraud == 1])
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:limit]


@dataclass(frozen=True)
class EdaSummary:
    """Exploration statistics for one dataset, JSON-ready via to_dict."""

    class_counts: tuple[int, int]
    fraud_rate: float
    per_type: dict
    correlation: np.ndarray
    top_dest_fraud_counts: list

    def to_dict(self) -> dict:
        return {
            "class_counts": {
                "legit": self.class_counts[0],
                "fraud": self.class_counts[1],
            },
            "fraud_rate": self.fraud_rate,
            "per_type": {
                t.label: {
                    "rows": s.n_rows,
                    "fraud": s.n_fraud,
                    "share_of_fraud": s.share_of_fraud,
                }
                for t, s in self.per_type.items()
            },
            "correlation": {
                "columns": list(EDA_CORR_COLUMNS),
                "matrix": [[float(v) for v in row] for row in self.correlation],
            },
            "top_dest_fraud_counts": [
                {"dest_id": d, "fraud_count": c}
                for d, c in self.top_dest_fraud_counts
            ],
        }


def eda_summary(dataset: Dataset, top_limit: int = 10) -> EdaSummary:
    """Bundle the class, per-type, correlation, and mule statistics."""
    dist = class_distribution(dataset)
    return EdaSummary(
        class_counts=(dist.n_legit, dist.n_fraud),
        fraud_rate=dist.fraud_rate,
        per_type=fraud_share_by_type(dataset),
        correlation=correlation_matrix(dataset),
        top_dest_fraud_counts=top_fraud_destinations(dataset, top_limit),
    )


def hypothesis_verdicts(summary: EdaSummary) -> dict:
    """Evaluate the three exploration hypotheses on a summary.

    H1: amount correlates positively with fraud. H2: every fraudulent row
    is a TRANSFER or CASH_OUT. H3 has no pass/fail form; its evidence is
    the repeat-destination table. With no fraud present, H1 and H2 are
    reported as not-evaluable rather than false.
    """
    n_fraud = summary.class_counts[1]
    if n_fraud == 0:
        h1 = "not-evaluable"
        h2 = "not-evaluable"
    else:
        amount_i = EDA_CORR_COLUMNS.index("amount")
        fraud_i = EDA_CORR_COLUMNS.index("is_fraud")
        h1 = bool(summary.correlation[amount_i, fraud_i] > 0.0)
        outside = sum(
            s.n_fraud for t, s in summary.per_type.items()
            if t not in (TxType.TRANSFER, TxType.CASH_OUT)
        )
        h2 = outside == 0
    repeated = [d for d in summary.top_dest_fraud_counts if d[1] > 1]
    return {
        "H1_amount_fraud_correlation_positive": h1,
        "H2_all_fraud_in_transfer_or_cashout": h2,
        "H3_repeat_fraud_destinations": len(repeated),
    }

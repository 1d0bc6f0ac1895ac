"""Confusion-matrix metrics, ROC-AUC, and two-format report rendering.

Text reports round to 2 decimals; the JSON twin keeps full precision.
Zero denominators (degenerate predictions) yield 0 together with an
advisory note rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    def __post_init__(self) -> None:
        for name in ("tn", "fp", "fn", "tp"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise DataError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    @property
    def support0(self) -> int:
        return self.tn + self.fp

    @property
    def support1(self) -> int:
        return self.fn + self.tp

    def as_nested(self) -> list[list[int]]:
        return [[int(self.tn), int(self.fp)], [int(self.fn), int(self.tp)]]


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Averages:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    class0: ClassMetrics
    class1: ClassMetrics
    accuracy: float
    macro_avg: Averages
    weighted_avg: Averages
    roc_auc: float | None = None
    notes: tuple[str, ...] = ()


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    """Counts by (true, predicted); class 0 is the negative class."""
    yt = np.asarray(y_true)
    yp = np.asarray(y_pred)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise DataError(
            f"label vectors must be 1-d and equal length, got {yt.shape} "
            f"vs {yp.shape}"
        )
    if yt.size == 0:
        raise DataError("cannot build a confusion matrix from zero rows")
    for name, v in (("y_true", yt), ("y_pred", yp)):
        vals = np.unique(v)
        if not np.all(np.isin(vals, (0, 1))):
            raise DataError(f"{name} must be binary 0/1, found {vals.tolist()}")
    t = yt == 1
    p = yp == 1
    return ConfusionMatrix(
        tn=int(np.count_nonzero(~t & ~p)),
        fp=int(np.count_nonzero(~t & p)),
        fn=int(np.count_nonzero(t & ~p)),
        tp=int(np.count_nonzero(t & p)),
    )


def _safe_div(num: float, den: float, note: str, notes: list[str]) -> float:
    if den == 0:
        notes.append(note)
        return 0.0
    return num / den


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if (p + r) > 0 else 0.0


def metrics_from_cm(cm: ConfusionMatrix) -> EvaluationReport:
    """Per-class precision/recall/F1, accuracy, and macro/weighted averages."""
    total = cm.total
    if total == 0:
        raise DataError("confusion matrix has zero total count")
    notes: list[str] = []
    p1 = _safe_div(cm.tp, cm.tp + cm.fp,
                   "class-1 precision undefined (no predicted positives); "
                   "reported as 0", notes)
    r1 = _safe_div(cm.tp, cm.tp + cm.fn,
                   "class-1 recall undefined (no true positives in data); "
                   "reported as 0", notes)
    p0 = _safe_div(cm.tn, cm.tn + cm.fn,
                   "class-0 precision undefined (no predicted negatives); "
                   "reported as 0", notes)
    r0 = _safe_div(cm.tn, cm.tn + cm.fp,
                   "class-0 recall undefined (no true negatives in data); "
                   "reported as 0", notes)
    c0 = ClassMetrics(p0, r0, _f1(p0, r0), cm.support0)
    c1 = ClassMetrics(p1, r1, _f1(p1, r1), cm.support1)
    accuracy = (cm.tn + cm.tp) / total
    macro = Averages(
        precision=(p0 + p1) / 2.0,
        recall=(r0 + r1) / 2.0,
        f1=(c0.f1 + c1.f1) / 2.0,
    )
    weighted = Averages(
        precision=(c0.support * p0 + c1.support * p1) / total,
        recall=(c0.support * r0 + c1.support * r1) / total,
        f1=(c0.support * c0.f1 + c1.support * c1.f1) / total,
    )
    return EvaluationReport(
        confusion=cm,
        class0=c0,
        class1=c1,
        accuracy=accuracy,
        macro_avg=macro,
        weighted_avg=weighted,
        notes=tuple(notes),
    )


def roc_auc(y_true, scores) -> float:
    """Tie-aware rank-sum AUC: P(random positive outranks random negative)."""
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1 or y.size == 0:
        raise DataError(
            f"labels and scores must be 1-d and equal length, got {y.shape} "
            f"vs {s.shape}"
        )
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(np.count_nonzero(y == 0))
    if n_pos + n_neg != y.size:
        raise DataError("labels must be binary 0/1")
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC-AUC needs both classes present")

    n = s.size
    order = np.argsort(s, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    sorted_s = s[order]
    # average 1-based ranks over runs of tied scores
    run_edges = np.flatnonzero(sorted_s[1:] != sorted_s[:-1]) + 1
    starts = np.concatenate([[0], run_edges])
    ends = np.concatenate([run_edges, [n]])
    for a, b in zip(starts, ends):
        ranks[order[a:b]] = 0.5 * (a + 1 + b)
    pos_rank_sum = float(ranks[y == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def attach_roc_auc(report: EvaluationReport, auc: float) -> EvaluationReport:
    return EvaluationReport(
        confusion=report.confusion,
        class0=report.class0,
        class1=report.class1,
        accuracy=report.accuracy,
        macro_avg=report.macro_avg,
        weighted_avg=report.weighted_avg,
        roc_auc=auc,
        notes=report.notes,
    )


def report_to_dict(report: EvaluationReport, model_name: str) -> dict:
    def cls(c: ClassMetrics) -> dict:
        return {
            "precision": c.precision,
            "recall": c.recall,
            "f1": c.f1,
            "support": int(c.support),
        }

    def avg(a: Averages) -> dict:
        return {"precision": a.precision, "recall": a.recall, "f1": a.f1}

    out = {
        "model": model_name,
        "confusion": report.confusion.as_nested(),
        "class0": cls(report.class0),
        "class1": cls(report.class1),
        "accuracy": report.accuracy,
        "macro_avg": avg(report.macro_avg),
        "weighted_avg": avg(report.weighted_avg),
    }
    if report.roc_auc is not None:
        out["roc_auc"] = report.roc_auc
    if report.notes:
        out["notes"] = list(report.notes)
    return out


def render_report(report: EvaluationReport, model_name: str) -> tuple[str, dict]:
    """Text table plus the JSON-ready dict twin (unrounded)."""
    total = report.confusion.total

    def row(label: str, p: float, r: float, f1: float, sup: int) -> str:
        return f"{label:>13}{p:>11.2f}{r:>10.2f}{f1:>10.2f}{sup:>10d}"

    lines = [
        f"Model: {model_name}",
        "",
        f"{'':>13}{'precision':>11}{'recall':>10}{'f1-score':>10}{'support':>10}",
        "",
        row("Non-Fraud [0]", report.class0.precision, report.class0.recall,
            report.class0.f1, report.class0.support),
        row("Fraud [1]", report.class1.precision, report.class1.recall,
            report.class1.f1, report.class1.support),
        "",
        f"{'accuracy':>13}{'':>11}{'':>10}{report.accuracy:>10.2f}{total:>10d}",
        row("macro avg", report.macro_avg.precision, report.macro_avg.recall,
            report.macro_avg.f1, total),
        row("weighted avg", report.weighted_avg.precision,
            report.weighted_avg.recall, report.weighted_avg.f1, total),
        "",
        f"Confusion matrix [[tn, fp], [fn, tp]]: {report.confusion.as_nested()}",
        f"Accuracy (full precision): {report.accuracy!r}",
    ]
    if report.roc_auc is not None:
        lines.append(f"ROC-AUC: {report.roc_auc:.4f}")
    for note in report.notes:
        lines.append(f"Note: {note}")
    return "\n".join(lines) + "\n", report_to_dict(report, model_name)

"""Binary classification metrics: confusion counts, support-weighted
precision/recall/F1, precision-recall curves with average precision, and
Cohen's kappa for two-rater agreement.

Only binary labels {0, 1} are supported. Zero-denominator metrics are
reported as 0.0 and the affected metric names are listed in
``MetricsReport.degenerate`` rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import EmptyInput, LengthMismatch, NoPositives, NonBinaryLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[int, dict[str, float]]   # class -> precision/recall/f1
    support: dict[int, int]                  # class -> true-instance count
    accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    degenerate: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": {str(k): dict(v) for k, v in self.per_class.items()},
            "support": {str(k): v for k, v in self.support.items()},
            "degenerate": list(self.degenerate),
        }


@dataclass(frozen=True)
class PrCurve:
    points: tuple[tuple[float, float], ...]  # (recall, precision), recall non-decreasing
    average_precision: float


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float


def _check_binary(values: Sequence[int], name: str) -> None:
    for v in values:
        if v not in (0, 1):
            raise NonBinaryLabel(f"{name} contains non-binary value {v!r}")


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionMatrix:
    """Count the four cells, with class 1 as positive."""
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} labels vs {len(y_pred)} predictions")
    if not y_true:
        raise LengthMismatch("empty label vectors")
    _check_binary(y_true, "y_true")
    _check_binary(y_pred, "y_pred")
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if t == 1 and p == 1:
            tp += 1
        elif t == 0 and p == 1:
            fp += 1
        elif t == 1 and p == 0:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _class_prf(tp: int, fp: int, fn: int, degenerate: list[str], cls: int) -> dict[str, float]:
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        degenerate.append(f"precision[{cls}]")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        degenerate.append(f"recall[{cls}]")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        degenerate.append(f"f1[{cls}]")
    return {"precision": precision, "recall": recall, "f1": f1}


def weighted_metrics(
    cm: ConfusionMatrix | None = None,
    y_true: Sequence[int] | None = None,
    y_pred: Sequence[int] | None = None,
) -> MetricsReport:
    """Per-class and support-weighted precision/recall/F1 plus accuracy.

    Each class is treated in turn as the positive class; the weighted
    aggregate is the support-weighted mean of the per-class values and
    the macro aggregate is their unweighted mean, so either reading of
    an averaged score can be checked.
    """
    if cm is None:
        if y_true is None or y_pred is None:
            raise ValueError("pass either cm or (y_true, y_pred)")
        cm = confusion(y_true, y_pred)
    if cm.total <= 0:
        raise EmptyInput("confusion matrix with zero total")

    degenerate: list[str] = []
    # Class 1 as positive uses the matrix as-is; class 0 swaps the roles.
    stats_1 = _class_prf(cm.tp, cm.fp, cm.fn, degenerate, 1)
    stats_0 = _class_prf(cm.tn, cm.fn, cm.fp, degenerate, 0)
    support = {0: cm.tn + cm.fp, 1: cm.tp + cm.fn}
    total = cm.total

    def blend(metric: str, weighted: bool) -> float:
        if weighted:
            return (stats_0[metric] * support[0] + stats_1[metric] * support[1]) / total
        return (stats_0[metric] + stats_1[metric]) / 2

    return MetricsReport(
        per_class={0: stats_0, 1: stats_1},
        support=support,
        accuracy=(cm.tp + cm.tn) / total,
        weighted_precision=blend("precision", True),
        weighted_recall=blend("recall", True),
        weighted_f1=blend("f1", True),
        macro_precision=blend("precision", False),
        macro_recall=blend("recall", False),
        macro_f1=blend("f1", False),
        degenerate=tuple(degenerate),
    )


def pr_curve(y_true: Sequence[int], scores: Sequence[float]) -> PrCurve:
    """Precision-recall points from descending-score thresholds.

    Tied scores collapse into a single threshold. Average precision is
    the step-wise sum sum((R_n - R_{n-1}) * P_n), not interpolated.
    """
    if len(y_true) != len(scores):
        raise LengthMismatch(f"{len(y_true)} labels vs {len(scores)} scores")
    _check_binary(y_true, "y_true")
    n_pos = sum(y_true)
    if n_pos == 0:
        raise NoPositives("pr_curve requires at least one positive label")

    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    points: list[tuple[float, float]] = []
    ap = 0.0
    prev_recall = 0.0
    tp = fp = 0
    i = 0
    while i < len(order):
        j = i
        # consume the whole tie group as one threshold
        while j < len(order) and scores[order[j]] == scores[order[i]]:
            if y_true[order[j]] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        precision = tp / (tp + fp)
        recall = tp / n_pos
        points.append((recall, precision))
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return PrCurve(points=tuple(points), average_precision=ap)


def cohen_kappa(ratings_a: Sequence[int], ratings_b: Sequence[int]) -> KappaResult:
    """Chance-corrected two-rater agreement: (po - pe) / (1 - pe).

    Defined as 1.0 in the degenerate case po == pe == 1 (both raters
    constant and identical).
    """
    if len(ratings_a) != len(ratings_b):
        raise LengthMismatch(f"{len(ratings_a)} vs {len(ratings_b)} ratings")
    if not ratings_a:
        raise LengthMismatch("empty rating vectors")
    _check_binary(ratings_a, "ratings_a")
    _check_binary(ratings_b, "ratings_b")

    n = len(ratings_a)
    po = sum(1 for a, b in zip(ratings_a, ratings_b) if a == b) / n
    pa1 = sum(ratings_a) / n
    pb1 = sum(ratings_b) / n
    pe = pa1 * pb1 + (1 - pa1) * (1 - pb1)
    if pe == 1.0:
        kappa = 1.0 if po == 1.0 else 0.0
    else:
        kappa = (po - pe) / (1 - pe)
    return KappaResult(kappa=kappa, observed_agreement=po, expected_agreement=pe)

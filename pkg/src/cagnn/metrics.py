"""Classification metrics: accuracy, macro F1, ROC/AUC, and run aggregation."""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError, check_shapes

log = logging.getLogger(__name__)


@dataclass
class ConfusionCounts:
    """Per-class one-vs-rest confusion counts, index k = class k."""

    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    tn: np.ndarray


@dataclass
class RocCurve:
    """Threshold-sweep ROC points from (0,0) to (1,1), both non-decreasing."""

    fpr: np.ndarray
    tpr: np.ndarray


@dataclass
class MetricsReport:
    """Per-run metric records plus their mean and sample std."""

    per_run: list[dict]
    mean: dict
    std: dict
    run_count: int


def _check_lengths(predictions, labels) -> tuple[np.ndarray, np.ndarray]:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    check_shapes(
        predictions.shape == labels.shape,
        f"predictions shape {predictions.shape} vs labels shape {labels.shape}",
    )
    if predictions.size == 0:
        raise DataError("cannot score an empty prediction vector")
    return predictions, labels


def accuracy(predictions, labels) -> float:
    """Percentage of exact matches, in [0, 100]."""
    predictions, labels = _check_lengths(predictions, labels)
    return float(100.0 * np.mean(predictions == labels))


def confusion_counts(predictions, labels, num_classes: int) -> ConfusionCounts:
    predictions, labels = _check_lengths(predictions, labels)
    n = predictions.size
    tp = np.zeros(num_classes)
    fp = np.zeros(num_classes)
    fn = np.zeros(num_classes)
    for k in range(num_classes):
        pred_k = predictions == k
        true_k = labels == k
        tp[k] = np.count_nonzero(pred_k & true_k)
        fp[k] = np.count_nonzero(pred_k & ~true_k)
        fn[k] = np.count_nonzero(~pred_k & true_k)
    tn = n - tp - fp - fn
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def macro_f1(predictions, labels, num_classes: int) -> float:
    """Unweighted mean of per-class F1, in [0, 1].

    A class with no predicted or no true examples has undefined precision
    or recall and contributes F1 = 0 rather than being skipped.
    """
    c = confusion_counts(predictions, labels, num_classes)
    f1 = np.zeros(num_classes)
    for k in range(num_classes):
        denom_p = c.tp[k] + c.fp[k]
        denom_r = c.tp[k] + c.fn[k]
        if denom_p == 0 or denom_r == 0:
            continue
        precision = c.tp[k] / denom_p
        recall = c.tp[k] / denom_r
        if precision + recall > 0:
            f1[k] = 2.0 * precision * recall / (precision + recall)
    return float(f1.mean())


def roc_curve(scores, positive_mask) -> RocCurve:
    """ROC points from a descending threshold sweep with ties grouped.

    Each distinct score value admits its whole tie group at once, so tied
    positives and negatives move the curve diagonally in a single step.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive_mask = np.asarray(positive_mask, dtype=bool)
    check_shapes(
        scores.shape == positive_mask.shape,
        f"scores shape {scores.shape} vs mask shape {positive_mask.shape}",
    )
    n_pos = int(np.count_nonzero(positive_mask))
    n_neg = positive_mask.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC curve needs at least one positive and one negative example")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positive_mask[order]
    # last index of each tie group in the descending order
    boundary = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    group_ends = np.concatenate([boundary, [scores.size - 1]])

    cum_tp = np.cumsum(sorted_pos)
    cum_fp = np.cumsum(~sorted_pos)
    tpr = np.concatenate([[0.0], cum_tp[group_ends] / n_pos])
    fpr = np.concatenate([[0.0], cum_fp[group_ends] / n_neg])
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:
        fpr = np.concatenate([fpr, [1.0]])
        tpr = np.concatenate([tpr, [1.0]])
    return RocCurve(fpr=fpr, tpr=tpr)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve."""
    return float(np.trapezoid(curve.tpr, curve.fpr))


def macro_auc(probabilities: np.ndarray, labels, num_classes: int) -> float:
    """Mean one-vs-rest AUC over classes present in the labels.

    Classes with no positive examples have no defined curve; they are
    dropped from the mean with a warning instead of poisoning it.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels)
    check_shapes(
        probabilities.ndim == 2 and probabilities.shape[0] == labels.shape[0],
        f"probabilities shape {probabilities.shape} vs {labels.shape[0]} labels",
    )
    per_class = []
    for k in range(num_classes):
        mask = labels == k
        if not mask.any():
            log.warning("class %d absent from labels; skipping it in macro AUC", k)
            continue
        per_class.append(auc(roc_curve(probabilities[:, k], mask)))
    if not per_class:
        raise DataError("no class with positive examples; macro AUC undefined")
    return float(np.mean(per_class))


def aggregate_runs(per_run: list[dict]) -> MetricsReport:
    """Mean and sample standard deviation (n-1) per metric across runs.

    A single run reports std 0 for every metric by convention.
    """
    if not per_run:
        raise DataError("aggregate_runs needs at least one run")
    keys = list(per_run[0].keys())
    mean = {}
    std = {}
    for key in keys:
        values = np.array([float(r[key]) for r in per_run])
        mean[key] = float(values.mean())
        std[key] = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return MetricsReport(per_run=list(per_run), mean=mean, std=std, run_count=len(per_run))


def roc_csv(curves: dict[int, RocCurve]) -> str:
    """CSV text for per-class ROC curves: header then one block per class."""
    lines = ["class,fpr,tpr"]
    for k in sorted(curves):
        c = curves[k]
        for f, t in zip(c.fpr, c.tpr):
            lines.append(f"{k},{float(f)!r},{float(t)!r}")
    return "\n".join(lines) + "\n"

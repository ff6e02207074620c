"""Confusion-matrix based classification metrics (0/0 is taken as 0)."""

from __future__ import annotations

import numpy as np

__all__ = ["confusion", "accuracy", "macro_recall", "macro_precision", "macro_f1", "summarize"]


def confusion(labels, predictions, mask=None, num_classes: int | None = None) -> np.ndarray:
    """Counts with rows = true class and columns = predicted class."""
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if labels.shape != predictions.shape:
        raise ValueError(f"labels {labels.shape} and predictions {predictions.shape} differ")
    if mask is not None:
        mask = np.asarray(mask, dtype=np.int64)
        labels, predictions = labels[mask], predictions[mask]
    if labels.size == 0:
        raise ValueError("confusion matrix over an empty mask")
    if num_classes is None:
        num_classes = int(max(labels.max(), predictions.max())) + 1
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (labels, predictions), 1)
    return cm


def _ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def accuracy(cm) -> float:
    cm = np.asarray(cm)
    return float(_ratio(np.trace(cm), cm.sum()))


def _per_class(cm):
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    recall = _ratio(tp, cm.sum(axis=1))
    precision = _ratio(tp, cm.sum(axis=0))
    f1 = _ratio(2 * precision * recall, precision + recall)
    return precision, recall, f1


def macro_recall(cm) -> float:
    return float(np.mean(_per_class(cm)[1]))


def macro_precision(cm) -> float:
    return float(np.mean(_per_class(cm)[0]))


def macro_f1(cm) -> float:
    return float(np.mean(_per_class(cm)[2]))


def summarize(cm) -> dict[str, float]:
    """Metric bundle written to metrics documents. Micro recall equals accuracy."""
    acc = accuracy(cm)
    return {
        "acc": acc,
        "macro_recall": macro_recall(cm),
        "macro_f1": macro_f1(cm),
        "micro_recall": acc,
    }

"""Confusion-matrix evaluation with one-vs-rest per-class rates.

Rates follow the usual one-vs-rest reading of a multi-class confusion
matrix (rows = truth, columns = prediction).  A rate whose denominator is
zero is reported as NaN, never as 0, so "no positives existed" stays
distinguishable from "all positives were missed".
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, LabelError

RATE_NAMES = ("tpr", "fnr", "fpr", "tnr", "accuracy")


@dataclass(eq=False)
class ClassificationReport:
    """Counts and derived rates for one evaluation."""

    confusion: np.ndarray
    tpr: np.ndarray
    fnr: np.ndarray
    fpr: np.ndarray
    tnr: np.ndarray
    per_class_accuracy: np.ndarray
    accuracy: float
    extras: dict[str, float] = field(default_factory=dict)

    @property
    def num_classes(self) -> int:
        return self.confusion.shape[0]

    def write_csv(self, path) -> None:
        """Long-format CSV: section,a,b,value (documented in the README)."""
        with open(path, "w", encoding="ascii", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("section", "a", "b", "value"))
            for t in range(self.num_classes):
                for p in range(self.num_classes):
                    writer.writerow(("confusion", t, p, int(self.confusion[t, p])))
            rates = (self.tpr, self.fnr, self.fpr, self.tnr, self.per_class_accuracy)
            for c in range(self.num_classes):
                for name, arr in zip(RATE_NAMES, rates):
                    writer.writerow(("class_rate", c, name, repr(float(arr[c]))))
            writer.writerow(("overall", "", "accuracy", repr(float(self.accuracy))))
            for key in sorted(self.extras):
                writer.writerow(("overall", "", key, repr(float(self.extras[key]))))


def confusion_matrix(truths, predictions, num_classes: int) -> np.ndarray:
    truths = np.asarray(truths, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if truths.shape != predictions.shape or truths.ndim != 1:
        raise DimensionError(
            f"truths {truths.shape} and predictions {predictions.shape} must be "
            f"equal-length vectors"
        )
    if truths.size == 0:
        raise DimensionError("cannot evaluate zero predictions")
    if num_classes < 1:
        raise LabelError(f"num_classes must be >= 1, got {num_classes}")
    for name, arr in (("truth", truths), ("prediction", predictions)):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise LabelError(
                f"{name} labels outside [0, {num_classes}): "
                f"saw range [{arr.min()}, {arr.max()}]"
            )
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (truths, predictions), 1)
    return matrix


def report_from_confusion(matrix: np.ndarray) -> ClassificationReport:
    """Derive all rates from a confusion matrix (rows = truth)."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"confusion matrix must be square, got {matrix.shape}")
    n = matrix.shape[0]
    total = int(matrix.sum())
    if total == 0:
        raise DimensionError("confusion matrix holds no observations")
    tpr = np.full(n, math.nan)
    fnr = np.full(n, math.nan)
    fpr = np.full(n, math.nan)
    tnr = np.full(n, math.nan)
    pca = np.full(n, math.nan)
    for c in range(n):
        tp = int(matrix[c, c])
        fn = int(matrix[c].sum()) - tp
        fp = int(matrix[:, c].sum()) - tp
        tn = total - tp - fn - fp
        if tp + fn > 0:
            tpr[c] = tp / (tp + fn)
            fnr[c] = fn / (tp + fn)
        if fp + tn > 0:
            fpr[c] = fp / (fp + tn)
            tnr[c] = tn / (fp + tn)
        pca[c] = (tp + tn) / total
    accuracy = float(np.trace(matrix)) / total
    return ClassificationReport(
        confusion=matrix,
        tpr=tpr,
        fnr=fnr,
        fpr=fpr,
        tnr=tnr,
        per_class_accuracy=pca,
        accuracy=accuracy,
    )


def evaluate(truths, predictions, num_classes: int) -> ClassificationReport:
    """Confusion matrix and rates for integer class labels."""
    return report_from_confusion(confusion_matrix(truths, predictions, num_classes))

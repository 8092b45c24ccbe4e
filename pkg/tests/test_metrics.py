"""One-vs-rest confusion metrics: exact identities, NaN policy, CSV shape."""
import csv
import math

import numpy as np
import pytest
from sklearn.metrics import confusion_matrix as sk_confusion

from videoqoe.errors import DimensionError, LabelError
from videoqoe.metrics import (
    RATE_NAMES,
    confusion_matrix,
    evaluate,
    report_from_confusion,
)


def test_confusion_matrix_hand_case():
    truths = [0, 0, 1, 1, 2, 2, 2]
    preds = [0, 1, 1, 1, 2, 0, 2]
    m = confusion_matrix(truths, preds, 3)
    np.testing.assert_array_equal(m, [[1, 1, 0], [0, 2, 0], [1, 0, 2]])


def test_confusion_matrix_matches_sklearn_on_random_labels():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n_classes = int(rng.integers(2, 6))
        n = int(rng.integers(1, 200))
        truths = rng.integers(0, n_classes, size=n)
        preds = rng.integers(0, n_classes, size=n)
        ours = confusion_matrix(truths, preds, n_classes)
        theirs = sk_confusion(truths, preds, labels=range(n_classes))
        np.testing.assert_array_equal(ours, theirs)


def test_rate_identities_hold_exactly_on_random_matrices():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        matrix = rng.integers(0, 50, size=(n, n))
        if matrix.sum() == 0:
            matrix[0, 0] = 1
        rep = report_from_confusion(matrix)
        total = matrix.sum()
        for c in range(n):
            tp = matrix[c, c]
            fn = matrix[c].sum() - tp
            fp = matrix[:, c].sum() - tp
            tn = total - tp - fn - fp
            if tp + fn > 0:
                assert rep.tpr[c] + rep.fnr[c] == 1.0  # exact, not approximate
                assert rep.tpr[c] == tp / (tp + fn)
            else:
                assert math.isnan(rep.tpr[c]) and math.isnan(rep.fnr[c])
            if fp + tn > 0:
                assert rep.fpr[c] + rep.tnr[c] == 1.0
                assert rep.tnr[c] == tn / (fp + tn)
            else:
                assert math.isnan(rep.fpr[c]) and math.isnan(rep.tnr[c])
            assert rep.per_class_accuracy[c] == (tp + tn) / total
        assert rep.accuracy == np.trace(matrix) / total


def test_perfect_and_inverted_predictions():
    perfect = evaluate([0, 1, 2], [0, 1, 2], 3)
    assert perfect.accuracy == 1.0
    np.testing.assert_array_equal(perfect.tpr, [1.0, 1.0, 1.0])
    np.testing.assert_array_equal(perfect.fpr, [0.0, 0.0, 0.0])

    inverted = evaluate([0, 0, 1, 1], [1, 1, 0, 0], 2)
    assert inverted.accuracy == 0.0
    np.testing.assert_array_equal(inverted.tpr, [0.0, 0.0])
    np.testing.assert_array_equal(inverted.fnr, [1.0, 1.0])


def test_absent_class_yields_nan_not_zero():
    # class 2 never appears in the truths: TPR undefined for it
    rep = evaluate([0, 0, 1], [0, 1, 1], 3)
    assert math.isnan(rep.tpr[2])
    assert math.isnan(rep.fnr[2])
    # but FPR for class 2 is well-defined (nothing predicted 2 either)
    assert rep.fpr[2] == 0.0


def test_single_class_everything():
    rep = evaluate([0, 0, 0], [0, 0, 0], 1)
    assert rep.tpr[0] == 1.0
    assert math.isnan(rep.fpr[0])  # no negatives exist at all
    assert rep.accuracy == 1.0


def test_label_and_shape_validation():
    with pytest.raises(LabelError):
        confusion_matrix([0, 3], [0, 1], 3)
    with pytest.raises(LabelError):
        confusion_matrix([0, -1], [0, 1], 3)
    with pytest.raises(LabelError):
        confusion_matrix([0], [0], 0)
    with pytest.raises(DimensionError):
        confusion_matrix([0, 1], [0], 2)
    with pytest.raises(DimensionError):
        confusion_matrix([], [], 2)
    with pytest.raises(DimensionError):
        report_from_confusion(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        report_from_confusion(np.zeros((2, 2)))


def test_report_csv_layout(tmp_path):
    rep = evaluate([0, 0, 1, 1], [0, 1, 1, 1], 2)
    rep.extras["sequence_accuracy"] = 0.5
    path = tmp_path / "report.csv"
    rep.write_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["section", "a", "b", "value"]
    confusion_rows = [r for r in rows if r[0] == "confusion"]
    assert len(confusion_rows) == 4
    assert ["confusion", "0", "1", "1"] in confusion_rows
    rate_rows = [r for r in rows if r[0] == "class_rate"]
    assert len(rate_rows) == 2 * len(RATE_NAMES)
    assert ["class_rate", "0", "tpr", "0.5"] in rate_rows
    overall = [r for r in rows if r[0] == "overall"]
    assert ["overall", "", "accuracy", "0.75"] in overall
    assert ["overall", "", "sequence_accuracy", "0.5"] in overall


def test_report_csv_nan_round_trips(tmp_path):
    rep = evaluate([0, 0], [0, 0], 2)  # class 1 absent: NaN rates
    path = tmp_path / "report.csv"
    rep.write_csv(path)
    with open(path, newline="") as fh:
        rows = {(r[0], r[1], r[2]): r[3] for r in csv.reader(fh)}
    assert rows[("class_rate", "1", "tpr")] == "nan"
    assert math.isnan(float(rows[("class_rate", "1", "tpr")]))

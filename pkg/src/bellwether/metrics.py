"""Performance scores: confusion-matrix measures, G-score, MAR, SA.

G combines recall (pd) and 1-pf as a harmonic mean and lives in [0, 1];
reports scale it by 100. Standardized Accuracy normalizes the mean
absolute residual against the mean pairwise absolute difference of the
truth values and is reported in percent (100 = perfect, 0 = no better
than the pairwise baseline, negative = worse).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise DataValidationError("confusion counts must be non-negative")
        if self.tp + self.fp + self.tn + self.fn < 1:
            raise DataValidationError("empty confusion matrix")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(predictions, truth) -> ConfusionMatrix:
    """Count tp/fp/tn/fn for 0/1 label vectors (1 = positive)."""
    predictions = np.asarray(predictions, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predictions.shape != truth.shape:
        raise DataValidationError("prediction/truth length mismatch")
    if predictions.size == 0:
        raise DataValidationError("empty label vectors")
    pos_pred = predictions == 1.0
    pos_true = truth == 1.0
    return ConfusionMatrix(
        tp=int(np.sum(pos_pred & pos_true)),
        fp=int(np.sum(pos_pred & ~pos_true)),
        tn=int(np.sum(~pos_pred & ~pos_true)),
        fn=int(np.sum(~pos_pred & pos_true)),
    )


def pd_pf(cm: ConfusionMatrix) -> tuple:
    """Recall and false-alarm rate; degenerate denominators yield 0."""
    pd = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    pf = cm.fp / (cm.fp + cm.tn) if cm.fp + cm.tn else 0.0
    return pd, pf


def precision(cm: ConfusionMatrix) -> float:
    return cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0


def accuracy(cm: ConfusionMatrix) -> float:
    return (cm.tp + cm.tn) / cm.total


def g_score(pd: float, pf: float) -> float:
    """Harmonic combination of pd and (1 - pf): 2*pd*(1-pf) / (1+pd-pf)."""
    if not (0.0 <= pd <= 1.0 and 0.0 <= pf <= 1.0):
        raise DataValidationError(f"pd/pf outside [0,1]: pd={pd}, pf={pf}")
    denom = 1.0 + pd - pf
    if denom == 0.0:
        return 0.0
    return 2.0 * pd * (1.0 - pf) / denom


def g_from_labels(predictions, truth) -> float:
    pd, pf = pd_pf(confusion(predictions, truth))
    return g_score(pd, pf)


def mar(truth, predictions) -> float:
    """Mean absolute residual."""
    truth = np.asarray(truth, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    if truth.shape != predictions.shape:
        raise DataValidationError("prediction/truth length mismatch")
    if truth.size == 0:
        raise DataValidationError("empty regression outcome")
    return float(np.mean(np.abs(predictions - truth)))


def mean_pairwise_diff(values) -> float:
    """(2/n^2) * sum_{i} sum_{j<i} |y_i - y_j|, via sorting in O(n log n)."""
    y = np.sort(np.asarray(values, dtype=np.float64))
    n = y.size
    if n < 2:
        raise DataValidationError("pairwise baseline needs at least two truth values")
    # sum over pairs: each sorted y_k enters with coefficient (2k - n + 1)
    k = np.arange(n, dtype=np.float64)
    pair_sum = float(np.sum((2.0 * k - n + 1.0) * y))
    return 2.0 * pair_sum / (n * n)


def sa(truth, predictions) -> float:
    """Standardized Accuracy in percent: (1 - MAR/baseline) * 100."""
    truth = np.asarray(truth, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    baseline = mean_pairwise_diff(truth)
    if baseline == 0.0:
        raise DataValidationError("all truth values identical: SA baseline undefined")
    return (1.0 - mar(truth, predictions) / baseline) * 100.0

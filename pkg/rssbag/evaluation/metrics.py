from __future__ import annotations

import numpy as np

from .._algae.exceptions import ContractViolation
from .._algae.utils import raiseif


def _pair(pred, truth):
    pred, truth = np.asarray(pred, dtype=np.int64).reshape(-1), np.asarray(truth, dtype=np.int64).reshape(-1)

    raiseif(
        pred.size != truth.size or pred.size < 1,
        ContractViolation(f':[{pred.size}, {truth.size}]: Predictions and truth must be equally long and nonempty.')
    )

    return pred, truth


def accuracy(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.mean(pred == truth))


def confusion(pred, truth, class_count: int) -> np.ndarray:
    """`C x C` counts, rows indexed by the true class."""
    pred, truth = _pair(pred, truth)
    matrix = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(matrix, (truth, pred), 1)

    return matrix


def macro_f1(pred, truth, class_count: int = None) -> float:
    """Unweighted mean over classes `0..C-1` of `2PR / (P + R)`; a class with `P + R = 0` scores 0."""
    pred, truth = _pair(pred, truth)
    class_count = class_count or int(max(pred.max(), truth.max())) + 1
    matrix = confusion(pred, truth, class_count)
    tp = np.diag(matrix).astype(np.float64)
    predicted, actual = matrix.sum(axis=0), matrix.sum(axis=1)

    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    total = precision + recall
    f1 = np.divide(2.0 * precision * recall, total, out=np.zeros_like(tp), where=total > 0)

    return float(f1.mean())

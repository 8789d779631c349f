"""Evaluation statistics: accuracy, confusion matrices, Pearson correlation."""
from __future__ import annotations

import numpy as np
from scipy import stats as scipy_stats

from .errors import LabelError, UndefinedCorrelationError


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Counts with true class on rows, predicted class on columns."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise LabelError(f"label arrays differ in shape: {y_true.shape} vs "
                         f"{y_pred.shape}")
    for name, arr in (("true", y_true), ("predicted", y_pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise LabelError(f"{name} labels must lie in [0, {n_classes})")
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (y_true, y_pred), 1)
    return matrix


def accuracy_from_confusion(matrix: np.ndarray) -> float:
    total = matrix.sum()
    if total == 0:
        return 0.0
    return float(np.trace(matrix) / total)


def pearson(xs, ys) -> tuple[float, float]:
    """Sample Pearson r with a two-sided p-value from the t distribution
    on n-2 degrees of freedom."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError(f"series must be 1-D and equally long, got "
                         f"{xs.shape} and {ys.shape}")
    n = xs.size
    if n < 3:
        raise UndefinedCorrelationError(f"need at least 3 points, got {n}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = np.sqrt((dx * dx).sum())
    sy = np.sqrt((dy * dy).sum())
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("a series has zero variance")
    r = float((dx * dy).sum() / (sx * sy))
    r = max(-1.0, min(1.0, r))
    dof = n - 2
    if abs(r) == 1.0:
        return r, 0.0
    t = r * np.sqrt(dof / (1.0 - r * r))
    p = float(2.0 * scipy_stats.t.sf(abs(t), dof))
    return r, p

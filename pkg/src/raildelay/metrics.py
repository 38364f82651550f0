"""Regression and critical-event metrics.

Undefined results (R² of a constant target, precision or recall with a zero
denominator) are reported as ``None`` and never collapsed to 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "MetricsReport",
    "SummaryStats",
    "CriticalRow",
    "rmse",
    "mae",
    "r2",
    "precision_recall",
    "summary",
    "critical_count",
    "evaluate",
    "format_percentage",
]


def _pair(actual, predicted):
    a = np.asarray(actual, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise ValueError("metrics need at least one value")
    return a, p


def rmse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return float(np.sqrt(np.mean((a - p) ** 2)))


def mae(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return float(np.mean(np.abs(a - p)))


def r2(actual, predicted) -> Optional[float]:
    """Coefficient of determination; ``None`` when ``actual`` has zero variance."""
    a, p = _pair(actual, predicted)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        return None
    ss_res = float(np.sum((a - p) ** 2))
    return 1.0 - ss_res / ss_tot


def precision_recall(actual, predicted, threshold: float) -> Tuple[Optional[float], Optional[float]]:
    """Precision and recall of the ``value > threshold`` classification."""
    a, p = _pair(actual, predicted)
    actual_pos = a > threshold
    pred_pos = p > threshold
    tp = int(np.sum(actual_pos & pred_pos))
    n_pred = int(np.sum(pred_pos))
    n_actual = int(np.sum(actual_pos))
    precision = tp / n_pred if n_pred else None
    recall = tp / n_actual if n_actual else None
    return precision, recall


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    r2: Optional[float]
    mae: float
    precision: Optional[float]
    recall: Optional[float]
    threshold: float

    def as_dict(self):
        return {
            "RMSE": self.rmse,
            "R2": self.r2,
            "MAE": self.mae,
            "Precision": self.precision,
            "Recall": self.recall,
        }


def evaluate(actual, predicted, threshold: float) -> MetricsReport:
    precision, recall = precision_recall(actual, predicted, threshold)
    return MetricsReport(
        rmse=rmse(actual, predicted),
        r2=r2(actual, predicted),
        mae=mae(actual, predicted),
        precision=precision,
        recall=recall,
        threshold=threshold,
    )


@dataclass(frozen=True)
class SummaryStats:
    min: float
    q25: float
    median: float
    mean: float
    q75: float
    max: float

    # column order used by the regional tables
    COLUMNS = ("Mean", "Min", "25%", "50%", "75%", "Max")

    def row(self):
        return (self.mean, self.min, self.q25, self.median, self.q75, self.max)


def summary(values) -> SummaryStats:
    """Six-number summary; quantiles interpolate linearly at rank ``p * (n - 1)``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("summary of an empty vector")
    q25, median, q75 = np.quantile(v, [0.25, 0.5, 0.75], method="linear")
    mean = float(np.mean(v))
    lo, hi = float(v.min()), float(v.max())
    # float summation can push the mean a hair outside [min, max]
    mean = min(max(mean, lo), hi)
    return SummaryStats(lo, float(q25), float(median), mean, float(q75), hi)


@dataclass(frozen=True)
class CriticalRow:
    kind: str
    mode: str
    count: int
    total: int

    @property
    def percentage(self) -> float:
        return 100.0 * self.count / self.total


def critical_count(values, threshold: float) -> Tuple[int, float]:
    """Count of values strictly above ``threshold`` and its percentage of all values."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("critical_count of an empty vector")
    count = int(np.sum(v > threshold))
    return count, 100.0 * count / v.size


def format_percentage(pct: float) -> str:
    return f"{pct:.3f}%"

"""
Evaluation Reports

Per-prediction rows from holdout splits and the aggregate error statistics
computed from them.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..config.schema import GeometryKind
from ..geometry.metric_spaces import Geometry
from ..utils.file_ops import format_csv

ROW_COLUMNS = ["split", "entry", "model", "task", "true_delta", "predicted_delta", "error", "degree"]
SCATTER_COLUMNS = ["geometry", "true_delta", "predicted_delta", "model", "task", "degree"]


@dataclass(frozen=True)
class PredictionRow:
    """One held-out entry and the distance predicted for it."""
    split: int
    entry: int
    model: str
    task: str
    true_delta: float
    predicted_delta: float
    degree: int

    @property
    def error(self) -> float:
        return self.predicted_delta - self.true_delta


@dataclass(frozen=True)
class SkipRecord:
    """Holdout slots left unfilled in a split, with the reason."""
    split: int
    count: int
    reason: str


def rmse(errors: Sequence[float]) -> Optional[float]:
    e = np.asarray(errors, dtype=np.float64)
    return float(np.sqrt(np.mean(e * e))) if len(e) else None


def mae(errors: Sequence[float]) -> Optional[float]:
    e = np.asarray(errors, dtype=np.float64)
    return float(np.mean(np.abs(e))) if len(e) else None


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Pearson r, or None when undefined (fewer than 2 rows or a constant side)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2 or np.std(x) == 0.0 or np.std(y) == 0.0:
        return None
    return float(stats.pearsonr(x, y)[0])


@dataclass
class EvalReport:
    """Holdout predictions for one geometry across all splits."""
    geometry: Geometry
    rows: List[PredictionRow]
    holdouts: List[Tuple[int, ...]]
    train_rmse: List[float]
    skipped: List[SkipRecord] = field(default_factory=list)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows], dtype=np.float64)

    @property
    def rmse(self) -> Optional[float]:
        return rmse(self.errors)

    @property
    def mae(self) -> Optional[float]:
        return mae(self.errors)

    @property
    def pearson_r(self) -> Optional[float]:
        return pearson([r.predicted_delta for r in self.rows], [r.true_delta for r in self.rows])

    @property
    def mean_train_rmse(self) -> Optional[float]:
        return float(np.mean(self.train_rmse)) if self.train_rmse else None

    def aggregates(self) -> Dict[str, Any]:
        return {
            "geometry": self.geometry.kind.value,
            "dim": self.geometry.dim,
            "n_rows": len(self.rows),
            "n_splits": len(self.holdouts),
            "skipped": sum(s.count for s in self.skipped),
            "rmse": self.rmse,
            "mae": self.mae,
            "pearson_r": self.pearson_r,
            "train_rmse": self.mean_train_rmse,
        }

    def rows_csv(self) -> str:
        return format_csv(ROW_COLUMNS, (
            [r.split, r.entry, r.model, r.task, r.true_delta, r.predicted_delta, r.error, r.degree]
            for r in self.rows
        ))

    def scatter_rows(self) -> List[List[Any]]:
        kind = self.geometry.kind.value
        return [[kind, r.true_delta, r.predicted_delta, r.model, r.task, r.degree] for r in self.rows]


@dataclass
class GeometryComparison:
    """Reports for several geometries evaluated on identical holdouts."""
    reports: Dict[GeometryKind, EvalReport]

    def table(self) -> List[Dict[str, Any]]:
        return [report.aggregates() for report in self.reports.values()]

    def table_csv(self) -> str:
        columns = ["geometry", "dim", "n_rows", "n_splits", "skipped", "rmse", "mae", "pearson_r", "train_rmse"]
        return format_csv(columns, ([row[c] for c in columns] for row in self.table()))

    def scatter_csv(self) -> str:
        rows: List[List[Any]] = []
        for report in self.reports.values():
            rows.extend(report.scatter_rows())
        return format_csv(SCATTER_COLUMNS, rows)

"""
Dataset Quality

Spread and mean of the literature results on each task, and a saturation
flag for benchmarks whose results crowd the top of a bounded metric.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..config.schema import AnalysisConfig
from ..results_db.database import ResultsDb
from ..results_db.records import TaskKey, is_bounded_metric
from ..utils.file_ops import format_csv
from ..utils.logger import get_logger

logger = get_logger(__name__)

QUALITY_COLUMNS = ["task", "dataset", "fraction", "metric", "sigma", "mu", "n", "saturated"]


@dataclass(frozen=True)
class QualityRow:
    task: TaskKey
    sigma: float
    mu: float
    n: int
    saturated: bool


def is_saturated(metric: str, mu: float, sigma: float, config: Optional[AnalysisConfig] = None) -> bool:
    """Bounded metric, mean at or above the ceiling threshold and low spread."""
    config = config or AnalysisConfig()
    return is_bounded_metric(metric) and mu >= config.saturation_mean and sigma <= config.saturation_sigma


def dataset_quality(db: ResultsDb, config: Optional[AnalysisConfig] = None) -> List[QualityRow]:
    """
    Per-task σ and μ of the raw results, sorted by σ descending.

    σ uses the population convention (divide by n), so a single-result task
    has σ = 0. Ties keep first-appearance task order.
    """
    config = config or AnalysisConfig()
    rows = []
    for task in db.tasks:
        values = np.array([r.value for r in db.records_for_task(task)], dtype=np.float64)
        mu = float(np.mean(values))
        sigma = float(np.std(values))
        rows.append(QualityRow(task, sigma, mu, len(values), is_saturated(task.metric, mu, sigma, config)))

    rows.sort(key=lambda r: -r.sigma)
    n_saturated = sum(r.saturated for r in rows)
    if n_saturated:
        logger.info(f"{n_saturated} of {len(rows)} tasks look saturated")
    return rows


def quality_csv(rows: List[QualityRow]) -> str:
    return format_csv(QUALITY_COLUMNS, (
        [r.task.label, r.task.dataset, r.task.fraction, r.task.metric, r.sigma, r.mu, r.n, r.saturated]
        for r in rows
    ))

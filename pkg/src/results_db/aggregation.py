"""
Aggregation and Filtering

Collapse duplicate literature results to the best reported value and prune
the corpus to entities with enough results to be positioned reliably.

Author: CapMap Project
License: MIT
"""

from typing import Dict, Tuple

from .database import ResultsDb
from .records import ModelKey, PerformanceRecord, TaskKey
from ..utils.logger import get_logger

logger = get_logger(__name__)


def aggregate_max(db: ResultsDb) -> ResultsDb:
    """
    Keep one record per (model, task): the one with the highest value.

    Ties keep the first-ingested record. The surviving record takes the
    position of the first occurrence of its pair, so a duplicate-free
    database comes back unchanged.
    """
    best: Dict[Tuple[ModelKey, TaskKey], PerformanceRecord] = {}
    for record in db:
        current = best.get(record.pair)
        if current is None or record.value > current.value:
            best[record.pair] = record

    dropped = len(db) - len(best)
    if dropped:
        logger.info(f"Aggregated {dropped} duplicate results (max rule)")

    # dict preserves first-insertion order of each pair
    return ResultsDb(best.values())


def filter_min_degree(
    db: ResultsDb,
    min_model_degree: int = 5,
    min_task_degree: int = 5
) -> ResultsDb:
    """
    Drop models and tasks with too few results, iterated to a fixed point.

    Removing a model can push a task under its threshold and vice versa, so
    passes repeat until nothing changes. The result is the largest
    sub-database in which every model has at least `min_model_degree`
    records and every task at least `min_task_degree`.

    Args:
        db: Aggregated results database
        min_model_degree: Minimum results per model
        min_task_degree: Minimum models per task

    Returns:
        Filtered database (possibly empty)
    """
    if not db.is_aggregated():
        raise ValueError("filter_min_degree requires an aggregated database")

    records = list(db.records)
    passes = 0
    while True:
        passes += 1
        model_degree: Dict[ModelKey, int] = {}
        task_degree: Dict[TaskKey, int] = {}
        for r in records:
            model_degree[r.model] = model_degree.get(r.model, 0) + 1
            task_degree[r.task] = task_degree.get(r.task, 0) + 1

        kept = [
            r for r in records
            if model_degree[r.model] >= min_model_degree and task_degree[r.task] >= min_task_degree
        ]
        if len(kept) == len(records):
            break
        records = kept

    result = ResultsDb(records)
    logger.info(
        f"Degree filter (models >= {min_model_degree}, tasks >= {min_task_degree}) "
        f"converged after {passes} passes: {result.summary().line()}"
    )
    if len(result) == 0 and len(db) > 0:
        logger.warning("Degree filter removed every record")
    return result

"""
Model Centrality

Mean latent distance from each model to every task point. Models that are
close to the state of the art on many tasks sit near the middle of the task
cloud and score low.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import List

from ..embedder.space import EmbeddingSpace
from ..results_db.records import ModelKey
from ..utils.file_ops import format_csv


@dataclass(frozen=True)
class CentralityRow:
    model: ModelKey
    centrality: float
    rank: int


def centrality(space: EmbeddingSpace) -> List[CentralityRow]:
    """
    Rank models by mean distance to all task points, most central first.

    Every task point counts, observed or not. Equal centralities are ranked
    by model label.

    Raises:
        ValueError: If the space has no task points
    """
    if not space.tasks:
        raise ValueError("centrality needs at least one task point")

    means = space.model_task_distances().mean(axis=1)
    order = sorted(range(len(space.models)), key=lambda i: (float(means[i]), space.models[i].label))
    return [CentralityRow(space.models[i], float(means[i]), rank) for rank, i in enumerate(order, start=1)]


def centrality_csv(rows: List[CentralityRow]) -> str:
    return format_csv(["rank", "model", "centrality"], ([r.rank, r.model.label, r.centrality] for r in rows))

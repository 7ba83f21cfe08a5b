"""
Dimension sweep: holdout error as a function of latent dimension, on shared
splits.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

from .splits import plan_holdouts, run_splits
from ..config.schema import FitConfig, GeometryKind, SplitPlan
from ..geometry.metric_spaces import Geometry
from ..normalize.delta_matrix import DeltaMatrix
from ..utils.file_ops import format_csv
from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class SweepRow:
    dim: int
    rmse: Optional[float]
    mae: Optional[float]
    pearson_r: Optional[float]
    train_rmse: Optional[float]


def sweep_dimensions(
    delta: DeltaMatrix,
    kind: GeometryKind,
    dims: Sequence[int],
    plan: Optional[SplitPlan] = None,
    config: Optional[FitConfig] = None,
    ball_epsilon: float = 1e-5,
) -> List[SweepRow]:
    """Run the holdout protocol once per dimension and tabulate the errors."""
    plan = plan or SplitPlan()
    holdouts = plan_holdouts(delta, plan)
    rows = []
    for dim in dims:
        report = run_splits(delta, Geometry(GeometryKind(kind), int(dim), ball_epsilon), plan, config, holdouts)
        rows.append(SweepRow(int(dim), report.rmse, report.mae, report.pearson_r, report.mean_train_rmse))
        logger.info(f"dim={dim}: holdout RMSE={report.rmse:.4f}, train RMSE={report.mean_train_rmse:.4f}")
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    return format_csv(
        ["dim", "rmse", "mae", "pearson_r", "train_rmse"],
        ([r.dim, r.rmse, r.mae, r.pearson_r, r.train_rmse] for r in rows),
    )

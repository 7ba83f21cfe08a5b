"""
Holdout Splits

Repeated random holdout: remove a few observed entries, fit on the rest,
and predict each held-out Δ as the latent distance of its pair.

Author: CapMap Project
License: MIT
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .report import EvalReport, GeometryComparison, PredictionRow, SkipRecord
from ..config.schema import FitConfig, GeometryKind, SplitPlan
from ..embedder.fitter import fit
from ..geometry.metric_spaces import Geometry, batch_distance
from ..normalize.delta_matrix import DeltaMatrix
from ..utils.logger import get_logger

logger = get_logger(__name__)

ORPHAN_REASON = "no eligible entry left without orphaning a model or task"


class InsufficientDataError(ValueError):
    """The matrix is too small for the requested split plan."""


@dataclass(frozen=True)
class HoldoutPlan:
    """Sorted held-out entry indices per split, plus unfilled slots."""
    splits: List[Tuple[int, ...]]
    skipped: List[SkipRecord]


def plan_holdouts(delta: DeltaMatrix, plan: SplitPlan) -> HoldoutPlan:
    """
    Draw the held-out entries of every split.

    Split s walks a permutation drawn from the seed sequence (plan.seed, s)
    and accepts an entry only if its model and its task each keep at least
    one training entry; rejected candidates are skipped and the walk
    continues. Holdouts depend only on the matrix and the plan, so every
    geometry evaluated with the same plan sees the same splits.

    Raises:
        InsufficientDataError: If the matrix has no more entries than one
            holdout, or a split cannot hold out a single entry
    """
    n = delta.n_entries
    if n <= plan.holdout_size:
        raise InsufficientDataError(
            f"{n} observed entries cannot support holdouts of {plan.holdout_size}"
        )

    model_degrees = delta.model_degrees()
    task_degrees = delta.task_degrees()
    splits: List[Tuple[int, ...]] = []
    skipped: List[SkipRecord] = []

    for s in range(plan.n_splits):
        rng = np.random.default_rng([plan.seed, s])
        model_left = model_degrees.copy()
        task_left = task_degrees.copy()
        chosen: List[int] = []
        resampled = 0

        # Accept candidates that leave both endpoints a training entry
        for k in rng.permutation(n):
            if len(chosen) == plan.holdout_size:
                break
            i, j = delta.model_index[k], delta.task_index[k]
            if model_left[i] <= 1 or task_left[j] <= 1:
                resampled += 1
                continue
            chosen.append(int(k))
            model_left[i] -= 1
            task_left[j] -= 1

        if resampled:
            logger.info(f"Split {s}: resampled {resampled} candidates that would orphan a model or task")
        if not chosen:
            raise InsufficientDataError(f"split {s}: {ORPHAN_REASON}")
        if len(chosen) < plan.holdout_size:
            missing = plan.holdout_size - len(chosen)
            logger.warning(f"Split {s}: {missing} holdout slots skipped ({ORPHAN_REASON})")
            skipped.append(SkipRecord(s, missing, ORPHAN_REASON))

        splits.append(tuple(sorted(chosen)))

    return HoldoutPlan(splits, skipped)


@dataclass(frozen=True)
class _SplitOutcome:
    rows: List[PredictionRow]
    train_rmse: float


def _run_split(
    delta: DeltaMatrix,
    geometry: Geometry,
    config: FitConfig,
    split: int,
    holdout: Sequence[int],
) -> _SplitOutcome:
    held = np.asarray(holdout, dtype=np.int64)
    train_idx = np.setdiff1d(np.arange(delta.n_entries), held)
    if np.intersect1d(train_idx, held).size:
        raise AssertionError("holdout entries leaked into the training set")

    # Fit on the remainder with a per-split seed
    train = delta.subset(train_idx)
    split_config = config.model_copy(update={"seed": config.seed + split})
    space = fit(train, geometry, split_config)

    # Predict each held-out entry as a latent distance
    mi = delta.model_index[held]
    ti = delta.task_index[held]
    predicted = batch_distance(geometry, space.model_coords[mi], space.task_coords[ti])
    degrees = train.model_degrees()

    rows = [
        PredictionRow(
            split=split,
            entry=int(k),
            model=delta.models[int(i)].label,
            task=delta.tasks[int(j)].label,
            true_delta=float(delta.values[k]),
            predicted_delta=float(p),
            degree=int(degrees[i]),
        )
        for k, i, j, p in zip(held, mi, ti, predicted)
    ]
    return _SplitOutcome(rows, float(np.sqrt(space.fit_report.loss)))


def run_splits(
    delta: DeltaMatrix,
    geometry: Geometry,
    plan: Optional[SplitPlan] = None,
    config: Optional[FitConfig] = None,
    holdouts: Optional[HoldoutPlan] = None,
) -> EvalReport:
    """
    Evaluate one geometry by repeated random holdout.

    Splits are independent and may be fitted concurrently (`plan.workers`);
    the report is assembled in split order regardless of scheduling.

    Raises:
        InsufficientDataError: If the matrix is too small for the plan
    """
    plan = plan or SplitPlan()
    config = config or FitConfig()
    holdouts = holdouts or plan_holdouts(delta, plan)

    logger.info(
        f"Evaluating {geometry.kind.value} (dim={geometry.dim}): {len(holdouts.splits)} splits "
        f"of {plan.holdout_size} held-out entries"
    )

    def job(s: int) -> _SplitOutcome:
        return _run_split(delta, geometry, config, s, holdouts.splits[s])

    indices = range(len(holdouts.splits))
    if plan.workers > 1:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            outcomes = list(pool.map(job, indices))
    else:
        outcomes = [job(s) for s in indices]

    # Assemble in split order
    rows = [row for outcome in outcomes for row in outcome.rows]
    report = EvalReport(
        geometry=geometry,
        rows=rows,
        holdouts=list(holdouts.splits),
        train_rmse=[o.train_rmse for o in outcomes],
        skipped=list(holdouts.skipped),
    )
    logger.info(f"{geometry.kind.value}: holdout RMSE={report.rmse:.4f} over {len(rows)} predictions")
    return report


def compare_geometries(
    delta: DeltaMatrix,
    plan: Optional[SplitPlan] = None,
    config: Optional[FitConfig] = None,
    kinds: Iterable[GeometryKind] = tuple(GeometryKind),
    dim: int = 5,
    ball_epsilon: float = 1e-5,
) -> GeometryComparison:
    """
    Run the same holdout protocol for several geometries.

    Holdouts are drawn once and shared, so every geometry is scored on
    identical entries.
    """
    plan = plan or SplitPlan()
    holdouts = plan_holdouts(delta, plan)
    reports = {}
    for kind in kinds:
        geometry = Geometry(GeometryKind(kind), dim, ball_epsilon)
        reports[geometry.kind] = run_splits(delta, geometry, plan, config, holdouts)
    return GeometryComparison(reports)

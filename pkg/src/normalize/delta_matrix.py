"""
Normalized Gap Matrix

Turns raw per-task performances into the sparse matrix Δ ∈ [0, 1] used as
embedding targets: 0 is the best result reported for a task, 1 the worst.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..results_db.database import ResultsDb
from ..results_db.records import ModelKey, TaskKey
from ..utils.file_ops import format_csv
from ..utils.logger import get_logger

logger = get_logger(__name__)


class DegenerateTaskError(ValueError):
    """Raised when de-normalizing on a task whose results have zero spread."""


@dataclass(frozen=True)
class TaskStatistics:
    """Per-task constants retained for de-normalization and reporting."""
    task: TaskKey
    best_value: float
    max_delta: float
    n: int
    degenerate: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.task.label,
            "dataset": self.task.dataset,
            "fraction": float(self.task.fraction),
            "metric": self.task.metric,
            "best_value": float(self.best_value),
            "max_delta": float(self.max_delta),
            "n": int(self.n),
            "degenerate": bool(self.degenerate),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TaskStatistics":
        return cls(
            task=TaskKey(data["dataset"], float(data["fraction"]), data["metric"]),
            best_value=float(data["best_value"]),
            max_delta=float(data["max_delta"]),
            n=int(data["n"]),
            degenerate=bool(data["degenerate"]),
        )


class TaskStatsTable:
    """Task statistics by key, in a fixed order. Serialized as the Δ sidecar."""

    def __init__(self, stats: Iterable[TaskStatistics]):
        self._stats: Dict[TaskKey, TaskStatistics] = {s.task: s for s in stats}

    def __contains__(self, task: TaskKey) -> bool:
        return task in self._stats

    def __len__(self) -> int:
        return len(self._stats)

    def __iter__(self):
        return iter(self._stats.values())

    def get(self, task: TaskKey) -> TaskStatistics:
        try:
            return self._stats[task]
        except KeyError:
            raise KeyError(f"unknown task: {task.label}")

    def by_label(self) -> Dict[str, TaskStatistics]:
        return {s.task.label: s for s in self._stats.values()}

    def with_task(self, stats: TaskStatistics) -> "TaskStatsTable":
        """Copy with one task added or replaced."""
        merged = dict(self._stats)
        merged[stats.task] = stats
        return TaskStatsTable(merged.values())

    def to_json(self) -> Dict[str, Any]:
        return {"tasks": [s.to_dict() for s in self._stats.values()]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "TaskStatsTable":
        return cls(TaskStatistics.from_dict(item) for item in data["tasks"])


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class DeltaMatrix:
    """
    Sparse model × task matrix of normalized gaps.

    Entries are stored as parallel arrays (model index, task index, Δ, δ,
    raw value) in corpus order. The arrays are read-only.
    """

    def __init__(
        self,
        models: Sequence[ModelKey],
        tasks: Sequence[TaskKey],
        model_index: Sequence[int],
        task_index: Sequence[int],
        values: Sequence[float],
        gaps: Optional[Sequence[float]] = None,
        raw: Optional[Sequence[float]] = None,
        task_stats: Optional[TaskStatsTable] = None,
    ):
        self.models: Tuple[ModelKey, ...] = tuple(models)
        self.tasks: Tuple[TaskKey, ...] = tuple(tasks)
        self.model_index = _readonly(np.asarray(model_index, dtype=np.int64).copy())
        self.task_index = _readonly(np.asarray(task_index, dtype=np.int64).copy())
        self.values = _readonly(np.asarray(values, dtype=np.float64).copy())
        n = len(self.values)
        self.gaps = _readonly(np.asarray(gaps if gaps is not None else self.values, dtype=np.float64).copy())
        self.raw = _readonly(np.asarray(raw if raw is not None else 1.0 - self.values, dtype=np.float64).copy())

        if not (len(self.model_index) == len(self.task_index) == n == len(self.gaps) == len(self.raw)):
            raise ValueError("entry arrays must have equal length")
        if n and (self.model_index.min() < 0 or self.model_index.max() >= len(self.models)):
            raise ValueError("model index out of range")
        if n and (self.task_index.min() < 0 or self.task_index.max() >= len(self.tasks)):
            raise ValueError("task index out of range")
        if len(set(zip(self.model_index.tolist(), self.task_index.tolist()))) != n:
            raise ValueError("duplicate (model, task) entry")
        for kind, keys in (("model", self.models), ("task", self.tasks)):
            seen: Dict[str, object] = {}
            for key in keys:
                if seen.setdefault(key.label, key) != key:
                    raise ValueError(f"two {kind}s share the display label {key.label!r}")

        if task_stats is None:
            # Synthetic matrices: raw = 1 - Δ on every task
            task_stats = TaskStatsTable(
                TaskStatistics(t, 1.0, 1.0, int(np.sum(self.task_index == j)), False)
                for j, t in enumerate(self.tasks)
            )
        self.task_stats = task_stats

        self._model_pos = {m: i for i, m in enumerate(self.models)}
        self._task_pos = {t: j for j, t in enumerate(self.tasks)}

    @classmethod
    def from_entries(
        cls,
        models: Sequence[ModelKey],
        tasks: Sequence[TaskKey],
        entries: Mapping[Tuple[int, int], float],
    ) -> "DeltaMatrix":
        """Build a matrix directly from {(model_index, task_index): Δ}."""
        keys = sorted(entries)
        return cls(
            models, tasks,
            [i for i, _ in keys], [j for _, j in keys], [entries[k] for k in keys],
        )

    @property
    def n_entries(self) -> int:
        return len(self.values)

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.models), len(self.tasks))

    @property
    def entries(self) -> Dict[Tuple[int, int], float]:
        return {
            (int(i), int(j)): float(v)
            for i, j, v in zip(self.model_index, self.task_index, self.values)
        }

    def model_position(self, model: ModelKey) -> int:
        return self._model_pos[model]

    def task_position(self, task: TaskKey) -> int:
        return self._task_pos[task]

    def value(self, model: ModelKey, task: TaskKey) -> Optional[float]:
        """Δ for a pair, or None when unobserved."""
        i, j = self._model_pos.get(model), self._task_pos.get(task)
        if i is None or j is None:
            return None
        hits = np.flatnonzero((self.model_index == i) & (self.task_index == j))
        return float(self.values[hits[0]]) if len(hits) else None

    def model_degrees(self) -> np.ndarray:
        return np.bincount(self.model_index, minlength=len(self.models))

    def task_degrees(self) -> np.ndarray:
        return np.bincount(self.task_index, minlength=len(self.tasks))

    @property
    def degenerate_tasks(self) -> List[TaskKey]:
        return [s.task for s in self.task_stats if s.degenerate]

    def subset(self, entry_indices: Union[Sequence[int], np.ndarray]) -> "DeltaMatrix":
        """
        Matrix restricted to the given entries.

        Model and task lists and task statistics are kept whole so that
        targets stay identical to the full matrix.
        """
        idx = np.asarray(entry_indices, dtype=np.int64)
        return DeltaMatrix(
            self.models, self.tasks,
            self.model_index[idx], self.task_index[idx], self.values[idx],
            self.gaps[idx], self.raw[idx], self.task_stats,
        )

    def to_csv(self) -> str:
        """Dense view: one row per model, one column per task, blanks where unobserved."""
        grid: List[List[Optional[float]]] = [[None] * len(self.tasks) for _ in self.models]
        for i, j, v in zip(self.model_index, self.task_index, self.values):
            grid[int(i)][int(j)] = float(v)
        header = ["model"] + [t.label for t in self.tasks]
        return format_csv(header, ([m.label] + row for m, row in zip(self.models, grid)))

    def __repr__(self) -> str:
        return f"DeltaMatrix({len(self.models)} models x {len(self.tasks)} tasks, {self.n_entries} entries)"


def normalize(db: ResultsDb) -> DeltaMatrix:
    """
    Compute δ and Δ for every observed pair.

    For each task t: δ_{m,t} = p_{m*,t} − p_{m,t} where m* is the best model
    on t, and Δ_{m,t} = δ_{m,t} / max_m δ_{m,t}. Tasks whose results all
    coincide get Δ = 0 everywhere and are flagged degenerate.

    Args:
        db: Aggregated results database

    Returns:
        DeltaMatrix with the sparsity pattern of `db`
    """
    if not db.is_aggregated():
        raise ValueError("normalize requires an aggregated database (run aggregate_max first)")

    models = db.models
    tasks = db.tasks
    model_pos = {m: i for i, m in enumerate(models)}
    task_pos = {t: j for j, t in enumerate(tasks)}

    stats: List[TaskStatistics] = []
    per_task: Dict[TaskKey, Tuple[np.ndarray, np.ndarray, float]] = {}
    for task in tasks:
        values = np.array([r.value for r in db.records_for_task(task)], dtype=np.float64)
        best = float(values.max())
        gaps = best - values
        max_delta = float(gaps.max())
        degenerate = max_delta == 0.0
        if degenerate:
            deltas = np.zeros_like(gaps)
            logger.warning(f"Degenerate task (zero spread over {len(values)} results): {task.label}")
        else:
            deltas = gaps / max_delta
        per_task[task] = (gaps, deltas, best)
        stats.append(TaskStatistics(task, best, max_delta, len(values), degenerate))

    # Walk records in corpus order, consuming each task's arrays in turn
    cursor = {t: 0 for t in tasks}
    model_index, task_index, values, gaps, raw = [], [], [], [], []
    for record in db:
        k = cursor[record.task]
        cursor[record.task] += 1
        task_gaps, task_deltas, _ = per_task[record.task]
        model_index.append(model_pos[record.model])
        task_index.append(task_pos[record.task])
        values.append(task_deltas[k])
        gaps.append(task_gaps[k])
        raw.append(record.value)

    matrix = DeltaMatrix(models, tasks, model_index, task_index, values, gaps, raw, TaskStatsTable(stats))
    logger.info(f"Normalized {matrix!r} ({len(matrix.degenerate_tasks)} degenerate tasks)")
    return matrix


@dataclass(frozen=True)
class Denormalized:
    """A prediction expressed in the task's metric units."""
    value: float
    extrapolated: bool


def denormalize(
    delta_hat: float,
    task: TaskKey,
    matrix: Union[DeltaMatrix, TaskStatsTable],
) -> Denormalized:
    """
    Map a predicted Δ back to raw metric units: best − Δ̂ · max δ.

    `extrapolated` is set when Δ̂ lies outside [0, 1], i.e. beyond the best
    or worst result observed in the literature.

    Raises:
        KeyError: If the task is unknown
        DegenerateTaskError: If the task has zero spread
    """
    table = matrix.task_stats if isinstance(matrix, DeltaMatrix) else matrix
    stats = table.get(task)
    if stats.degenerate:
        raise DegenerateTaskError(f"cannot denormalize on zero-spread task {task.label}")

    extrapolated = not (0.0 <= delta_hat <= 1.0)
    if extrapolated:
        logger.warning(f"Δ̂={delta_hat:.4f} on {task.label} lies outside the observed range")
    return Denormalized(stats.best_value - delta_hat * stats.max_delta, extrapolated)

"""
Results Database

Immutable collection of performance records indexed by model and by task.

Author: CapMap Project
License: MIT
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Tuple

from .records import ModelKey, PerformanceRecord, TaskKey


def _plural(count: int, noun: str) -> str:
    return f"{count} {noun}" if count == 1 else f"{count} {noun}s"


@dataclass(frozen=True)
class CorpusSummary:
    """Record, model and task counts with per-entity degrees."""
    n_records: int
    n_models: int
    n_tasks: int
    model_degrees: Dict[ModelKey, int]
    task_degrees: Dict[TaskKey, int]

    def line(self) -> str:
        """Human-readable counts, e.g. '3 records, 3 models, 1 task'."""
        return ", ".join([
            _plural(self.n_records, "record"),
            _plural(self.n_models, "model"),
            _plural(self.n_tasks, "task"),
        ])


class ResultsDb:
    """
    Database of fine-tuning results.

    Records keep their ingestion order, which drives every downstream
    ordering (models and tasks are listed by first appearance). Instances are
    not mutated after construction; operations return new databases.
    """

    def __init__(self, records: Iterable[PerformanceRecord] = ()):
        self._records: Tuple[PerformanceRecord, ...] = tuple(records)

        by_model: Dict[ModelKey, List[PerformanceRecord]] = {}
        by_task: Dict[TaskKey, List[PerformanceRecord]] = {}
        for record in self._records:
            by_model.setdefault(record.model, []).append(record)
            by_task.setdefault(record.task, []).append(record)

        self._by_model = {k: tuple(v) for k, v in by_model.items()}
        self._by_task = {k: tuple(v) for k, v in by_task.items()}

    @property
    def records(self) -> Tuple[PerformanceRecord, ...]:
        return self._records

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[PerformanceRecord]:
        return iter(self._records)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultsDb):
            return NotImplemented
        return self._records == other._records

    def __hash__(self) -> int:
        return hash(self._records)

    def __repr__(self) -> str:
        return f"ResultsDb({self.summary().line()})"

    @property
    def models(self) -> List[ModelKey]:
        """Models in order of first appearance."""
        return list(self._by_model)

    @property
    def tasks(self) -> List[TaskKey]:
        """Tasks in order of first appearance."""
        return list(self._by_task)

    def records_for_model(self, model: ModelKey) -> Tuple[PerformanceRecord, ...]:
        return self._by_model.get(model, ())

    def records_for_task(self, task: TaskKey) -> Tuple[PerformanceRecord, ...]:
        return self._by_task.get(task, ())

    def is_aggregated(self) -> bool:
        """True when no (model, task) pair occurs more than once."""
        return len({r.pair for r in self._records}) == len(self._records)

    def model_degrees(self) -> Dict[ModelKey, int]:
        return {m: len(rs) for m, rs in self._by_model.items()}

    def task_degrees(self) -> Dict[TaskKey, int]:
        return {t: len(rs) for t, rs in self._by_task.items()}

    def duplicate_counts(self) -> Counter:
        """Occurrences per (model, task) pair, only for pairs seen more than once."""
        counts = Counter(r.pair for r in self._records)
        return Counter({pair: n for pair, n in counts.items() if n > 1})

    def summary(self) -> CorpusSummary:
        return CorpusSummary(
            n_records=len(self._records),
            n_models=len(self._by_model),
            n_tasks=len(self._by_task),
            model_degrees=self.model_degrees(),
            task_degrees=self.task_degrees(),
        )

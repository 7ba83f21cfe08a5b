"""
Embedding Space

The fitted positions of every model and task, the geometry they live in and
the report of the fit that produced them. Instances are immutable: adding a
point returns a new space.

Author: CapMap Project
License: MIT
"""

import hashlib
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.schema import GeometryKind
from ..geometry.metric_spaces import Geometry, batch_distance, check_domain, pairwise_distances
from ..results_db.records import ModelKey, TaskKey
from ..utils.file_ops import read_json, write_json


class EntityKind(str, Enum):
    """Which side of the bipartite embedding a point belongs to."""
    MODEL = "model"
    TASK = "task"

    @property
    def opposite(self) -> "EntityKind":
        return EntityKind.TASK if self is EntityKind.MODEL else EntityKind.MODEL


class MissingPointError(KeyError):
    """A model or task has no point in the embedding."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing point"


@dataclass(frozen=True)
class FitReport:
    """Outcome of a fit."""
    loss: float
    initial_loss: float
    iterations: int
    converged: bool
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return {k: (float(v) if isinstance(v, float) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FitReport":
        return cls(
            loss=float(data["loss"]),
            initial_loss=float(data["initial_loss"]),
            iterations=int(data["iterations"]),
            converged=bool(data["converged"]),
            seed=int(data["seed"]),
        )


def _frozen(coords, rows: int, dim: int) -> np.ndarray:
    arr = np.array(coords, dtype=np.float64, copy=True).reshape(rows, dim)
    arr.setflags(write=False)
    return arr


class EmbeddingSpace:
    """One point per model and per task in a shared geometry."""

    def __init__(
        self,
        geometry: Geometry,
        models: Sequence[ModelKey],
        tasks: Sequence[TaskKey],
        model_coords,
        task_coords,
        fit_report: Optional[FitReport] = None,
    ):
        self.geometry = geometry
        self.models: Tuple[ModelKey, ...] = tuple(models)
        self.tasks: Tuple[TaskKey, ...] = tuple(tasks)
        if len(set(self.models)) != len(self.models) or len(set(self.tasks)) != len(self.tasks):
            raise ValueError("duplicate keys in embedding")

        self.model_coords = _frozen(model_coords, len(self.models), geometry.dim)
        self.task_coords = _frozen(task_coords, len(self.tasks), geometry.dim)
        self.fit_report = fit_report

        for coords in (self.model_coords, self.task_coords):
            if len(coords):
                check_domain(geometry, coords)
                if geometry.kind == GeometryKind.POINCARE:
                    norms = np.sqrt(np.einsum("ij,ij->i", coords, coords))
                    if np.any(norms > geometry.max_norm):
                        raise ValueError("Poincaré point beyond 1 - ball_epsilon")

        self._model_pos = {m: i for i, m in enumerate(self.models)}
        self._task_pos = {t: j for j, t in enumerate(self.tasks)}

    # -- lookup -----------------------------------------------------------

    @property
    def model_points(self) -> Dict[ModelKey, np.ndarray]:
        return {m: self.model_coords[i] for i, m in enumerate(self.models)}

    @property
    def task_points(self) -> Dict[TaskKey, np.ndarray]:
        return {t: self.task_coords[j] for j, t in enumerate(self.tasks)}

    def has(self, kind: EntityKind, key) -> bool:
        return key in (self._model_pos if kind == EntityKind.MODEL else self._task_pos)

    def model_position(self, model: ModelKey) -> int:
        try:
            return self._model_pos[model]
        except KeyError:
            raise MissingPointError(f"no point for model {model.label}")

    def task_position(self, task: TaskKey) -> int:
        try:
            return self._task_pos[task]
        except KeyError:
            raise MissingPointError(f"no point for task {task.label}")

    def point(self, kind: EntityKind, key) -> np.ndarray:
        if EntityKind(kind) == EntityKind.MODEL:
            return self.model_coords[self.model_position(key)]
        return self.task_coords[self.task_position(key)]

    def keys(self, kind: EntityKind) -> Tuple:
        return self.models if EntityKind(kind) == EntityKind.MODEL else self.tasks

    def find(self, kind: EntityKind, label: str):
        """Key whose display label equals `label`, or None."""
        for key in self.keys(kind):
            if key.label == label:
                return key
        return None

    def labels(self, kind: EntityKind) -> List[str]:
        return [k.label for k in self.keys(kind)]

    # -- distances --------------------------------------------------------

    def distance(self, model: ModelKey, task: TaskKey) -> float:
        """Predicted Δ for a (model, task) pair."""
        u = self.model_coords[self.model_position(model)]
        v = self.task_coords[self.task_position(task)]
        return float(batch_distance(self.geometry, u, v)[0])

    def model_task_distances(self) -> np.ndarray:
        """Dense models × tasks distance matrix."""
        return pairwise_distances(self.geometry, self.model_coords, self.task_coords)

    # -- derivation -------------------------------------------------------

    def with_point(self, kind: EntityKind, key, point) -> "EmbeddingSpace":
        """New space with one point added (or replaced)."""
        point = np.asarray(point, dtype=np.float64).reshape(1, self.geometry.dim)
        if EntityKind(kind) == EntityKind.MODEL:
            models, coords = list(self.models), self.model_coords.copy()
            if key in self._model_pos:
                coords[self._model_pos[key]] = point[0]
            else:
                models.append(key)
                coords = np.vstack([coords, point])
            return EmbeddingSpace(self.geometry, models, self.tasks, coords, self.task_coords, self.fit_report)

        tasks, coords = list(self.tasks), self.task_coords.copy()
        if key in self._task_pos:
            coords[self._task_pos[key]] = point[0]
        else:
            tasks.append(key)
            coords = np.vstack([coords, point])
        return EmbeddingSpace(self.geometry, self.models, tasks, self.model_coords, coords, self.fit_report)

    def digest(self) -> str:
        """SHA-256 over geometry, keys and coordinate bytes."""
        h = hashlib.sha256()
        h.update(repr(self.geometry.to_dict()).encode())
        h.update(repr([(m.method_name, m.backbone) for m in self.models]).encode())
        h.update(repr([(t.dataset, t.fraction, t.metric) for t in self.tasks]).encode())
        h.update(self.model_coords.tobytes())
        h.update(self.task_coords.tobytes())
        return h.hexdigest()

    # -- serialization ----------------------------------------------------

    def to_json(self) -> Dict[str, Any]:
        """
        JSON document with points keyed by display label.

        Floats are written with their shortest round-trip representation, so
        load(save(space)) restores every coordinate exactly.
        """
        model_labels = self.labels(EntityKind.MODEL)
        task_labels = self.labels(EntityKind.TASK)
        if len(set(model_labels)) != len(model_labels) or len(set(task_labels)) != len(task_labels):
            raise ValueError("display labels must be unique to serialize an embedding")

        report = self.fit_report
        return {
            "geometry": self.geometry.to_dict(),
            "seed": report.seed if report else None,
            "loss": float(report.loss) if report else None,
            "fit_report": report.to_dict() if report else None,
            "model_points": {m.label: [float(x) for x in row] for m, row in zip(self.models, self.model_coords)},
            "task_points": {t.label: [float(x) for x in row] for t, row in zip(self.tasks, self.task_coords)},
            "models": [
                {"label": m.label, "method": m.method_name, "backbone": m.backbone}
                for m in self.models
            ],
            "tasks": [
                {"label": t.label, "dataset": t.dataset, "fraction": float(t.fraction), "metric": t.metric}
                for t in self.tasks
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "EmbeddingSpace":
        geometry = Geometry.from_dict(data["geometry"])
        models = [ModelKey(m["method"], m.get("backbone", "")) for m in data["models"]]
        tasks = [TaskKey(t["dataset"], float(t["fraction"]), t["metric"]) for t in data["tasks"]]
        model_coords = np.array([data["model_points"][m.label] for m in models], dtype=np.float64)
        task_coords = np.array([data["task_points"][t.label] for t in tasks], dtype=np.float64)
        report = FitReport.from_dict(data["fit_report"]) if data.get("fit_report") else None
        return cls(
            geometry, models, tasks,
            model_coords.reshape(len(models), geometry.dim),
            task_coords.reshape(len(tasks), geometry.dim),
            report,
        )

    def save(self, path: Union[str, Path]) -> Path:
        return write_json(path, self.to_json())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "EmbeddingSpace":
        return cls.from_json(read_json(path))

    def __repr__(self) -> str:
        return (
            f"EmbeddingSpace({self.geometry.kind.value}, dim={self.geometry.dim}, "
            f"{len(self.models)} models, {len(self.tasks)} tasks)"
        )

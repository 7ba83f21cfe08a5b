"""
2D Map Projection

Deterministic planar layouts of an embedding for display: a principal
component projection, and a stress re-embedding that fits 2D Euclidean
distances to the latent distances among all points.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..config.schema import FitConfig, GeometryKind, ProjectionMethod
from ..embedder.fitter import optimize_points, stress
from ..embedder.space import EmbeddingSpace, EntityKind
from ..geometry.metric_spaces import Geometry, pairwise_distances
from ..results_db.database import ResultsDb
from ..results_db.records import ModelKey
from ..utils.file_ops import format_csv
from ..utils.logger import get_logger

logger = get_logger(__name__)

PLANE = Geometry(GeometryKind.EUCLIDEAN, 2)
MAP_COLUMNS = ["label", "kind", "x", "y", "class"]


@dataclass(frozen=True)
class Projection2D:
    """Planar coordinates of every model then every task."""
    method: ProjectionMethod
    labels: List[str]
    kinds: List[EntityKind]
    coords: np.ndarray
    stress: float

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {label: self.coords[i] for i, label in enumerate(self.labels)}


def _all_points(space: EmbeddingSpace) -> Tuple[np.ndarray, List[str], List[EntityKind]]:
    points = np.vstack([space.model_coords, space.task_coords])
    labels = space.labels(EntityKind.MODEL) + space.labels(EntityKind.TASK)
    kinds = [EntityKind.MODEL] * len(space.models) + [EntityKind.TASK] * len(space.tasks)
    return points, labels, kinds


def pca_coordinates(points: np.ndarray) -> np.ndarray:
    """
    Project rows onto their top two principal components.

    Each component's sign is fixed so that its largest-magnitude loading is
    positive. Data of rank below two gets zero coordinates on the missing
    components.
    """
    centered = points - points.mean(axis=0)
    _, _, vt = linalg.svd(centered, full_matrices=False)
    components = vt[:2].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    coords = centered @ components.T
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((len(coords), 2 - coords.shape[1]))])
    return coords


def project_2d(
    space: EmbeddingSpace,
    method: ProjectionMethod = ProjectionMethod.STRESS2D,
    config: Optional[FitConfig] = None,
) -> Projection2D:
    """
    Lay out all model and task points in the plane.

    Stress is the mean squared difference between planar distances and
    latent distances over every pair of points. stress2d starts from the
    pca layout and keeps the best configuration seen, so its stress never
    exceeds that of pca.

    Raises:
        ValueError: If the space has fewer than 3 points
    """
    method = ProjectionMethod(method)
    points, labels, kinds = _all_points(space)
    n = len(points)
    if n < 3:
        raise ValueError(f"a 2D map needs at least 3 points, got {n}")

    targets_dense = pairwise_distances(space.geometry, points, points)
    left, right = np.triu_indices(n, k=1)
    targets = targets_dense[left, right]

    coords = pca_coordinates(points)
    if method == ProjectionMethod.STRESS2D:
        result = optimize_points(
            PLANE, coords, left, right, targets, config or FitConfig(),
            describe_pair=lambda k: (labels[int(left[k])], labels[int(right[k])]),
        )
        coords = result.points

    achieved = stress(PLANE, coords, left, right, targets)
    logger.info(f"{method.value} projection of {n} points: stress={achieved:.6e}")
    return Projection2D(method, labels, kinds, coords, achieved)


def entity_classes(space: EmbeddingSpace, db: Optional[ResultsDb] = None) -> List[str]:
    """
    Display class of every model then every task.

    Models take the architecture family recorded in `db` (else "model");
    tasks take their family, suffixed " (low-label)" below 100% labels.
    """
    families: Dict[ModelKey, str] = {}
    if db is not None:
        for record in db:
            if record.architecture_family is not None:
                families.setdefault(record.model, record.architecture_family.value)

    classes = [families.get(m, "model") for m in space.models]
    classes += [t.family + (" (low-label)" if t.low_label else "") for t in space.tasks]
    return classes


def map_csv(projection: Projection2D, classes: List[str]) -> str:
    return format_csv(MAP_COLUMNS, (
        [label, kind.value, float(x), float(y), cls]
        for label, kind, (x, y), cls in zip(projection.labels, projection.kinds, projection.coords, classes)
    ))

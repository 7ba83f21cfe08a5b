"""
Entity Placement

Positions one new model or task against a frozen embedding from a handful of
known Δ values, without moving any existing point.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import List, Mapping, Optional

import numpy as np

from .fitter import optimize_points
from .space import EmbeddingSpace, EntityKind
from ..config.schema import FitConfig
from ..utils.logger import get_logger

logger = get_logger(__name__)


class PlacementError(ValueError):
    """The entity cannot be placed."""


@dataclass(frozen=True)
class Placement:
    """Best point found for the new entity and the loss it achieves."""
    kind: EntityKind
    key: object
    point: np.ndarray
    loss: float
    restart: int
    restart_losses: List[float]


def place_entity(
    space: EmbeddingSpace,
    kind: EntityKind,
    key,
    known_entries: Mapping[object, float],
    config: Optional[FitConfig] = None,
) -> Placement:
    """
    Fit a single new point against fixed anchors.

    The one-point stress problem is non-convex (each constraint is a sphere
    around its anchor), so it is solved from `config.place_restarts` starts
    and the lowest-loss solution kept; ties keep the earliest restart.
    Restart r draws from the seed sequence (config.seed, r).

    Args:
        space: Frozen embedding; never modified
        kind: Kind of the new entity
        key: Key of the new entity
        known_entries: Observed Δ against existing opposite-kind keys
        config: Optimizer settings

    Raises:
        PlacementError: If no observations are given
        MissingPointError: If an observation references an unknown key
    """
    config = config or FitConfig()
    kind = EntityKind(kind)
    if not known_entries:
        raise PlacementError("cannot place entity with no observations")

    anchor_kind = kind.opposite
    anchor_keys = list(known_entries)
    anchors = np.array([space.point(anchor_kind, k) for k in anchor_keys], dtype=np.float64)
    targets = np.array([float(known_entries[k]) for k in anchor_keys], dtype=np.float64)
    geometry = space.geometry

    if len(anchor_keys) < geometry.dim:
        logger.warning(f"low degree: {len(anchor_keys)} observations for {key.label}")

    n_anchors = len(anchors)
    left = np.full(n_anchors, n_anchors, dtype=np.int64)
    right = np.arange(n_anchors, dtype=np.int64)
    trainable = np.zeros(n_anchors + 1, dtype=bool)
    trainable[-1] = True

    center = anchors.mean(axis=0)
    spread = max(float(anchors.std(axis=0).max()) if n_anchors > 1 else 0.0, config.init_scale)

    best = None
    losses: List[float] = []
    for restart in range(config.place_restarts):
        rng = np.random.default_rng([config.seed, restart])
        start = center + rng.uniform(-spread, spread, size=geometry.dim)
        initial = np.vstack([anchors, start])
        result = optimize_points(
            geometry, initial, left, right, targets, config,
            trainable=trainable,
            describe_pair=lambda k: (key.label, anchor_keys[int(k)].label),
        )
        losses.append(result.loss)
        if best is None or result.loss < best[1].loss:
            best = (restart, result)

    restart, result = best
    point = result.points[-1].copy()
    point.setflags(write=False)
    logger.info(
        f"Placed {kind.value} {key.label} against {n_anchors} anchors: "
        f"loss={result.loss:.6e} (restart {restart} of {config.place_restarts})"
    )
    return Placement(kind, key, point, result.loss, restart, losses)

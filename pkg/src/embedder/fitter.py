"""
Embedding Fitter

Fits model and task points so that latent distances reproduce the observed
Δ entries, by minimizing the mean squared stress over observed pairs with a
projected first-order optimizer.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .optimizers import build_optimizer
from .space import EmbeddingSpace, FitReport
from ..config.schema import FitConfig
from ..geometry.metric_spaces import Geometry, batch_distance, batch_distance_gradient, project_rows
from ..normalize.delta_matrix import DeltaMatrix
from ..utils.logger import get_logger

logger = get_logger(__name__)


class NonFiniteLossError(ArithmeticError):
    """The stress became NaN or infinite during optimization."""

    def __init__(self, iteration: int, pair: Tuple[str, str]):
        self.iteration = iteration
        self.pair = pair
        super().__init__(f"non-finite loss at iteration {iteration} on pair {pair[0]!r} / {pair[1]!r}")


@dataclass
class OptimizationResult:
    """Best points found and the loss trajectory that led to them."""
    points: np.ndarray
    loss: float
    initial_loss: float
    iterations: int
    converged: bool
    history: List[float] = field(default_factory=list, repr=False)


def stress(geometry: Geometry, points: np.ndarray, left: np.ndarray, right: np.ndarray, targets: np.ndarray) -> float:
    """Mean of (d(points[left], points[right]) − targets)²."""
    d = batch_distance(geometry, points[left], points[right])
    r = d - targets
    return float(np.mean(r * r))


def optimize_points(
    geometry: Geometry,
    initial_points: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    targets: np.ndarray,
    config: FitConfig,
    trainable: Optional[np.ndarray] = None,
    describe_pair: Optional[Callable[[int], Tuple[str, str]]] = None,
) -> OptimizationResult:
    """
    Minimize mean squared stress over a set of point pairs.

    Each iteration evaluates the loss and its gradient, takes one optimizer
    step and projects the points back onto the geometry's domain. The
    lowest-loss configuration seen is returned, so the result never scores
    worse than the starting point.

    Args:
        geometry: Geometry the points live in
        initial_points: (n_points, dim) starting coordinates
        left, right: Row indices of each constrained pair
        targets: Target distance per pair
        config: Optimizer settings
        trainable: Optional boolean mask of rows allowed to move
        describe_pair: Maps a pair index to labels for error messages

    Raises:
        NonFiniteLossError: If the loss stops being finite
    """
    points = project_rows(geometry, initial_points)
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.float64)
    n = len(targets)
    if n == 0:
        raise ValueError("cannot optimize without constraints")

    # Rows outside `trainable` stay where they start
    frozen = None
    if trainable is not None:
        trainable = np.asarray(trainable, dtype=bool)
        frozen = points[~trainable].copy()

    optimizer = build_optimizer(config)
    params = {"points": points}
    history: List[float] = []
    best_loss = np.inf
    best_points = points.copy()
    converged = False
    window = config.convergence_window
    iterations = 0

    for iteration in range(config.max_iterations + 1):
        # Loss and per-pair distance gradients
        d, g_left, g_right, _ = batch_distance_gradient(geometry, points[left], points[right])
        residual = d - targets
        loss = float(np.mean(residual * residual))

        if not np.isfinite(loss):
            bad = int(np.flatnonzero(~np.isfinite(residual))[0]) if np.any(~np.isfinite(residual)) else 0
            pair = describe_pair(bad) if describe_pair else (str(left[bad]), str(right[bad]))
            raise NonFiniteLossError(iteration, pair)

        # Keep the best configuration seen
        history.append(loss)
        if loss < best_loss:
            best_loss = loss
            best_points = points.copy()

        if iteration % config.log_interval == 0:
            logger.debug(f"iteration {iteration}: loss={loss:.6e}")

        # Exact fit or a flat window ends the run
        if loss == 0.0:
            converged = True
            break
        if iteration >= window:
            previous = history[iteration - window]
            if abs(previous - loss) <= config.convergence_tolerance * previous:
                converged = True
                break
        if iteration == config.max_iterations:
            break

        # Scatter pair gradients onto their endpoints
        weight = (2.0 / n) * residual
        grad = np.zeros_like(points)
        np.add.at(grad, left, weight[:, None] * g_left)
        np.add.at(grad, right, weight[:, None] * g_right)
        if trainable is not None:
            grad[~trainable] = 0.0

        # Step, then pull back into the domain
        optimizer.step(params, {"points": grad})
        points = project_rows(geometry, params["points"])
        if frozen is not None:
            points[~trainable] = frozen
        params["points"] = points
        iterations += 1

    return OptimizationResult(
        points=best_points,
        loss=best_loss,
        initial_loss=history[0],
        iterations=iterations,
        converged=converged,
        history=history,
    )


def _entry_indices(space: EmbeddingSpace, delta: DeltaMatrix) -> Tuple[np.ndarray, np.ndarray]:
    model_rows = np.array([space.model_position(m) for m in delta.models], dtype=np.int64)
    task_rows = np.array([space.task_position(t) for t in delta.tasks], dtype=np.int64)
    return model_rows[delta.model_index], task_rows[delta.task_index]


def loss(space: EmbeddingSpace, delta: DeltaMatrix) -> float:
    """
    Mean squared stress of an embedding over the observed Δ entries.

    Raises:
        MissingPointError: If a model or task of `delta` has no point
    """
    if delta.n_entries == 0:
        raise ValueError("loss is undefined on an empty matrix")
    mi, ti = _entry_indices(space, delta)
    d = batch_distance(space.geometry, space.model_coords[mi], space.task_coords[ti])
    r = d - delta.values
    return float(np.mean(r * r))


def fit(delta: DeltaMatrix, geometry: Geometry, config: Optional[FitConfig] = None) -> EmbeddingSpace:
    """
    Fit one point per model and per task to the observed Δ entries.

    Points start i.i.d. uniform in [−init_scale, init_scale]^dim (projected
    onto the domain), drawn from `config.seed`, and are updated until the
    relative loss change over `convergence_window` iterations drops below
    `convergence_tolerance` or `max_iterations` is reached. Identical inputs
    and seed give bit-identical results.

    Raises:
        ValueError: If `delta` has no entries
        NonFiniteLossError: If the loss stops being finite
    """
    config = config or FitConfig()
    if delta.n_entries == 0:
        raise ValueError("cannot fit an embedding to an empty matrix")

    n_models, n_tasks = delta.shape
    rng = np.random.default_rng(config.seed)
    initial = rng.uniform(-config.init_scale, config.init_scale, size=(n_models + n_tasks, geometry.dim))

    left = delta.model_index
    right = delta.task_index + n_models

    def describe(k: int) -> Tuple[str, str]:
        return delta.models[int(delta.model_index[k])].label, delta.tasks[int(delta.task_index[k])].label

    logger.info(
        f"Fitting {geometry.kind.value} embedding (dim={geometry.dim}) to {delta.n_entries} entries "
        f"of {n_models} models x {n_tasks} tasks"
    )
    result = optimize_points(geometry, initial, left, right, delta.values, config, describe_pair=describe)

    report = FitReport(
        loss=result.loss,
        initial_loss=result.initial_loss,
        iterations=result.iterations,
        converged=result.converged,
        seed=config.seed,
    )
    logger.info(
        f"Fit finished: loss={report.loss:.6e} after {report.iterations} iterations "
        f"({'converged' if report.converged else 'iteration cap reached'})"
    )
    return EmbeddingSpace(
        geometry, delta.models, delta.tasks,
        result.points[:n_models], result.points[n_models:], report,
    )

"""
Unit Tests for the Embedder

Tests fitting on planted configurations, stress evaluation, determinism,
domain safety, serialization and single-entity placement.

Author: CapMap Project
License: MIT
"""

import io

import numpy as np
import pytest

from src.config.schema import FitConfig, GeometryKind, OptimizerKind
from src.embedder import (
    Adam,
    EmbeddingSpace,
    EntityKind,
    GradientDescent,
    MissingPointError,
    NonFiniteLossError,
    PlacementError,
    fit,
    loss,
    optimize_points,
    place_entity,
)
from src.geometry import Geometry
from src.normalize import DeltaMatrix
from src.results_db import ModelKey, TaskKey
from src.utils.logger import setup_logging

EUCLIDEAN = Geometry(GeometryKind.EUCLIDEAN, 5)
POINCARE = Geometry(GeometryKind.POINCARE, 5)


def planted_space(planted) -> EmbeddingSpace:
    return EmbeddingSpace(EUCLIDEAN, planted.models, planted.tasks, planted.model_coords, planted.task_coords)


class TestOptimizers:
    """Test suite for the first-order optimizers."""

    def test_gradient_descent_step(self):
        """Test p -= lr * g."""
        params = {"p": np.array([1.0, -2.0])}
        GradientDescent(lr=0.5).step(params, {"p": np.array([2.0, 2.0])})
        assert params["p"].tolist() == [0.0, -3.0]

    def test_adam_first_step_size(self):
        """Test that the first bias-corrected Adam step has magnitude lr."""
        params = {"p": np.array([1.0, 1.0])}
        Adam(lr=0.1).step(params, {"p": np.array([3.0, -0.5])})
        assert np.allclose(params["p"], [0.9, 1.1], atol=1e-6)

    def test_adam_minimizes_quadratic(self):
        """Test convergence on a convex bowl."""
        params = {"p": np.array([5.0, -3.0])}
        opt = Adam(lr=0.1)
        for _ in range(2000):
            opt.step(params, {"p": 2.0 * params["p"]})
        assert np.linalg.norm(params["p"]) < 1e-2


class TestFit:
    """Test suite for fit() and loss()."""

    def test_planted_recovery(self, planted):
        """Test that a fully observed planted configuration is reproduced."""
        delta = planted.delta()
        space = fit(delta, EUCLIDEAN, FitConfig())

        assert space.fit_report.loss < 1e-4
        d = space.model_task_distances()
        assert np.max(np.abs(d - planted.distances)) < 0.02

    def test_loss_matches_naive_double_loop(self, planted):
        """Test loss() against an explicit loop over observed pairs."""
        mask = np.random.default_rng(5).random((8, 8)) < 0.6
        delta = planted.delta(mask)
        space = fit(delta, EUCLIDEAN, FitConfig(max_iterations=50))

        total, count = 0.0, 0
        for i, m in enumerate(delta.models):
            for j, t in enumerate(delta.tasks):
                target = delta.value(m, t)
                if target is None:
                    continue
                u = space.model_coords[space.model_position(m)]
                v = space.task_coords[space.task_position(t)]
                total += (np.linalg.norm(u - v) - target) ** 2
                count += 1

        assert abs(loss(space, delta) - total / count) < 1e-12

    def test_loss_at_truth_is_zero(self, planted):
        """Test that the planted points have (numerically) zero stress."""
        assert loss(planted_space(planted), planted.delta()) < 1e-28

    def test_final_loss_not_above_initial(self, planted):
        """Test that best-point tracking never returns a worse configuration."""
        for kind in GeometryKind:
            space = fit(planted.delta(), Geometry(kind, 3), FitConfig(max_iterations=100, learning_rate=0.5))
            assert space.fit_report.loss <= space.fit_report.initial_loss

    def test_loss_invariant_under_rigid_motion(self, planted):
        """Test that rotating and translating a fitted Euclidean space keeps its loss."""
        delta = planted.delta()
        space = fit(delta, EUCLIDEAN, FitConfig(max_iterations=200))
        rng = np.random.default_rng(17)
        rotation, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        shift = rng.normal(size=5)
        moved = EmbeddingSpace(
            EUCLIDEAN, space.models, space.tasks,
            space.model_coords @ rotation.T + shift, space.task_coords @ rotation.T + shift,
        )

        assert abs(loss(moved, delta) - loss(space, delta)) < 1e-9

    def test_final_loss_not_above_early_loss(self, planted):
        """Test final loss against the loss after 10% of the iterations."""
        delta = planted.delta()
        n_models = len(delta.models)
        config = FitConfig(max_iterations=1000, convergence_tolerance=1e-12)
        initial = np.random.default_rng(3).uniform(-0.1, 0.1, size=(n_models + len(delta.tasks), 5))

        result = optimize_points(
            EUCLIDEAN, initial, delta.model_index, delta.task_index + n_models, delta.values, config,
        )

        early = result.history[min(config.max_iterations // 10, len(result.history) - 1)]
        assert result.loss <= early
        assert result.loss <= result.initial_loss

    def test_two_entry_loss_by_hand(self):
        """Test residuals 0.1 and 0.3 give loss 0.05."""
        models = [ModelKey("a"), ModelKey("b")]
        tasks = [TaskKey("x", 100.0, "OA")]
        space = EmbeddingSpace(Geometry(GeometryKind.EUCLIDEAN, 1), models, tasks, [[0.6], [0.8]], [[0.0]])
        delta = DeltaMatrix.from_entries(models, tasks, {(0, 0): 0.5, (1, 0): 0.5})

        assert abs(loss(space, delta) - 0.05) < 1e-12

    def test_single_pair(self):
        """Test that one constraint is met to 1e-3."""
        models = [ModelKey("a")]
        tasks = [TaskKey("x", 100.0, "OA")]
        space = fit(DeltaMatrix.from_entries(models, tasks, {(0, 0): 0.7}), EUCLIDEAN)

        assert abs(space.distance(models[0], tasks[0]) - 0.7) < 1e-3

    def test_deterministic(self, planted):
        """Test that identical inputs and seed give bit-identical points."""
        config = FitConfig(max_iterations=300, seed=9)
        a = fit(planted.delta(), POINCARE, config)
        b = fit(planted.delta(), POINCARE, config)

        assert np.array_equal(a.model_coords, b.model_coords)
        assert np.array_equal(a.task_coords, b.task_coords)
        assert a.digest() == b.digest()

    def test_seed_changes_result(self, planted):
        """Test that a different seed starts elsewhere."""
        a = fit(planted.delta(), EUCLIDEAN, FitConfig(max_iterations=10, seed=1))
        b = fit(planted.delta(), EUCLIDEAN, FitConfig(max_iterations=10, seed=2))
        assert not np.array_equal(a.model_coords, b.model_coords)

    def test_poincare_points_stay_in_ball(self, planted):
        """Test the 1 − ε norm bound after a Poincaré fit with an aggressive step."""
        space = fit(planted.delta(), POINCARE, FitConfig(max_iterations=500, learning_rate=0.2))
        norms = np.linalg.norm(np.vstack([space.model_coords, space.task_coords]), axis=1)
        assert np.all(norms <= 1.0 - POINCARE.ball_epsilon)

    def test_gradient_descent_option(self, planted):
        """Test that plain gradient descent also lowers the loss."""
        config = FitConfig(optimizer=OptimizerKind.GRADIENT_DESCENT, learning_rate=0.5, max_iterations=500)
        space = fit(planted.delta(), EUCLIDEAN, config)
        assert space.fit_report.loss < space.fit_report.initial_loss

    def test_empty_matrix(self, planted):
        """Test that fitting nothing is an error."""
        with pytest.raises(ValueError):
            fit(planted.delta(np.zeros((8, 8), dtype=bool)), EUCLIDEAN)

    def test_non_finite_loss(self, planted, mocker):
        """Test that a NaN loss aborts with the offending pair."""
        import src.embedder.fitter as fitter

        original = fitter.batch_distance_gradient

        def poisoned(g, U, V):
            d, dU, dV, c = original(g, U, V)
            d = d.copy()
            d[3] = np.nan
            return d, dU, dV, c

        mocker.patch.object(fitter, "batch_distance_gradient", side_effect=poisoned)
        delta = planted.delta()

        with pytest.raises(NonFiniteLossError) as info:
            fit(delta, EUCLIDEAN, FitConfig(max_iterations=5))

        assert info.value.iteration == 0
        assert info.value.pair == (delta.models[int(delta.model_index[3])].label,
                                   delta.tasks[int(delta.task_index[3])].label)

    def test_missing_point(self, planted):
        """Test that loss() on an unknown model raises MissingPointError."""
        space = planted_space(planted)
        other = planted.delta()
        other_models = [ModelKey("stranger")] + list(other.models[1:])

        foreign = DeltaMatrix(other_models, other.tasks, other.model_index, other.task_index, other.values)
        with pytest.raises(MissingPointError):
            loss(space, foreign)


class TestEmbeddingSpace:
    """Test suite for the embedding container."""

    def test_save_load_exact(self, tmp_path, planted):
        """Test that coordinates survive JSON exactly."""
        space = fit(planted.delta(), POINCARE, FitConfig(max_iterations=50))
        path = space.save(tmp_path / "embedding.json")
        loaded = EmbeddingSpace.load(path)

        assert np.array_equal(loaded.model_coords, space.model_coords)
        assert loaded.geometry == space.geometry
        assert loaded.fit_report == space.fit_report
        assert loaded.digest() == space.digest()

    def test_json_layout(self, planted):
        """Test the documented top-level keys."""
        doc = fit(planted.delta(), EUCLIDEAN, FitConfig(max_iterations=5)).to_json()
        assert {"geometry", "seed", "loss", "model_points", "task_points"} <= set(doc)
        assert doc["geometry"]["kind"] == "euclidean"
        assert doc["seed"] == 42

    def test_rejects_points_outside_ball(self):
        """Test the Poincaré norm bound at construction."""
        g = Geometry(GeometryKind.POINCARE, 2)
        with pytest.raises(ValueError):
            EmbeddingSpace(g, [ModelKey("m")], [TaskKey("t", 100.0, "OA")], [[0.999999, 0.0]], [[0.0, 0.0]])

    def test_with_point_is_copy(self, planted):
        """Test that adding a point leaves the original untouched."""
        space = planted_space(planted)
        new = space.with_point(EntityKind.MODEL, ModelKey("new"), np.zeros(5))

        assert len(new.models) == len(space.models) + 1
        assert not space.has(EntityKind.MODEL, ModelKey("new"))

    def test_coordinates_read_only(self, planted):
        """Test that stored coordinates cannot be mutated."""
        with pytest.raises(ValueError):
            planted_space(planted).model_coords[0, 0] = 1.0


class TestPlacement:
    """Test suite for place_entity()."""

    def test_recovers_planted_model(self, planted):
        """Test that a held-out planted model is placed at the right distances."""
        space = EmbeddingSpace(
            EUCLIDEAN, planted.models[1:], planted.tasks, planted.model_coords[1:], planted.task_coords,
        )
        known = {t: float(planted.distances[0, j]) for j, t in enumerate(planted.tasks)}

        placement = place_entity(space, EntityKind.MODEL, planted.models[0], known, FitConfig())
        placed = space.with_point(EntityKind.MODEL, planted.models[0], placement.point)

        for j, t in enumerate(planted.tasks):
            assert abs(placed.distance(planted.models[0], t) - planted.distances[0, j]) < 1e-2

    def test_places_task(self, planted):
        """Test placement of a new task against model anchors."""
        space = EmbeddingSpace(
            EUCLIDEAN, planted.models, planted.tasks[1:], planted.model_coords, planted.task_coords[1:],
        )
        known = {m: float(planted.distances[i, 0]) for i, m in enumerate(planted.models)}

        placement = place_entity(space, EntityKind.TASK, planted.tasks[0], known)

        assert placement.loss < 1e-4
        assert placement.kind == EntityKind.TASK

    def test_anchors_untouched(self, planted):
        """Test that the frozen space is not modified."""
        space = planted_space(planted)
        before = space.model_coords.copy(), space.task_coords.copy()
        place_entity(space, EntityKind.MODEL, ModelKey("new"), {planted.tasks[0]: 0.3, planted.tasks[1]: 0.5})

        assert np.array_equal(space.model_coords, before[0])
        assert np.array_equal(space.task_coords, before[1])

    def test_best_restart_kept(self, planted):
        """Test that the reported loss is the minimum over restarts."""
        space = planted_space(planted)
        placement = place_entity(space, EntityKind.MODEL, ModelKey("new"), {planted.tasks[0]: 0.3})

        assert placement.loss == min(placement.restart_losses)
        assert placement.restart == placement.restart_losses.index(placement.loss)
        assert len(placement.restart_losses) == FitConfig().place_restarts

    def test_low_degree_warning(self, planted):
        """Test the warning for fewer observations than dimensions."""
        stream = io.StringIO()
        setup_logging("INFO", stream=stream)
        place_entity(planted_space(planted), EntityKind.MODEL, ModelKey("new"), {planted.tasks[0]: 0.3})

        assert "low degree: 1" in stream.getvalue()

    def test_no_observations(self, planted):
        """Test that an empty observation set is refused."""
        with pytest.raises(PlacementError, match="no observations"):
            place_entity(planted_space(planted), EntityKind.MODEL, ModelKey("new"), {})

    def test_unknown_anchor(self, planted):
        """Test that observations against unknown tasks are refused."""
        with pytest.raises(MissingPointError):
            place_entity(planted_space(planted), EntityKind.MODEL, ModelKey("new"),
                         {TaskKey("nowhere", 100.0, "OA"): 0.2})

    def test_deterministic(self, planted):
        """Test that placement is reproducible."""
        space = planted_space(planted)
        known = {planted.tasks[0]: 0.3, planted.tasks[1]: 0.6}
        a = place_entity(space, EntityKind.MODEL, ModelKey("new"), known)
        b = place_entity(space, EntityKind.MODEL, ModelKey("new"), known)
        assert np.array_equal(a.point, b.point)

    def test_one_anchor_distance(self, planted):
        """Test that a single observation is met to 1e-3."""
        space = planted_space(planted)
        placement = place_entity(space, EntityKind.MODEL, ModelKey("new"), {planted.tasks[2]: 0.4})
        placed = space.with_point(EntityKind.MODEL, ModelKey("new"), placement.point)

        assert abs(placed.distance(ModelKey("new"), planted.tasks[2]) - 0.4) < 1e-3

    def test_infeasible_zero_targets(self, planted):
        """Test best-effort placement when Δ = 0 to three separated anchors."""
        space = planted_space(planted)
        known = {t: 0.0 for t in planted.tasks[:3]}

        placement = place_entity(space, EntityKind.MODEL, ModelKey("new"), known)

        assert np.all(np.isfinite(placement.point))
        assert placement.loss > 0.0

    def test_frozen_space_digest_unchanged(self, planted):
        """Test that placement leaves the space's digest intact."""
        space = planted_space(planted)
        before = space.digest()
        place_entity(space, EntityKind.TASK, TaskKey("new", 100.0, "OA"), {planted.models[0]: 0.2})

        assert space.digest() == before

"""
Unit Tests for Normalization

Tests δ/Δ computation, degenerate tasks, sidecar statistics and
de-normalization.

Author: CapMap Project
License: MIT
"""

import numpy as np
import pytest

from src.normalize import (
    DegenerateTaskError,
    DeltaMatrix,
    TaskStatsTable,
    denormalize,
    normalize,
)
from src.results_db import ModelKey, PerformanceRecord, ResultsDb, TaskKey, aggregate_max, ingest


def corpus(rows):
    return ResultsDb(
        PerformanceRecord(ModelKey(m), TaskKey(t, 100.0, "OA"), v) for m, t, v in rows
    )


class TestNormalize:
    """Test suite for normalize()."""

    def test_table_norm_golden(self, table_norm_csv):
        """Test δ and Δ on the three-model reference table."""
        delta = normalize(aggregate_max(ingest(table_norm_csv)))

        assert np.allclose(delta.gaps, [4.4, 0.0, 0.9], atol=1e-12)
        assert np.allclose(delta.values, [1.0, 0.0, 0.9 / 4.4], atol=1e-9)
        assert abs(delta.values[2] - 0.2045454545) < 1e-9
        stats = delta.task_stats.get(delta.tasks[0])
        assert stats.best_value == 94.1
        assert abs(stats.max_delta - 4.4) < 1e-12

    def test_range_and_anchors(self):
        """Test that every non-degenerate task has Δ in [0, 1] with a 0 and a 1."""
        rng = np.random.default_rng(3)
        rows = [(f"m{i}", f"t{j}", float(rng.uniform(40, 99))) for i in range(6) for j in range(4)]
        delta = normalize(corpus(rows))

        assert delta.values.min() >= 0.0
        assert delta.values.max() <= 1.0
        for j in range(4):
            task_values = delta.values[delta.task_index == j]
            assert task_values.min() == 0.0
            assert task_values.max() == 1.0

    @pytest.mark.parametrize("scale,shift", [(0.5, 10.0), (1.7, -20.0), (1.0, 3.25)])
    def test_affine_invariance(self, scale, shift):
        """Test that a·p + b with a > 0 leaves Δ unchanged."""
        rng = np.random.default_rng(11)
        rows = [(f"m{i}", f"t{j}", float(rng.uniform(40, 60))) for i in range(5) for j in range(3) if (i + j) % 4]
        moved = [(m, t, scale * v + shift) for m, t, v in rows]

        assert np.allclose(normalize(corpus(moved)).values, normalize(corpus(rows)).values, atol=1e-12)

    def test_shared_display_label_rejected(self):
        """Test that two models with one display label are refused before any fit."""
        db = ResultsDb([
            PerformanceRecord(ModelKey("SkySense", "Swin-H"), TaskKey("X", 100.0, "OA"), 90.0),
            PerformanceRecord(ModelKey("SkySense Swin-H"), TaskKey("X", 100.0, "OA"), 80.0),
        ])
        with pytest.raises(ValueError, match="display label"):
            normalize(db)

    def test_degenerate_task(self):
        """Test that equal results give Δ = 0 and a degenerate flag."""
        delta = normalize(corpus([("A", "X", 90.0), ("B", "X", 90.0), ("A", "Y", 80.0), ("B", "Y", 70.0)]))

        assert delta.degenerate_tasks == [TaskKey("X", 100.0, "OA")]
        assert list(delta.values[delta.task_index == 0]) == [0.0, 0.0]

    def test_single_result_task_is_degenerate(self):
        """Test that a task with one model has zero spread."""
        delta = normalize(corpus([("A", "X", 55.0)]))
        assert delta.values.tolist() == [0.0]
        assert delta.task_stats.get(delta.tasks[0]).degenerate

    def test_requires_aggregation(self):
        """Test that duplicate pairs are refused."""
        with pytest.raises(ValueError):
            normalize(corpus([("A", "X", 90.0), ("A", "X", 91.0)]))

    def test_sparsity_pattern_preserved(self):
        """Test that unobserved pairs stay unobserved."""
        delta = normalize(corpus([("A", "X", 90.0), ("B", "Y", 80.0), ("B", "X", 85.0)]))

        assert delta.n_entries == 3
        assert delta.value(ModelKey("A"), TaskKey("Y", 100.0, "OA")) is None
        assert delta.value(ModelKey("B"), TaskKey("X", 100.0, "OA")) == 1.0

    def test_arrays_read_only(self):
        """Test that entry arrays cannot be modified in place."""
        delta = normalize(corpus([("A", "X", 90.0), ("B", "X", 80.0)]))
        with pytest.raises(ValueError):
            delta.values[0] = 0.5

    def test_subset_keeps_statistics(self):
        """Test that a subset shares the parent's task statistics."""
        delta = normalize(corpus([("A", "X", 90.0), ("B", "X", 80.0), ("C", "X", 85.0)]))
        sub = delta.subset([0, 2])

        assert sub.n_entries == 2
        assert sub.task_stats is delta.task_stats
        assert sub.shape == delta.shape

    def test_delta_csv(self):
        """Test the dense Δ export."""
        delta = normalize(corpus([("A", "X", 90.0), ("B", "X", 80.0), ("A", "Y", 70.0)]))
        lines = delta.to_csv().splitlines()

        assert lines[0] == "model,X@100%/OA,Y@100%/OA"
        assert lines[1] == "A,0.0,0.0"
        assert lines[2] == "B,1.0,"


class TestDenormalize:
    """Test suite for denormalize()."""

    def test_inverse_of_normalize(self, table_norm_csv):
        """Test that observed Δ map back to the raw values."""
        delta = normalize(aggregate_max(ingest(table_norm_csv)))
        for k in range(delta.n_entries):
            result = denormalize(float(delta.values[k]), delta.tasks[0], delta)
            assert abs(result.value - delta.raw[k]) < 1e-9
            assert not result.extrapolated

    def test_extrapolation_flag(self, table_norm_csv):
        """Test that Δ̂ outside [0, 1] is flagged."""
        delta = normalize(aggregate_max(ingest(table_norm_csv)))
        result = denormalize(1.5, delta.tasks[0], delta)

        assert result.extrapolated
        assert abs(result.value - (94.1 - 1.5 * 4.4)) < 1e-9

    def test_degenerate_task_refused(self):
        """Test that zero-spread tasks cannot be de-normalized."""
        delta = normalize(corpus([("A", "X", 90.0), ("B", "X", 90.0)]))
        with pytest.raises(DegenerateTaskError, match="cannot denormalize"):
            denormalize(0.3, delta.tasks[0], delta)

    def test_unknown_task(self, table_norm_csv):
        """Test that tasks without statistics raise KeyError."""
        delta = normalize(aggregate_max(ingest(table_norm_csv)))
        with pytest.raises(KeyError):
            denormalize(0.1, TaskKey("Vaihingen", 100.0, "mF1"), delta)

    def test_sidecar_round_trip(self, table_norm_csv):
        """Test that statistics survive their JSON form."""
        delta = normalize(aggregate_max(ingest(table_norm_csv)))
        table = TaskStatsTable.from_json(delta.task_stats.to_json())

        assert denormalize(0.5, delta.tasks[0], table) == denormalize(0.5, delta.tasks[0], delta)


class TestSyntheticMatrix:
    """Test suite for matrices built from entries."""

    def test_from_entries_sorted(self):
        """Test that entries come out in (model, task) order."""
        models = [ModelKey("A"), ModelKey("B")]
        tasks = [TaskKey("X", 100.0, "OA")]
        delta = DeltaMatrix.from_entries(models, tasks, {(1, 0): 0.5, (0, 0): 0.25})

        assert delta.model_index.tolist() == [0, 1]
        assert delta.values.tolist() == [0.25, 0.5]

    def test_duplicate_entry_rejected(self):
        """Test that repeated pairs are refused."""
        with pytest.raises(ValueError):
            DeltaMatrix([ModelKey("A")], [TaskKey("X", 100.0, "OA")], [0, 0], [0, 0], [0.1, 0.2])

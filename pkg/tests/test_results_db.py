"""
Unit Tests for the Results Database

Tests record validation, ingestion, duplicate aggregation and degree
filtering.

Author: CapMap Project
License: MIT
"""

import json

import numpy as np
import pytest

from src.results_db import (
    ArchitectureFamily,
    IngestError,
    ModelKey,
    PerformanceRecord,
    ResultsDb,
    TaskKey,
    aggregate_max,
    export,
    filter_min_degree,
    ingest,
    task_family,
)
from tests.conftest import CORPUS_HEADER, write_corpus


def record(method, dataset, value, metric="OA", fraction=100.0, backbone=""):
    return PerformanceRecord(ModelKey(method, backbone), TaskKey(dataset, fraction, metric), value)


class TestRecords:
    """Test suite for keys and records."""

    def test_labels(self):
        """Test display labels."""
        assert ModelKey("SkySense", "Swin-H").label == "SkySense Swin-H"
        assert ModelKey("SeCo").label == "SeCo"
        assert TaskKey("Potsdam", 100.0, "mF1").label == "Potsdam@100%/mF1"
        assert TaskKey("AID", 20.0, "OA").label == "AID@20%/OA"
        assert TaskKey("AID", 12.5, "OA").label == "AID@12.5%/OA"

    def test_fraction_label_is_lossless(self):
        """Test that fractions differing past six digits keep distinct labels."""
        a = TaskKey("AID", 12.3456781, "OA")
        b = TaskKey("AID", 12.3456789, "OA")

        assert a.label != b.label
        assert float(a.label.split("@")[1].split("%")[0]) == a.fraction

    def test_fraction_range(self):
        """Test that the label fraction must lie in (0, 100]."""
        with pytest.raises(ValueError):
            TaskKey("AID", 0.0, "OA")
        with pytest.raises(ValueError):
            TaskKey("AID", 101.0, "OA")

    def test_bounded_metric_range(self):
        """Test that percentage metrics must lie in [0, 100]."""
        with pytest.raises(ValueError):
            record("m", "d", 100.5)
        with pytest.raises(ValueError):
            record("m", "d", -1.0, metric="mIoU")

    def test_psnr_positive(self):
        """Test that PSNR values must be positive."""
        with pytest.raises(ValueError):
            record("m", "d", 0.0, metric="PSNR")
        assert record("m", "d", 31.2, metric="PSNR").value == 31.2

    def test_non_finite_value(self):
        """Test that NaN and infinity are rejected."""
        with pytest.raises(ValueError):
            record("m", "d", float("nan"), metric="custom")

    def test_task_family(self):
        """Test metric to task family mapping."""
        assert task_family("OA") == "classification"
        assert task_family("mIoU") == "segmentation"
        assert task_family("mAP") == "detection"
        assert task_family("PSNR") == "super-resolution"
        assert task_family("Kappa") == "other"

    def test_low_label(self):
        """Test the low-label flag."""
        assert TaskKey("AID", 20.0, "OA").low_label
        assert not TaskKey("AID", 100.0, "OA").low_label

    def test_architecture_parse(self):
        """Test case-insensitive architecture family parsing."""
        assert ArchitectureFamily.parse("vit") == ArchitectureFamily.VIT
        with pytest.raises(ValueError):
            ArchitectureFamily.parse("mamba")


class TestIngest:
    """Test suite for corpus ingestion."""

    def test_table_norm(self, table_norm_csv):
        """Test the three-model reference table."""
        db = ingest(table_norm_csv)

        assert len(db) == 3
        assert db.summary().line() == "3 records, 3 models, 1 task"
        assert [m.label for m in db.models] == ["ResNet50 IN", "SkySense Swin-H", "RingMo Swin-B"]
        assert db.records[1].architecture_family == ArchitectureFamily.SWIN

    def test_missing_file(self, tmp_path):
        """Test that the error names the path."""
        path = tmp_path / "absent.csv"
        with pytest.raises(FileNotFoundError, match="absent.csv"):
            ingest(path)

    def test_fraction_out_of_range_names_row(self, tmp_path):
        """Test row-numbered validation errors."""
        path = write_corpus(tmp_path / "bad.csv", [
            ["A", "", "AID", 20, "OA", 90.0, "", "", ""],
            ["B", "", "AID", 20, "OA", 91.0, "", "", ""],
            ["C", "", "AID", 150, "OA", 92.0, "", "", ""],
        ])

        with pytest.raises(IngestError, match="fraction out of range, row 3") as info:
            ingest(path)
        assert info.value.row == 3
        assert info.value.field == "fraction"

    def test_missing_fraction_defaults_to_full(self, tmp_path):
        """Test that a blank fraction means 100%."""
        path = write_corpus(tmp_path / "c.csv", [["A", "", "AID", "", "OA", 90.0, "", "", ""]])
        assert ingest(path).records[0].task.fraction == 100.0

    def test_missing_column(self, tmp_path):
        """Test that a header without 'value' is rejected."""
        path = tmp_path / "c.csv"
        path.write_text("method,dataset,metric\nA,AID,OA\n", encoding="utf-8")
        with pytest.raises(IngestError, match="value"):
            ingest(path)

    def test_non_numeric_value(self, tmp_path):
        """Test that a non-numeric value names the field."""
        path = write_corpus(tmp_path / "c.csv", [["A", "", "AID", 100, "OA", "high", "", "", ""]])
        with pytest.raises(IngestError) as info:
            ingest(path)
        assert info.value.field == "value"
        assert info.value.row == 1

    def test_empty_corpus(self, tmp_path):
        """Test that a header-only file is rejected."""
        path = write_corpus(tmp_path / "c.csv", [])
        with pytest.raises(IngestError, match="empty"):
            ingest(path)

    def test_json_corpus(self, tmp_path):
        """Test JSON ingestion."""
        path = tmp_path / "c.json"
        path.write_text(json.dumps([
            {"method": "A", "dataset": "AID", "fraction": 20, "metric": "OA", "value": 90.5},
            {"method": "B", "backbone": "ViT-B", "dataset": "AID", "metric": "OA", "value": 91.0},
        ]), encoding="utf-8")

        db = ingest(path)

        assert db.records[0].task == TaskKey("AID", 20.0, "OA")
        assert db.records[1].model == ModelKey("B", "ViT-B")
        assert db.records[1].task.fraction == 100.0

    def test_export_reingest(self, tmp_path, table_norm_csv):
        """Test that the canonical export reads back to the same records."""
        db = ingest(table_norm_csv)
        out = export(db, tmp_path / "out.csv")

        assert ingest(out) == db
        assert out.read_text().splitlines()[0] == ",".join(CORPUS_HEADER)


class TestAggregation:
    """Test suite for aggregate_max."""

    def test_keeps_maximum(self):
        """Test that the highest duplicate wins."""
        db = ResultsDb([record("A", "AID", 90.0), record("A", "AID", 92.5), record("B", "AID", 80.0)])

        aggregated = aggregate_max(db)

        assert len(aggregated) == 2
        assert aggregated.records[0].value == 92.5
        assert aggregated.is_aggregated()

    def test_tie_keeps_first(self):
        """Test that ties keep the first-ingested record."""
        first = PerformanceRecord(ModelKey("A"), TaskKey("AID", 100.0, "OA"), 90.0, source="ref-1")
        second = PerformanceRecord(ModelKey("A"), TaskKey("AID", 100.0, "OA"), 90.0, source="ref-2")

        assert aggregate_max(ResultsDb([first, second])).records[0].source == "ref-1"

    def test_idempotent(self):
        """Test aggregate(aggregate(db)) == aggregate(db)."""
        db = ResultsDb([record("A", "AID", 90.0), record("A", "AID", 92.0), record("B", "UCM", 95.0)])
        once = aggregate_max(db)
        assert aggregate_max(once) == once

    def test_duplicate_counts(self):
        """Test duplicate reporting."""
        db = ResultsDb([record("A", "AID", 90.0), record("A", "AID", 92.0), record("B", "AID", 95.0)])
        assert list(db.duplicate_counts().values()) == [2]


def brute_force_filter(pairs, k_model, k_task):
    """Remove one violating entity at a time until nothing violates."""
    pairs = set(pairs)
    while True:
        models = {}
        tasks = {}
        for m, t in pairs:
            models[m] = models.get(m, 0) + 1
            tasks[t] = tasks.get(t, 0) + 1
        bad_models = [m for m, n in models.items() if n < k_model]
        bad_tasks = [t for t, n in tasks.items() if n < k_task]
        if bad_models:
            pairs = {(m, t) for m, t in pairs if m != bad_models[0]}
        elif bad_tasks:
            pairs = {(m, t) for m, t in pairs if t != bad_tasks[0]}
        else:
            return pairs


class TestFilter:
    """Test suite for filter_min_degree."""

    def test_cascade_to_empty(self, table_norm_csv):
        """Test that the reference table filters to nothing at degree 5."""
        db = aggregate_max(ingest(table_norm_csv))
        assert len(filter_min_degree(db, 5, 5)) == 0

    def test_requires_aggregation(self):
        """Test that duplicates must be resolved first."""
        db = ResultsDb([record("A", "AID", 90.0), record("A", "AID", 92.0)])
        with pytest.raises(ValueError):
            filter_min_degree(db, 1, 1)

    def test_zero_threshold_keeps_everything(self):
        """Test that thresholds of zero are a no-op."""
        db = ResultsDb([record("A", "AID", 90.0), record("B", "UCM", 95.0)])
        assert filter_min_degree(db, 0, 0) == db

    def test_preserves_order(self):
        """Test that surviving records keep corpus order."""
        db = ResultsDb([record(m, d, 50.0) for m in "ABC" for d in ("X", "Y", "Z")] + [record("D", "X", 10.0)])
        filtered = filter_min_degree(db, 2, 2)
        assert [r.model.method_name for r in filtered] == [m for m in "ABC" for _ in range(3)]

    def test_matches_brute_force(self):
        """Test agreement with an iterate-until-stable reference on random sparse corpora."""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            n_models = int(rng.integers(1, 31))
            n_tasks = int(rng.integers(1, 31))
            density = float(rng.uniform(0.05, 0.6))
            mask = rng.random((n_models, n_tasks)) < density
            records = [
                record(f"m{i}", f"t{j}", float(rng.uniform(0, 100)))
                for i in range(n_models) for j in range(n_tasks) if mask[i, j]
            ]
            k_model = int(rng.integers(1, 7))
            k_task = int(rng.integers(1, 7))

            filtered = filter_min_degree(ResultsDb(records), k_model, k_task)
            expected = brute_force_filter([(r.model, r.task) for r in records], k_model, k_task)

            assert {r.pair for r in filtered} == expected
            for n in filtered.model_degrees().values():
                assert n >= k_model
            for n in filtered.task_degrees().values():
                assert n >= k_task

    @pytest.mark.parametrize("k", [5, 6, 7])
    def test_bundled_corpus_matches_brute_force(self, sample_corpus_csv, k):
        """Test the bundled mini-corpus against the iterate-until-stable reference."""
        db = aggregate_max(ingest(sample_corpus_csv))

        filtered = filter_min_degree(db, k, k)

        assert {r.pair for r in filtered} == brute_force_filter([r.pair for r in db], k, k)

"""
Shared fixtures: planted configurations whose exact distances serve as
ground truth, and small corpora on disk.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
import pytest

from src.normalize.delta_matrix import DeltaMatrix
from src.results_db.records import ModelKey, TaskKey
from src.utils.file_ops import format_csv

DATA_DIR = Path(__file__).resolve().parents[1] / "data"
CORPUS_HEADER = ["method", "backbone", "dataset", "fraction", "metric", "value", "source", "arch_family", "param_count"]


@dataclass
class Planted:
    """Points in R^dim scaled so that every model-task distance lies in [0, 1]."""
    models: List[ModelKey]
    tasks: List[TaskKey]
    model_coords: np.ndarray
    task_coords: np.ndarray
    distances: np.ndarray

    def delta(self, mask: Optional[np.ndarray] = None) -> DeltaMatrix:
        """Δ matrix of the exact distances, restricted to `mask` when given."""
        entries = {
            (i, j): float(self.distances[i, j])
            for i in range(len(self.models))
            for j in range(len(self.tasks))
            if mask is None or mask[i, j]
        }
        return DeltaMatrix.from_entries(self.models, self.tasks, entries)


def make_planted(n_models: int = 8, n_tasks: int = 8, dim: int = 5, seed: int = 0) -> Planted:
    rng = np.random.default_rng(seed)
    models = rng.normal(size=(n_models, dim))
    tasks = rng.normal(size=(n_tasks, dim))
    d = np.linalg.norm(models[:, None, :] - tasks[None, :, :], axis=-1)
    scale = d.max()
    return Planted(
        models=[ModelKey(f"model-{i:02d}") for i in range(n_models)],
        tasks=[TaskKey(f"task-{j:02d}", 100.0, "OA") for j in range(n_tasks)],
        model_coords=models / scale,
        task_coords=tasks / scale,
        distances=d / scale,
    )


def corpus_rows_from_planted(planted: Planted, mask: Optional[np.ndarray] = None) -> List[list]:
    """Raw OA values 100 − 20·d, so that normalization recovers d up to a per-task scale."""
    rows = []
    for i, m in enumerate(planted.models):
        for j, t in enumerate(planted.tasks):
            if mask is None or mask[i, j]:
                rows.append([m.method_name, "", t.dataset, 100, "OA", round(100.0 - 20.0 * planted.distances[i, j], 6), "", "", ""])
    return rows


def write_corpus(path: Path, rows) -> Path:
    path.write_text(format_csv(CORPUS_HEADER, rows), encoding="utf-8")
    return path


@pytest.fixture
def planted() -> Planted:
    """8 models and 8 tasks in R^5."""
    return make_planted()


@pytest.fixture
def planted_large() -> Planted:
    """16 models and 16 tasks in R^5, enough constraints for holdout recovery."""
    return make_planted(16, 16, 5, seed=1)


@pytest.fixture
def table_norm_csv() -> Path:
    """Bundled three-model Potsdam table (read-only)."""
    return DATA_DIR / "table_norm.csv"


@pytest.fixture
def sample_corpus_csv() -> Path:
    """Bundled mini-corpus: 8 models, 9 tasks, degrees 5 to 8 (read-only)."""
    return DATA_DIR / "sample_corpus.csv"


@pytest.fixture
def planted_corpus_csv(tmp_path) -> Path:
    """Fully observed 8x8 planted corpus on disk."""
    return write_corpus(tmp_path / "planted.csv", corpus_rows_from_planted(make_planted()))

"""
Pipeline Stages

The stages behind each subcommand, from corpus ingestion to analysis
artifacts. Stages hand off through files: a canonical results CSV, an
embedding JSON with its Δ sidecar, and report directories.

Author: CapMap Project
License: MIT
"""

import csv
import difflib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..analysis.centrality import CentralityRow, centrality, centrality_csv
from ..analysis.projection import Projection2D, entity_classes, map_csv, project_2d
from ..analysis.quality import QualityRow, dataset_quality, quality_csv
from ..analysis.svg import render_scatter
from ..config.schema import AnalysisConfig, FitConfig, GeometryKind, ProjectionMethod, SplitPlan
from ..embedder.fitter import fit
from ..embedder.placement import Placement, place_entity
from ..embedder.space import EmbeddingSpace, EntityKind
from ..evaluator.degree import BUCKET_COLUMNS, DegreeErrorTable, error_by_degree
from ..evaluator.report import GeometryComparison
from ..evaluator.splits import compare_geometries
from ..evaluator.sweep import SweepRow, sweep_dimensions
from ..geometry.metric_spaces import Geometry
from ..normalize.delta_matrix import (
    DeltaMatrix,
    Denormalized,
    DegenerateTaskError,
    TaskStatistics,
    TaskStatsTable,
    denormalize,
    normalize,
)
from ..results_db.aggregation import aggregate_max, filter_min_degree
from ..results_db.database import CorpusSummary, ResultsDb
from ..results_db.io import export, ingest
from ..results_db.records import ModelKey, TaskKey
from ..utils.file_ops import (
    PathLike,
    dumps_json,
    ensure_directory,
    read_json,
    write_csv,
    write_json,
    write_text_atomic,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

TASK_LABEL = re.compile(r"^(?P<dataset>.+)@(?P<fraction>[0-9.eE+-]+)%/(?P<metric>.+)$")
PREDICTION_COLUMNS = ["name", "kind", "delta_hat", "raw_prediction", "extrapolated"]


class UnknownLabelError(ValueError):
    """A model or task label is not in the embedding."""


# -- file layout ------------------------------------------------------------

def sidecar_path(embedding_path: PathLike) -> Path:
    """Δ sidecar (per-task statistics) stored next to an embedding."""
    path = Path(embedding_path)
    return path.with_name(f"{path.stem}.delta.json")


def delta_csv_path(embedding_path: PathLike) -> Path:
    path = Path(embedding_path)
    return path.with_name(f"{path.stem}.delta.csv")


def predictions_path(embedding_path: PathLike) -> Path:
    path = Path(embedding_path)
    return path.with_name(f"{path.stem}.predictions.csv")


# -- ingest -----------------------------------------------------------------

@dataclass
class IngestOutcome:
    db: ResultsDb
    stages: List[Tuple[str, CorpusSummary]] = field(default_factory=list)


def run_ingest(
    input_path: PathLike,
    format: Optional[str] = None,
    aggregate: bool = False,
    min_model_degree: int = 0,
    min_task_degree: int = 0,
) -> IngestOutcome:
    """
    Ingest, then optionally aggregate duplicates and filter by degree.

    Filtering runs only when a threshold is positive. The corpus summary
    after every stage is kept for reporting.
    """
    db = ingest(input_path, format)
    outcome = IngestOutcome(db, [("ingested", db.summary())])

    if aggregate:
        db = aggregate_max(db)
        outcome.stages.append(("aggregated", db.summary()))

    if min_model_degree > 0 or min_task_degree > 0:
        db = filter_min_degree(db, min_model_degree, min_task_degree)
        outcome.stages.append(
            (f"filtered (min degree {min_model_degree}/{min_task_degree})", db.summary())
        )

    outcome.db = db
    return outcome


def load_corpus(path: PathLike) -> ResultsDb:
    """Read a results file, keeping the best value of any duplicated pair."""
    db = ingest(path)
    if not db.is_aggregated():
        logger.warning(f"{path} has duplicate (model, task) results; keeping the maximum of each")
        db = aggregate_max(db)
    return db


# -- embed ------------------------------------------------------------------

def run_embed(db: ResultsDb, geometry: Geometry, config: FitConfig) -> Tuple[EmbeddingSpace, DeltaMatrix]:
    delta = normalize(db)
    return fit(delta, geometry, config), delta


def write_embedding(space: EmbeddingSpace, stats: TaskStatsTable, out: PathLike, delta: Optional[DeltaMatrix] = None) -> Path:
    """Write the embedding, its Δ sidecar and (when given) the Δ matrix CSV."""
    out = Path(out)
    ensure_directory(out.parent)
    space.save(out)
    write_json(sidecar_path(out), stats.to_json())
    if delta is not None:
        write_text_atomic(delta_csv_path(out), delta.to_csv())
    return out


def load_task_stats(embedding_path: PathLike) -> TaskStatsTable:
    """
    Read the Δ sidecar of an embedding.

    Raises:
        FileNotFoundError: If the embedding was written without one
    """
    path = sidecar_path(embedding_path)
    if not path.exists():
        raise FileNotFoundError(f"Δ sidecar not found: {path}")
    return TaskStatsTable.from_json(read_json(path))


# -- lookup -----------------------------------------------------------------

def resolve_label(space: EmbeddingSpace, kind: EntityKind, name: str):
    """
    Key of the entity displayed as `name`.

    Raises:
        UnknownLabelError: With the closest known labels
    """
    key = space.find(kind, name)
    if key is not None:
        return key
    close = difflib.get_close_matches(name, space.labels(kind), n=3, cutoff=0.0)
    hint = f"; closest: {', '.join(close)}" if close else ""
    raise UnknownLabelError(f"unknown {EntityKind(kind).value} {name!r}{hint}")


def parse_task_label(label: str) -> TaskKey:
    """Inverse of TaskKey.label, e.g. 'Potsdam@100%/mF1'."""
    match = TASK_LABEL.match(label.strip())
    if not match:
        raise ValueError(f"task name must look like 'dataset@fraction%/metric': {label!r}")
    return TaskKey(match["dataset"], float(match["fraction"]), match["metric"])


# -- predict ----------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    model: ModelKey
    task: TaskKey
    delta_hat: float
    raw: Optional[Denormalized] = None


def run_predict(
    space: EmbeddingSpace,
    model_name: str,
    task_name: str,
    stats: Optional[TaskStatsTable] = None,
) -> Prediction:
    """
    Predicted Δ for a pair, and its raw metric value when `stats` is given.

    Raises:
        UnknownLabelError: If either label is unknown
        DegenerateTaskError: If a raw value is requested on a zero-spread task
    """
    model = resolve_label(space, EntityKind.MODEL, model_name)
    task = resolve_label(space, EntityKind.TASK, task_name)
    delta_hat = space.distance(model, task)
    raw = denormalize(delta_hat, task, stats) if stats is not None else None
    return Prediction(model, task, delta_hat, raw)


# -- place ------------------------------------------------------------------

@dataclass(frozen=True)
class KnownResult:
    """One row of a placement results file: a raw value or a Δ."""
    name: str
    value: Optional[float] = None
    delta: Optional[float] = None


@dataclass
class PlaceOutcome:
    placement: Placement
    space: EmbeddingSpace
    stats: TaskStatsTable
    predictions: List[List[object]]


def read_known_results(path: PathLike) -> List[KnownResult]:
    """
    Read a placement results CSV with a `name` column and a `value` (raw
    metric) or `delta` (normalized) column.

    Raises:
        FileNotFoundError: If the file is missing
        ValueError: On a malformed header or cell
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = [h.strip() for h in (reader.fieldnames or [])]
        if header and ("name" not in header or not ({"value", "delta"} & set(header))):
            raise ValueError(f"{path}: expected columns 'name' and 'value' or 'delta'")
        reader.fieldnames = header or None
        rows = []
        for number, row in enumerate(reader, start=1):
            name = (row.get("name") or "").strip()
            if not name:
                continue
            try:
                value = float(row["value"]) if (row.get("value") or "").strip() else None
                delta = float(row["delta"]) if (row.get("delta") or "").strip() else None
            except ValueError:
                raise ValueError(f"{path}: invalid number, row {number}")
            if value is None and delta is None:
                raise ValueError(f"{path}: row {number} has neither value nor delta")
            rows.append(KnownResult(name, value, delta))
    return rows


def _normalize_against(stats: TaskStatistics, value: float) -> float:
    if stats.degenerate:
        raise DegenerateTaskError(f"cannot normalize against zero-spread task {stats.task.label}")
    return (stats.best_value - value) / stats.max_delta


def _new_task_stats(task: TaskKey, values: Sequence[float]) -> Tuple[TaskStatistics, np.ndarray]:
    values = np.asarray(values, dtype=np.float64)
    best = float(values.max())
    gaps = best - values
    max_delta = float(gaps.max())
    degenerate = max_delta == 0.0
    deltas = np.zeros_like(gaps) if degenerate else gaps / max_delta
    return TaskStatistics(task, best, max_delta, len(values), degenerate), deltas


def _raw_prediction(delta_hat: float, task: TaskKey, stats: TaskStatsTable) -> Tuple[Optional[float], Optional[bool]]:
    if task not in stats or stats.get(task).degenerate:
        return None, None
    raw = denormalize(delta_hat, task, stats)
    return raw.value, raw.extrapolated


def run_place(
    space: EmbeddingSpace,
    stats: TaskStatsTable,
    kind: EntityKind,
    name: str,
    results: Sequence[KnownResult],
    config: FitConfig,
) -> PlaceOutcome:
    """
    Place a new model or task from its known results.

    Raw values for a new model are normalized with the stored statistics of
    each task; raw values for a new task are normalized among themselves
    and become that task's statistics. Predictions cover every entity of
    the opposite kind that is not among the known results.

    Raises:
        UnknownLabelError: If a referenced label is not in the embedding
        PlacementError: If `results` is empty
    """
    kind = EntityKind(kind)
    key = ModelKey(name) if kind == EntityKind.MODEL else parse_task_label(name)
    # compare display labels too: "SkySense Swin-H" is ModelKey("SkySense", "Swin-H")
    if space.has(kind, key) or space.find(kind, key.label) is not None:
        raise ValueError(f"{kind.value} {name!r} is already in the embedding")

    anchors = [resolve_label(space, kind.opposite, r.name) for r in results]
    if len(set(anchors)) != len(anchors):
        raise ValueError("results file lists the same entity twice")

    if kind == EntityKind.MODEL:
        known = {
            a: r.delta if r.delta is not None else _normalize_against(stats.get(a), r.value)
            for a, r in zip(anchors, results)
        }
    else:
        known = {a: r.delta for a, r in zip(anchors, results) if r.delta is not None}
        raw = [(a, r.value) for a, r in zip(anchors, results) if r.delta is None]
        if raw:
            task_stats, deltas = _new_task_stats(key, [v for _, v in raw])
            stats = stats.with_task(task_stats)
            known.update({a: float(d) for (a, _), d in zip(raw, deltas)})
        known = {a: known[a] for a in anchors}

    placement = place_entity(space, kind, key, known, config)
    placed = space.with_point(kind, key, placement.point)

    predictions: List[List[object]] = []
    for other in placed.keys(kind.opposite):
        if other in known:
            continue
        model, task = (key, other) if kind == EntityKind.MODEL else (other, key)
        delta_hat = placed.distance(model, task)
        raw_value, extrapolated = _raw_prediction(delta_hat, task, stats)
        predictions.append([other.label, kind.opposite.value, delta_hat, raw_value, extrapolated])

    return PlaceOutcome(placement, placed, stats, predictions)


def write_predictions(path: PathLike, predictions: Sequence[Sequence[object]]) -> Path:
    return write_csv(path, PREDICTION_COLUMNS, predictions)


# -- eval -------------------------------------------------------------------

@dataclass
class EvalOutcome:
    comparison: GeometryComparison
    degree_tables: Dict[GeometryKind, DegreeErrorTable]
    sweep: List[Tuple[GeometryKind, SweepRow]] = field(default_factory=list)


def parse_geometries(text: str) -> Tuple[GeometryKind, ...]:
    """'all' or a comma-separated list of geometry names."""
    if text.strip().lower() == "all":
        return tuple(GeometryKind)
    kinds = []
    for part in text.split(","):
        part = part.strip().lower()
        if part:
            kinds.append(GeometryKind(part))
    if not kinds:
        raise ValueError("no geometry selected")
    return tuple(dict.fromkeys(kinds))


def run_eval(
    delta: DeltaMatrix,
    kinds: Sequence[GeometryKind],
    plan: SplitPlan,
    config: FitConfig,
    dim: int,
    ball_epsilon: float,
    bucket_edges: Sequence[int],
    dims: Sequence[int] = (),
) -> EvalOutcome:
    comparison = compare_geometries(delta, plan, config, kinds, dim, ball_epsilon)
    tables = {kind: error_by_degree(report, bucket_edges) for kind, report in comparison.reports.items()}
    outcome = EvalOutcome(comparison, tables)
    for kind in kinds if dims else ():
        for row in sweep_dimensions(delta, kind, dims, plan, config, ball_epsilon):
            outcome.sweep.append((GeometryKind(kind), row))
    return outcome


def write_eval_outputs(out_dir: PathLike, outcome: EvalOutcome) -> List[Path]:
    out_dir = Path(out_dir)
    ensure_directory(out_dir)
    written = []
    reports = outcome.comparison.reports

    for kind, report in reports.items():
        written.append(write_text_atomic(out_dir / f"report_{kind.value}.csv", report.rows_csv()))

    aggregates = {kind.value: report.aggregates() for kind, report in reports.items()}
    written.append(write_text_atomic(out_dir / "aggregates.json", dumps_json(aggregates)))
    written.append(write_text_atomic(out_dir / "comparison.csv", outcome.comparison.table_csv()))
    written.append(write_text_atomic(out_dir / "scatter.csv", outcome.comparison.scatter_csv()))
    written.append(write_csv(
        out_dir / "error_by_degree.csv",
        ["geometry"] + BUCKET_COLUMNS,
        ([kind.value] + row for kind, table in outcome.degree_tables.items() for row in table.rows()),
    ))
    if outcome.sweep:
        written.append(write_csv(
            out_dir / "dimension_sweep.csv",
            ["geometry", "dim", "rmse", "mae", "pearson_r", "train_rmse"],
            ([k.value, r.dim, r.rmse, r.mae, r.pearson_r, r.train_rmse] for k, r in outcome.sweep),
        ))
    return written


# -- analyze ----------------------------------------------------------------

@dataclass
class AnalyzeOutcome:
    quality: List[QualityRow]
    centrality: List[CentralityRow]
    projection: Projection2D
    classes: List[str]
    svg: str


def run_analyze(
    db: ResultsDb,
    space: EmbeddingSpace,
    analysis: AnalysisConfig,
    config: FitConfig,
    method: Optional[ProjectionMethod] = None,
) -> AnalyzeOutcome:
    quality = dataset_quality(db, analysis)
    ranks = centrality(space)
    projection = project_2d(space, method or analysis.projection, config)
    classes = entity_classes(space, db)
    svg = render_scatter(projection.coords, projection.labels, classes, projection.kinds)
    return AnalyzeOutcome(quality, ranks, projection, classes, svg)


def write_analyze_outputs(out_dir: PathLike, outcome: AnalyzeOutcome) -> List[Path]:
    out_dir = Path(out_dir)
    ensure_directory(out_dir)
    return [
        write_text_atomic(out_dir / "quality.csv", quality_csv(outcome.quality)),
        write_text_atomic(out_dir / "centrality.csv", centrality_csv(outcome.centrality)),
        write_text_atomic(out_dir / "map.csv", map_csv(outcome.projection, outcome.classes)),
        write_text_atomic(out_dir / "map.svg", outcome.svg),
    ]


def export_corpus(db: ResultsDb, out: Union[str, Path]) -> Path:
    out = Path(out)
    ensure_directory(out.parent)
    return export(db, out)

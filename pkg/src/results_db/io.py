"""
Results Database I/O

Reads and writes the results corpus as CSV or JSON. Both formats share the
same field names; export mirrors import so a corpus round-trips exactly.

Author: CapMap Project
License: MIT
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from .database import ResultsDb
from .records import ArchitectureFamily, ModelKey, PerformanceRecord, TaskKey
from ..utils.file_ops import dumps_json, format_csv, write_text_atomic
from ..utils.logger import get_logger

logger = get_logger(__name__)

COLUMNS = ["method", "backbone", "dataset", "fraction", "metric", "value", "source", "arch_family", "param_count"]
REQUIRED_COLUMNS = ["method", "dataset", "metric", "value"]
FORMATS = ("csv", "json")


class IngestError(ValueError):
    """A corpus row failed validation."""

    def __init__(self, message: str, row: Optional[int] = None, field: Optional[str] = None):
        self.row = row
        self.field = field
        text = message
        if row is not None:
            text += f", row {row}"
        if field is not None:
            text += f" (field '{field}')"
        super().__init__(text)


def ingest(path: Union[str, Path], format: Optional[str] = None) -> ResultsDb:
    """
    Read a results corpus.

    Args:
        path: CSV or JSON file
        format: "csv" or "json"; inferred from the suffix when None

    Returns:
        ResultsDb with one record per input row, duplicates included

    Raises:
        FileNotFoundError: If the file does not exist
        IngestError: On malformed rows or an empty corpus
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt not in FORMATS:
        raise IngestError(f"unsupported format {fmt!r} (expected csv or json)")

    rows = _read_csv_rows(path) if fmt == "csv" else _read_json_rows(path)
    if not rows:
        raise IngestError(f"empty corpus: {path}")

    records = [parse_row(row, row_number) for row_number, row in enumerate(rows, start=1)]
    db = ResultsDb(records)
    logger.info(f"Ingested {path}: {db.summary().line()}")
    return db


def _read_csv_rows(path: Path) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            return []
        header = [name.strip() for name in reader.fieldnames]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise IngestError(f"missing column '{missing[0]}' in header", row=0, field=missing[0])
        reader.fieldnames = header
        return [row for row in reader if any((v or "").strip() for v in row.values() if isinstance(v, str))]


def _read_json_rows(path: Path) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise IngestError(f"invalid JSON: {e}")
    if not isinstance(data, list):
        raise IngestError("JSON corpus must be an array of objects")
    for index, item in enumerate(data, start=1):
        if not isinstance(item, dict):
            raise IngestError("expected an object", row=index)
    return data


def _text(row: Mapping[str, Any], field: str) -> str:
    value = row.get(field)
    if value is None:
        return ""
    return str(value).strip()


def parse_row(row: Mapping[str, Any], row_number: int) -> PerformanceRecord:
    """
    Validate one raw row into a PerformanceRecord.

    Raises:
        IngestError: naming the row number and the offending field
    """
    for field in REQUIRED_COLUMNS:
        if field not in row or row.get(field) is None:
            raise IngestError("missing column", row=row_number, field=field)

    method = _text(row, "method")
    if not method:
        raise IngestError("method must not be empty", row=row_number, field="method")
    dataset = _text(row, "dataset")
    if not dataset:
        raise IngestError("dataset must not be empty", row=row_number, field="dataset")
    metric = _text(row, "metric")
    if not metric:
        raise IngestError("metric must not be empty", row=row_number, field="metric")

    fraction_text = _text(row, "fraction")
    if fraction_text:
        fraction = _parse_float(fraction_text, row_number, "fraction")
        if not (0.0 < fraction <= 100.0):
            raise IngestError("fraction out of range", row=row_number, field="fraction")
    else:
        fraction = 100.0

    value = _parse_float(_text(row, "value"), row_number, "value")

    arch_text = _text(row, "arch_family")
    arch = None
    if arch_text:
        try:
            arch = ArchitectureFamily.parse(arch_text)
        except ValueError:
            raise IngestError(f"unknown architecture family {arch_text!r}", row=row_number, field="arch_family")

    params_text = _text(row, "param_count")
    param_count = None
    if params_text:
        try:
            param_count = int(params_text)
        except ValueError:
            raise IngestError(f"non-integer param_count {params_text!r}", row=row_number, field="param_count")
        if param_count <= 0:
            raise IngestError("param_count must be positive", row=row_number, field="param_count")

    try:
        return PerformanceRecord(
            model=ModelKey(method, _text(row, "backbone")),
            task=TaskKey(dataset, fraction, metric),
            value=value,
            source=_text(row, "source"),
            architecture_family=arch,
            param_count=param_count,
            row=row_number,
        )
    except ValueError as e:
        raise IngestError(str(e), row=row_number, field="value")


def _parse_float(text: str, row_number: int, field: str) -> float:
    if not text:
        raise IngestError("missing value", row=row_number, field=field)
    try:
        value = float(text)
    except ValueError:
        raise IngestError(f"non-numeric value {text!r}", row=row_number, field=field)
    if not math.isfinite(value):
        raise IngestError(f"non-finite value {text!r}", row=row_number, field=field)
    return value


def record_to_row(record: PerformanceRecord) -> Dict[str, Any]:
    """Flatten a record into the shared CSV/JSON field layout."""
    return {
        "method": record.model.method_name,
        "backbone": record.model.backbone,
        "dataset": record.task.dataset,
        "fraction": float(record.task.fraction),
        "metric": record.task.metric,
        "value": float(record.value),
        "source": record.source,
        "arch_family": record.architecture_family.value if record.architecture_family else None,
        "param_count": record.param_count,
    }


def export(db: ResultsDb, path: Union[str, Path], format: Optional[str] = None) -> Path:
    """
    Write a corpus in canonical form.

    Values are printed at full precision so that ingest(export(db)) yields
    the same records.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    if fmt not in FORMATS:
        raise ValueError(f"unsupported format {fmt!r} (expected csv or json)")

    rows = [record_to_row(r) for r in db]
    if fmt == "csv":
        content = format_csv(COLUMNS, ([row[c] for c in COLUMNS] for row in rows))
    else:
        content = dumps_json(rows)

    write_text_atomic(path, content)
    logger.info(f"Exported {db.summary().line()} to {path}")
    return path

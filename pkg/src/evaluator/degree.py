"""
Error by training degree: how prediction error depends on the number of
training results of the held-out model.

Author: CapMap Project
License: MIT
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .report import EvalReport
from ..utils.file_ops import format_csv

DEFAULT_EDGES = (1, 5, 10, 20)
BUCKET_COLUMNS = ["bucket", "low", "high", "count", "mean_abs_error", "error_std"]


@dataclass(frozen=True)
class DegreeBucket:
    low: int
    high: Optional[int]  # inclusive; None = open-ended
    count: int
    mean_abs_error: Optional[float]
    error_std: Optional[float]

    @property
    def label(self) -> str:
        return f"{self.low}+" if self.high is None else f"{self.low}-{self.high}"


@dataclass(frozen=True)
class DegreeErrorTable:
    buckets: List[DegreeBucket]
    pairs: List[Tuple[int, float]]

    def rows(self) -> List[List[object]]:
        return [[b.label, b.low, b.high, b.count, b.mean_abs_error, b.error_std] for b in self.buckets]

    def to_csv(self) -> str:
        return format_csv(BUCKET_COLUMNS, self.rows())

    def pairs_csv(self) -> str:
        return format_csv(["degree", "error"], self.pairs)


def error_by_degree(report: EvalReport, edges: Sequence[int] = DEFAULT_EDGES) -> DegreeErrorTable:
    """
    Bucket holdout errors by the held-out model's training degree.

    With the default edges the buckets are 1–4, 5–9, 10–19 and 20+. Each
    bucket reports its count, mean absolute error and the (population)
    standard deviation of the signed errors; empty buckets are kept with
    count 0 and no statistics. Degrees below the first edge fall into the
    first bucket.

    Raises:
        ValueError: If the report has no rows
    """
    if not report.rows:
        raise ValueError("error_by_degree needs a non-empty report")

    degrees = np.array([r.degree for r in report.rows], dtype=np.int64)
    errors = np.array([r.error for r in report.rows], dtype=np.float64)
    bucket_of = np.clip(np.searchsorted(np.asarray(edges), degrees, side="right") - 1, 0, len(edges) - 1)

    buckets: List[DegreeBucket] = []
    for b, low in enumerate(edges):
        high = edges[b + 1] - 1 if b + 1 < len(edges) else None
        e = errors[bucket_of == b]
        if len(e):
            buckets.append(DegreeBucket(low, high, len(e), float(np.mean(np.abs(e))), float(np.std(e))))
        else:
            buckets.append(DegreeBucket(low, high, 0, None, None))

    pairs = [(int(d), float(e)) for d, e in zip(degrees, errors)]
    return DegreeErrorTable(buckets, pairs)

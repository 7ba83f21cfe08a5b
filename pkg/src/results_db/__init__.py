"""
Results Database Module

Ingestion, validation, duplicate aggregation and degree filtering of the
literature fine-tuning results that feed the embedding.

Author: CapMap Project
License: MIT
"""

from .records import (
    ArchitectureFamily,
    ModelKey,
    TaskKey,
    PerformanceRecord,
    is_bounded_metric,
    task_family,
)
from .database import ResultsDb, CorpusSummary
from .aggregation import aggregate_max, filter_min_degree
from .io import ingest, export, parse_row, IngestError, COLUMNS

__all__ = [
    'ArchitectureFamily', 'ModelKey', 'TaskKey', 'PerformanceRecord', 'is_bounded_metric',
    'task_family', 'ResultsDb', 'CorpusSummary', 'aggregate_max', 'filter_min_degree',
    'ingest', 'export', 'parse_row', 'IngestError', 'COLUMNS',
]

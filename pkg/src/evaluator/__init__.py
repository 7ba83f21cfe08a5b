"""
Evaluator Module

Split-based validation of embeddings, geometry comparison, dimension sweeps
and error-versus-degree analysis.

Author: CapMap Project
License: MIT
"""

from .report import EvalReport, GeometryComparison, PredictionRow, SkipRecord, rmse, mae, pearson
from .splits import (
    HoldoutPlan,
    InsufficientDataError,
    plan_holdouts,
    run_splits,
    compare_geometries,
)
from .degree import DegreeBucket, DegreeErrorTable, error_by_degree
from .sweep import SweepRow, sweep_dimensions, sweep_csv

__all__ = [
    'EvalReport', 'GeometryComparison', 'PredictionRow', 'SkipRecord', 'rmse', 'mae', 'pearson',
    'HoldoutPlan', 'InsufficientDataError', 'plan_holdouts', 'run_splits', 'compare_geometries',
    'DegreeBucket', 'DegreeErrorTable', 'error_by_degree', 'SweepRow', 'sweep_dimensions', 'sweep_csv',
]

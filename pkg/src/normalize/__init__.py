"""
Normalization Module

Conversion of raw literature results into normalized gap targets.

Author: CapMap Project
License: MIT
"""

from .delta_matrix import (
    DeltaMatrix,
    TaskStatistics,
    TaskStatsTable,
    Denormalized,
    DegenerateTaskError,
    normalize,
    denormalize,
)

__all__ = [
    'DeltaMatrix', 'TaskStatistics', 'TaskStatsTable', 'Denormalized',
    'DegenerateTaskError', 'normalize', 'denormalize',
]

"""
Analysis Module

Corpus diagnostics (dataset quality and saturation), model centrality and
deterministic 2D map export.

Author: CapMap Project
License: MIT
"""

from .quality import QualityRow, dataset_quality, is_saturated, quality_csv
from .centrality import CentralityRow, centrality, centrality_csv
from .projection import Projection2D, project_2d, pca_coordinates, entity_classes, map_csv
from .svg import render_scatter

__all__ = [
    'QualityRow', 'dataset_quality', 'is_saturated', 'quality_csv',
    'CentralityRow', 'centrality', 'centrality_csv',
    'Projection2D', 'project_2d', 'pca_coordinates', 'entity_classes', 'map_csv',
    'render_scatter',
]

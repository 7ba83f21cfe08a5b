"""
Geometry Module

Pluggable latent geometries: distances, gradients and domain projection.

Author: CapMap Project
License: MIT
"""

from .metric_spaces import (
    Geometry,
    GradientPair,
    DomainError,
    check_domain,
    distance,
    distance_gradient,
    project_to_domain,
    project_rows,
    batch_distance,
    batch_distance_gradient,
    pairwise_distances,
)
from ..config.schema import GeometryKind

__all__ = [
    'Geometry', 'GeometryKind', 'GradientPair', 'DomainError', 'check_domain', 'distance',
    'distance_gradient', 'project_to_domain', 'project_rows', 'batch_distance',
    'batch_distance_gradient', 'pairwise_distances',
]

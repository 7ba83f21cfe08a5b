"""
Embedder Module

Fitting of model and task points to normalized gaps, and out-of-sample
placement of new entities.

Author: CapMap Project
License: MIT
"""

from .space import EmbeddingSpace, EntityKind, FitReport, MissingPointError
from .optimizers import Adam, GradientDescent, build_optimizer
from .fitter import fit, loss, stress, optimize_points, OptimizationResult, NonFiniteLossError
from .placement import place_entity, Placement, PlacementError

__all__ = [
    'EmbeddingSpace', 'EntityKind', 'FitReport', 'MissingPointError', 'Adam', 'GradientDescent',
    'build_optimizer', 'fit', 'loss', 'stress', 'optimize_points', 'OptimizationResult',
    'NonFiniteLossError', 'place_entity', 'Placement', 'PlacementError',
]

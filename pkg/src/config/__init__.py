"""
CapMap Configuration Module

Handles configuration loading, validation and environment overrides for the
pipeline. Supports YAML-based configuration with environment variable
overrides.

Author: CapMap Project
License: MIT
"""

from .schema import (
    Config,
    AppConfig,
    FilterConfig,
    GeometryConfig,
    FitConfig,
    SplitPlan,
    AnalysisConfig,
    GeometryKind,
    OptimizerKind,
    ProjectionMethod,
    LogLevel,
)
from .config_loader import ConfigLoader, load_config

__all__ = [
    'Config', 'AppConfig', 'FilterConfig', 'GeometryConfig', 'FitConfig', 'SplitPlan',
    'AnalysisConfig', 'GeometryKind', 'OptimizerKind', 'ProjectionMethod', 'LogLevel',
    'ConfigLoader', 'load_config',
]

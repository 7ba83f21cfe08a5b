"""
Configuration Schema and Models

Defines Pydantic models for every tunable of the pipeline: logging, corpus
filtering, embedding geometry, optimizer settings, evaluation split plans and
analysis thresholds. Defaults reproduce the reference protocol (5-dimensional
Euclidean space, degree-5 filtering, 10 splits of 10 held-out entries).

Author: CapMap Project
License: MIT
"""

from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator


class LogLevel(str, Enum):
    """Logging level options."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class GeometryKind(str, Enum):
    """Candidate embedding geometries."""
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"
    POINCARE = "poincare"


class OptimizerKind(str, Enum):
    """First-order optimizers available to the embedder."""
    GRADIENT_DESCENT = "gradient_descent"
    ADAM = "adam"


class ProjectionMethod(str, Enum):
    """2D projection methods for map export."""
    STRESS2D = "stress2d"
    PCA = "pca"


class AppConfig(BaseModel):
    """Process-level settings."""

    model_config = ConfigDict(validate_assignment=True)

    log_level: LogLevel = Field(
        default=LogLevel.INFO,
        description="Application logging level"
    )
    log_to_file: bool = Field(
        default=False,
        description="Enable logging to file in addition to stderr"
    )
    log_file_path: str = Field(
        default="logs/capmap.log",
        description="Log file path when file logging is enabled"
    )
    log_rotation_size: int = Field(
        default=10485760,  # 10MB
        description="Log file size before rotation (bytes)"
    )
    log_retention_count: int = Field(
        default=5,
        description="Number of rotated log files to keep"
    )
    json_logs: bool = Field(
        default=False,
        description="Emit logs as JSON objects"
    )


class FilterConfig(BaseModel):
    """Minimum-degree filtering of the results database."""

    min_model_degree: int = Field(
        default=5, ge=0,
        description="Drop models with fewer results than this"
    )
    min_task_degree: int = Field(
        default=5, ge=0,
        description="Drop tasks tested by fewer models than this"
    )


class GeometryConfig(BaseModel):
    """Embedding geometry settings."""

    kind: GeometryKind = Field(
        default=GeometryKind.EUCLIDEAN,
        description="Distance used in the latent space"
    )
    dim: int = Field(
        default=5, ge=1,
        description="Dimension of the latent space"
    )
    ball_epsilon: float = Field(
        default=1e-5, gt=0.0, lt=0.1,
        description="Margin kept from the Poincaré ball boundary"
    )


class FitConfig(BaseModel):
    """Optimizer settings for fitting and placing points."""

    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(
        default=5000, ge=1,
        description="Hard cap on optimizer iterations"
    )
    learning_rate: float = Field(
        default=0.01, gt=0.0,
        description="Optimizer step size"
    )
    optimizer: OptimizerKind = Field(
        default=OptimizerKind.ADAM,
        description="First-order optimizer"
    )
    beta1: float = Field(default=0.9, gt=0.0, lt=1.0, description="Adam first-moment decay")
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0, description="Adam second-moment decay")
    adam_epsilon: float = Field(default=1e-8, gt=0.0, description="Adam denominator guard")
    convergence_tolerance: float = Field(
        default=1e-7, gt=0.0,
        description="Stop when the relative loss change over the window falls below this"
    )
    convergence_window: int = Field(
        default=50, ge=1,
        description="Iterations between loss values compared for convergence"
    )
    init_scale: float = Field(
        default=0.1, gt=0.0,
        description="Initial coordinates are uniform in [-init_scale, init_scale]"
    )
    seed: int = Field(default=42, description="Random seed")
    place_restarts: int = Field(
        default=8, ge=1,
        description="Random restarts when placing a single new entity"
    )
    log_interval: int = Field(
        default=500, ge=1,
        description="Iterations between DEBUG progress lines"
    )


class SplitPlan(BaseModel):
    """Repeated random holdout protocol."""

    model_config = ConfigDict(frozen=True)

    n_splits: int = Field(default=10, ge=1, description="Number of independent splits")
    holdout_size: int = Field(default=10, ge=1, description="Held-out entries per split")
    seed: int = Field(default=42, description="Seed for holdout sampling")
    workers: int = Field(default=1, ge=1, description="Splits fitted concurrently")


class AnalysisConfig(BaseModel):
    """Corpus diagnostics thresholds and map settings."""

    saturation_mean: float = Field(
        default=95.0,
        description="Mean at or above which a bounded task may be saturated"
    )
    saturation_sigma: float = Field(
        default=1.5, ge=0.0,
        description="Spread at or below which a bounded task may be saturated"
    )
    degree_bucket_edges: List[int] = Field(
        default=[1, 5, 10, 20],
        description="Lower edges of training-degree buckets for error analysis"
    )
    projection: ProjectionMethod = Field(
        default=ProjectionMethod.STRESS2D,
        description="2D projection method for map export"
    )

    @field_validator("degree_bucket_edges")
    @classmethod
    def validate_edges(cls, v):
        """Edges must be positive and strictly increasing."""
        if not v:
            raise ValueError("degree_bucket_edges must not be empty")
        if v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"degree_bucket_edges must be positive and strictly increasing: {v}")
        return v


class Config(BaseModel):
    """
    Root configuration model for CapMap.

    Loaded from an optional YAML file, overridden by environment variables
    and finally by command-line flags.
    """

    app: AppConfig = Field(default_factory=AppConfig)
    filtering: FilterConfig = Field(default_factory=FilterConfig)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    fit: FitConfig = Field(default_factory=FitConfig)
    evaluation: SplitPlan = Field(default_factory=SplitPlan)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)

    model_config = ConfigDict(validate_assignment=True, extra="forbid")

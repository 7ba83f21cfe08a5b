"""
Result Records

Identity types for models and tasks, and the literature performance record
that ties them together.

Author: CapMap Project
License: MIT
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

# Percentage metrics bounded by [0, 100]. Everything else is only required to
# be finite (PSNR additionally positive).
BOUNDED_METRICS = frozenset({"OA", "AA", "mF1", "F1", "mIoU", "IoU", "mAP", "AP50"})
POSITIVE_METRICS = frozenset({"PSNR"})

TASK_FAMILIES = {
    "OA": "classification",
    "AA": "classification",
    "mIoU": "segmentation",
    "IoU": "segmentation",
    "mF1": "segmentation",
    "F1": "change detection",
    "mAP": "detection",
    "AP50": "detection",
    "PSNR": "super-resolution",
}


class ArchitectureFamily(str, Enum):
    """Backbone architecture families."""
    CNN = "CNN"
    VIT = "ViT"
    SWIN = "Swin"
    OTHER = "other"

    @classmethod
    def parse(cls, value: str) -> "ArchitectureFamily":
        """Case-insensitive lookup by value."""
        lowered = value.strip().lower()
        for member in cls:
            if member.value.lower() == lowered:
                return member
        raise ValueError(f"unknown architecture family: {value!r}")


def is_bounded_metric(metric: str) -> bool:
    """True for percentage metrics capped at 100."""
    return metric in BOUNDED_METRICS


def task_family(metric: str) -> str:
    """Coarse task family implied by a metric name."""
    return TASK_FAMILIES.get(metric, "other")


def fraction_text(fraction: float) -> str:
    """Shortest text that reads back as the same float: 100.0 -> '100', 12.5 -> '12.5'."""
    text = repr(float(fraction))
    return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True, order=True)
class ModelKey:
    """A model variant: pretraining method plus backbone."""
    method_name: str
    backbone: str = ""

    def __post_init__(self):
        if not self.method_name:
            raise ValueError("method_name must not be empty")

    @property
    def label(self) -> str:
        """Display label, e.g. 'SkySense Swin-H'."""
        return f"{self.method_name} {self.backbone}".strip()


@dataclass(frozen=True, order=True)
class TaskKey:
    """A downstream task: the (dataset, label fraction, metric) triplet."""
    dataset: str
    fraction: float = 100.0
    metric: str = ""

    def __post_init__(self):
        if not self.dataset:
            raise ValueError("dataset must not be empty")
        if not self.metric:
            raise ValueError("metric must not be empty")
        if not (0.0 < self.fraction <= 100.0) or math.isnan(self.fraction):
            raise ValueError(f"fraction out of range (0, 100]: {self.fraction}")

    @property
    def label(self) -> str:
        """Display label, e.g. 'Potsdam@100%/mF1'."""
        return f"{self.dataset}@{fraction_text(self.fraction)}%/{self.metric}"

    @property
    def family(self) -> str:
        return task_family(self.metric)

    @property
    def low_label(self) -> bool:
        """True when fine-tuning used only part of the training labels."""
        return self.fraction < 100.0


@dataclass(frozen=True)
class PerformanceRecord:
    """
    One literature result p_{m,t}: higher is better, in the task's metric units.

    `row` is the 1-based data row the record was read from, when known; it
    takes no part in equality.
    """
    model: ModelKey
    task: TaskKey
    value: float
    source: str = ""
    architecture_family: Optional[ArchitectureFamily] = None
    param_count: Optional[int] = None
    row: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"value must be finite: {self.value}")
        metric = self.task.metric
        if is_bounded_metric(metric) and not (0.0 <= self.value <= 100.0):
            raise ValueError(f"{metric} value out of range [0, 100]: {self.value}")
        if metric in POSITIVE_METRICS and self.value <= 0.0:
            raise ValueError(f"{metric} value must be positive: {self.value}")
        if self.param_count is not None and self.param_count <= 0:
            raise ValueError(f"param_count must be positive: {self.param_count}")

    @property
    def pair(self):
        return (self.model, self.task)

"""Toolkit for quantifying how far simulated robot-manipulation recordings
deviate from real ones, plus a kinematic simulator for synthetic bundles."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .distributions import GaussianFit, fit_multivariate_normal, mahalanobis
from .metrics import (
    MetricSet,
    PoseMetricConfig,
    StaticnessConfig,
    compute_metric_set,
    evaluate_task,
)
from .report import SubgroupReport, SubmissionInfo, aggregate_subgroup, render_table
from .trajectory import (
    Metadata,
    PoseSample,
    PoseSeries,
    RepeatSet,
    TaskRecording,
    align_pair,
    derive_acceleration,
    derive_velocity,
    mean_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "GaussianFit",
    "fit_multivariate_normal",
    "mahalanobis",
    "MetricSet",
    "PoseMetricConfig",
    "StaticnessConfig",
    "compute_metric_set",
    "evaluate_task",
    "SubgroupReport",
    "SubmissionInfo",
    "aggregate_subgroup",
    "render_table",
    "Metadata",
    "PoseSample",
    "PoseSeries",
    "RepeatSet",
    "TaskRecording",
    "align_pair",
    "derive_acceleration",
    "derive_velocity",
    "mean_trajectory",
    "__version__",
]

"""Scoring, repeatability, characterization, and scaling analysis for HPC AI
benchmark runs."""

__version__ = "0.1.0"

from .core import (
    AIBENCH_WORKLOADS,
    BenchmarkSpec,
    DomainError,
    PrecisionMode,
    ProfileVector,
    QualityMetric,
    REGISTRY,
    RunRecord,
    ScoreReport,
    UnknownBenchmarkError,
    registry_lookup,
    validate_run,
)
from .scoring import penalty_coefficient, score_run, time_to_quality, vflops

__all__ = [
    "AIBENCH_WORKLOADS",
    "BenchmarkSpec",
    "DomainError",
    "PrecisionMode",
    "ProfileVector",
    "QualityMetric",
    "REGISTRY",
    "RunRecord",
    "ScoreReport",
    "UnknownBenchmarkError",
    "penalty_coefficient",
    "registry_lookup",
    "score_run",
    "time_to_quality",
    "validate_run",
    "vflops",
    "__version__",
]

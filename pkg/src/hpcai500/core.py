"""Domain types shared by all modules and the built-in benchmark registry.

All types are immutable value objects; they can be shared freely between
concurrent tasks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional


class DomainError(ValueError):
    """A domain rule was violated (bad argument, unresolvable reference)."""


class UnknownBenchmarkError(DomainError):
    """A benchmark id did not resolve against the registry."""

    def __init__(self, benchmark_id: str, known_ids: tuple[str, ...]):
        super().__init__(
            f"unknown benchmark id {benchmark_id!r}; known ids: "
            + ", ".join(known_ids)
        )
        self.benchmark_id = benchmark_id
        self.known_ids = known_ids


class PrecisionMode(str, Enum):
    FP32 = "fp32"
    MIXED = "mixed"


@dataclass(frozen=True)
class QualityMetric:
    """A training quality metric. Scoring assumes higher values are better;
    lower-is-better metrics are flagged by validate_run."""

    kind: str  # "map_iou_050", "top1_accuracy", or "other"
    name: str
    higher_is_better: bool = True

    @classmethod
    def other(cls, name: str, higher_is_better: bool = True) -> "QualityMetric":
        return cls("other", name, higher_is_better)


MAP_IOU_050 = QualityMetric("map_iou_050", "mAP@[IoU=0.5]")
TOP1_ACCURACY = QualityMetric("top1_accuracy", "TOP-1 accuracy")


@dataclass(frozen=True)
class BenchmarkSpec:
    """Identity and quality contract of one benchmark workload."""

    id: str
    problem_domain: str
    model_name: str
    dataset_name: str
    quality_metric: QualityMetric
    target_quality: float
    required_epochs: int
    penalty_exponent: int

    def __post_init__(self):
        if not 0.0 < self.target_quality <= 1.0:
            raise DomainError(
                f"target_quality {self.target_quality} outside (0, 1]"
            )
        if self.required_epochs < 1:
            raise DomainError(f"required_epochs {self.required_epochs} < 1")
        if self.penalty_exponent < 1:
            raise DomainError(f"penalty_exponent {self.penalty_exponent} < 1")


@dataclass(frozen=True)
class RunRecord:
    """One measured training session.

    Numeric range rules are deliberately not enforced here: a malformed
    record must remain representable so validate_run can report it.
    """

    run_id: str
    benchmark_id: str
    system_name: str
    accelerator_count: int
    precision_mode: PrecisionMode
    comm_compression: bool
    sustained_flops: float
    achieved_quality: float
    epochs_run: int
    wall_clock_seconds: float
    seed: Optional[int] = None


@dataclass(frozen=True)
class ProfileVector:
    """Profiling features of one workload: five micro-architectural ratios
    plus three optional architecture-independent features.

    dram_utilization is a fraction here; the raw profiler level (0-10) is
    divided by 10 at ingest.
    """

    workload_id: str
    achieved_occupancy: float
    ipc_efficiency: float
    gld_efficiency: float
    gst_efficiency: float
    dram_utilization: float
    parameter_count: Optional[int] = None
    epochs_to_quality: Optional[float] = None
    flops_per_forward: Optional[float] = None

    RATIO_FIELDS = (
        "achieved_occupancy",
        "ipc_efficiency",
        "gld_efficiency",
        "gst_efficiency",
        "dram_utilization",
    )
    INDEPENDENT_FIELDS = ("parameter_count", "epochs_to_quality", "flops_per_forward")

    def __post_init__(self):
        for name in self.RATIO_FIELDS:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} {value} outside [0, 1]")
        if self.parameter_count is not None and self.parameter_count < 0:
            raise DomainError(f"parameter_count {self.parameter_count} < 0")
        if self.epochs_to_quality is not None and not self.epochs_to_quality > 0:
            raise DomainError(f"epochs_to_quality {self.epochs_to_quality} not > 0")
        if self.flops_per_forward is not None and not self.flops_per_forward > 0:
            raise DomainError(f"flops_per_forward {self.flops_per_forward} not > 0")

    def has_independent_features(self) -> bool:
        return all(getattr(self, f) is not None for f in self.INDEPENDENT_FIELDS)


@dataclass(frozen=True)
class ScoreReport:
    """Scoring outcome for one run. time_to_quality_seconds is None when the
    run never reached the target quality."""

    run_id: str
    penalty_coefficient: float
    vflops: float
    time_to_quality_seconds: Optional[float]
    valid: bool
    violations: tuple[str, ...]

    @property
    def above_target(self) -> bool:
        """Penalty above 1 means the run beat the target quality and its
        throughput was awarded, not penalized."""
        return self.penalty_coefficient > 1.0


@dataclass(frozen=True)
class AIBenchWorkload:
    """Published metadata of one AIBench Training workload: run-to-run
    variation (coefficient of variation of epochs-to-quality, as a fraction)
    and the number of repeated runs behind it. None means not reported."""

    code: str
    name: str
    variation: Optional[float]
    runs: Optional[int]


_BUILTIN_SPECS = (
    BenchmarkSpec(
        id="ewa",
        problem_domain="Extreme Weather Analytics",
        model_name="Faster-RCNN",
        dataset_name="EWA",
        quality_metric=MAP_IOU_050,
        target_quality=0.35,
        required_epochs=50,
        penalty_exponent=10,
    ),
    BenchmarkSpec(
        id="image_classification",
        problem_domain="Image Classification",
        model_name="ResNet50 v1.5",
        dataset_name="ImageNet",
        quality_metric=TOP1_ACCURACY,
        target_quality=0.763,
        required_epochs=90,
        penalty_exponent=5,
    ),
)

# Read-only: repeated lookups must return identical specs.
REGISTRY: Mapping[str, BenchmarkSpec] = MappingProxyType(
    {spec.id: spec for spec in _BUILTIN_SPECS}
)

AIBENCH_WORKLOADS = (
    AIBenchWorkload("DC-AI-C1", "Image classification", 0.0112, 5),
    AIBenchWorkload("DC-AI-C2", "Image generation", None, None),
    AIBenchWorkload("DC-AI-C3", "Text-to-Text translation", 0.0938, 6),
    AIBenchWorkload("DC-AI-C4", "Image-to-Text", 0.2353, 5),
    AIBenchWorkload("DC-AI-C5", "Image-to-Image", None, None),
    AIBenchWorkload("DC-AI-C6", "Speech recognition", 0.1208, 4),
    AIBenchWorkload("DC-AI-C7", "Face embedding", 0.0573, 8),
    AIBenchWorkload("DC-AI-C8", "3D Face Recognition", 0.3846, 4),
    AIBenchWorkload("DC-AI-C9", "Object detection", 0.0, 10),
    AIBenchWorkload("DC-AI-C10", "Recommendation", 0.0995, 5),
    AIBenchWorkload("DC-AI-C11", "Video prediction", 0.1183, 4),
    AIBenchWorkload("DC-AI-C12", "Image compression", 0.2249, 4),
    AIBenchWorkload("DC-AI-C13", "3D object reconstruction", 0.1607, 4),
    AIBenchWorkload("DC-AI-C14", "Text summarization", 0.2472, 5),
    AIBenchWorkload("DC-AI-C15", "Spatial transformer", 0.0729, 4),
    AIBenchWorkload("DC-AI-C16", "Learning to rank", 0.0190, 4),
    AIBenchWorkload("DC-AI-C17", "Neural Architecture Search", 0.0615, 6),
)


def registry_lookup(
    benchmark_id: str,
    overrides: Optional[Mapping[str, BenchmarkSpec]] = None,
) -> BenchmarkSpec:
    """Resolve a benchmark id against the registry.

    `overrides` holds per-invocation user specs; on an id clash the user
    spec wins for that invocation. The built-in registry itself is never
    mutated.
    """
    if overrides and benchmark_id in overrides:
        return overrides[benchmark_id]
    spec = REGISTRY.get(benchmark_id)
    if spec is None:
        known = tuple(sorted(set(REGISTRY) | set(overrides or ())))
        raise UnknownBenchmarkError(benchmark_id, known)
    return spec


def validate_run(run: RunRecord, spec: BenchmarkSpec) -> list[str]:
    """Check a run against its benchmark's contract.

    Returns one human-readable string per rule broken; an empty list means
    the run is a valid submission. Pure and order-stable.
    """
    if run.benchmark_id != spec.id:
        raise DomainError(
            f"run {run.run_id!r} references benchmark {run.benchmark_id!r}, "
            f"not {spec.id!r}"
        )
    violations = []
    if run.epochs_run != spec.required_epochs:
        violations.append(
            f"epochs_run {run.epochs_run} != required {spec.required_epochs}"
        )
    if not run.sustained_flops > 0:
        violations.append(f"sustained_flops {run.sustained_flops} not > 0")
    if not run.wall_clock_seconds > 0:
        violations.append(f"wall_clock_seconds {run.wall_clock_seconds} not > 0")
    if not 0.0 <= run.achieved_quality <= 1.0:
        violations.append(
            f"achieved_quality {run.achieved_quality} outside [0, 1]"
        )
    if run.accelerator_count < 1:
        violations.append(f"accelerator_count {run.accelerator_count} < 1")
    if not spec.quality_metric.higher_is_better:
        violations.append(
            f"quality metric {spec.quality_metric.name!r} is lower-is-better; "
            "scoring assumes higher-is-better metrics"
        )
    return violations

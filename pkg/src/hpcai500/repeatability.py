"""Run-to-run variation of epochs-to-quality.

Variation is the coefficient of variation (sample standard deviation over
the arithmetic mean) of the epochs a workload needs to reach its target
quality across repeated runs. It is stored as a plain fraction and only
formatted as a percentage at report time.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .core import DomainError, RunRecord

DEFAULT_THRESHOLD = 0.02

#: Default grouping key for repeated runs. `seed` participates only when
#: recorded: runs with unrecorded (random) seeds fall into one group, while
#: runs pinned to different seeds are different configurations.
DEFAULT_GROUP_FIELDS = (
    "benchmark_id",
    "system_name",
    "accelerator_count",
    "precision_mode",
    "comm_compression",
    "seed",
)


class Repeatability(str, Enum):
    REPEATABLE = "repeatable"
    UNREPEATABLE = "unrepeatable"


@dataclass(frozen=True)
class VariationReport:
    workload_id: str
    runs: int
    mean_epochs: float
    stddev_epochs: float
    variation: float  # stddev / mean, dimensionless fraction


def variation(
    epochs_samples: Sequence[float], workload_id: str = ""
) -> VariationReport:
    """Coefficient of variation of a sample of epochs-to-quality values.

    Uses the sample (N-1) standard deviation: the run counts behind such
    samples are tiny (typically 4-10), where the divisor choice matters.
    """
    samples = list(epochs_samples)
    if len(samples) < 2:
        raise DomainError(f"need at least 2 samples, got {len(samples)}")
    for value in samples:
        if not value > 0:
            raise DomainError(f"non-positive sample {value}")
    mean = statistics.fmean(samples)
    stddev = statistics.stdev(samples)
    return VariationReport(
        workload_id=workload_id,
        runs=len(samples),
        mean_epochs=mean,
        stddev_epochs=stddev,
        variation=stddev / mean,
    )


def classify_repeatability(
    report: VariationReport, threshold: float = DEFAULT_THRESHOLD
) -> Repeatability:
    """Repeatable iff variation <= threshold (boundary inclusive)."""
    if threshold < 0:
        raise DomainError(f"threshold {threshold} < 0")
    if report.variation <= threshold:
        return Repeatability.REPEATABLE
    return Repeatability.UNREPEATABLE


def group_epochs(
    records: Iterable[RunRecord],
    fields: Sequence[str] = DEFAULT_GROUP_FIELDS,
) -> dict[str, list[float]]:
    """Group runs by configuration and collect their epochs_run samples.

    The key is 'field=value' pairs joined with '/'; None-valued fields
    (an unrecorded seed) are left out of the key entirely.
    """
    for name in fields:
        if name not in RunRecord.__dataclass_fields__:
            raise DomainError(f"unknown group field {name!r}")
    groups: dict[str, list[float]] = {}
    for record in records:
        parts = []
        for name in fields:
            value = getattr(record, name)
            if value is None:
                continue
            if hasattr(value, "value"):
                value = value.value
            parts.append(f"{name}={value}")
        key = "/".join(parts)
        groups.setdefault(key, []).append(float(record.epochs_run))
    return groups

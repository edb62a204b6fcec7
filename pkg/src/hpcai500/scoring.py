"""Quality-penalized throughput scoring.

A run's score is its sustained throughput multiplied by a penalty
coefficient (achieved_quality / target_quality) ** n, which penalizes
throughput below the target quality and rewards it above. All arithmetic is
binary64; every function here is pure.
"""

from __future__ import annotations

import math
from typing import Optional

from .core import BenchmarkSpec, DomainError, RunRecord, ScoreReport, validate_run


def penalty_coefficient(
    achieved_quality: float, target_quality: float, n: int
) -> float:
    """(achieved_quality / target_quality) ** n.

    Strictly increasing in achieved_quality and exactly 1.0 when the target
    is met. n controls how sharply a quality shortfall degrades the score.
    """
    if not target_quality > 0:
        raise DomainError(f"target_quality {target_quality} not > 0")
    if achieved_quality < 0:
        raise DomainError(f"achieved_quality {achieved_quality} < 0")
    if n < 1:
        raise DomainError(f"penalty exponent {n} < 1")
    return (achieved_quality / target_quality) ** n


def vflops(sustained_flops: float, penalty: float) -> float:
    """Penalty-weighted throughput, FLOP/s."""
    if not (math.isfinite(sustained_flops) and math.isfinite(penalty)):
        raise DomainError("vflops inputs must be finite")
    return sustained_flops * penalty


def time_to_quality(run: RunRecord, target_quality: float) -> Optional[float]:
    """Wall-clock seconds for a run that met or exceeded the target quality;
    None when the target was never reached."""
    if run.achieved_quality >= target_quality:
        return run.wall_clock_seconds
    return None


def score_run(run: RunRecord, spec: BenchmarkSpec) -> ScoreReport:
    """Score one run against its benchmark spec.

    Validation is decoupled from the arithmetic: an invalid run still gets a
    numeric score, flagged via valid=False and the violation list. A
    nonsensical negative achieved_quality is clamped to 0 for the penalty so
    the score stays a well-defined non-negative number.
    """
    if run.benchmark_id != spec.id:
        raise DomainError(
            f"run {run.run_id!r} references benchmark {run.benchmark_id!r}, "
            f"not {spec.id!r}"
        )
    violations = validate_run(run, spec)
    penalty = penalty_coefficient(
        max(run.achieved_quality, 0.0), spec.target_quality, spec.penalty_exponent
    )
    return ScoreReport(
        run_id=run.run_id,
        penalty_coefficient=penalty,
        vflops=vflops(run.sustained_flops, penalty),
        time_to_quality_seconds=time_to_quality(run, spec.target_quality),
        valid=not violations,
        violations=tuple(violations),
    )

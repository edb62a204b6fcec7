"""Measured scaling analysis and an analytical all-reduce cost model.

The measured side turns throughput at several device counts into speedup and
parallel efficiency relative to a baseline scale. The analytical side is a
deliberately small no-overlap model: one training step costs compute time
plus all-reduce payload over the effective link bandwidth. It reproduces the
qualitative compute-bound vs communication-bound behavior of real workloads;
it is not a packet-level simulator and omits latency terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .core import DomainError, RunRecord


class Topology(str, Enum):
    RING = "ring"
    # Modeled with the ring volume: both move ~2M per device at scale, and
    # this model tracks volume, not latency.
    DOUBLE_BINARY_TREE = "double_binary_tree"


@dataclass(frozen=True)
class ScalingPoint:
    scale: int
    sustained_flops: float
    efficiency: float
    speedup: float


@dataclass(frozen=True)
class ScalingCurve:
    """Efficiency/speedup per scale for one benchmark+system+configuration.
    Superlinear points are kept as measured and flagged in warnings."""

    benchmark_id: str
    baseline_scale: int
    points: tuple[ScalingPoint, ...]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class CommModel:
    """Inputs of the analytical step-time model."""

    model_bytes: float
    per_device_compute_seconds: float
    intra_node_bandwidth: float
    inter_node_bandwidth: float
    devices_per_node: int
    compression: bool = False
    topology: Topology = Topology.RING

    def __post_init__(self):
        if self.model_bytes < 0:
            raise DomainError(f"model_bytes {self.model_bytes} < 0")
        if not self.per_device_compute_seconds > 0:
            raise DomainError(
                f"per_device_compute_seconds "
                f"{self.per_device_compute_seconds} not > 0"
            )
        if not self.intra_node_bandwidth > 0:
            raise DomainError(
                f"intra_node_bandwidth {self.intra_node_bandwidth} not > 0"
            )
        if not self.inter_node_bandwidth > 0:
            raise DomainError(
                f"inter_node_bandwidth {self.inter_node_bandwidth} not > 0"
            )
        if self.devices_per_node < 1:
            raise DomainError(f"devices_per_node {self.devices_per_node} < 1")


def scaling_curve(
    runs: Iterable[RunRecord], baseline_scale: int
) -> ScalingCurve:
    """Speedup and parallel efficiency per scale, relative to the run at
    baseline_scale: speedup(p) = flops(p) / flops(p0) and
    efficiency(p) = speedup(p) / (p / p0). Exactly 1.0 at the baseline."""
    runs = list(runs)
    if not runs:
        raise DomainError("no runs given")
    config = {
        (r.benchmark_id, r.system_name, r.precision_mode, r.comm_compression)
        for r in runs
    }
    if len(config) > 1:
        raise DomainError(
            "runs mix benchmark/system/precision/compression configurations"
        )
    by_scale: dict[int, RunRecord] = {}
    for run in runs:
        if run.accelerator_count in by_scale:
            raise DomainError(
                f"duplicate scale {run.accelerator_count} "
                f"(runs {by_scale[run.accelerator_count].run_id!r} "
                f"and {run.run_id!r})"
            )
        by_scale[run.accelerator_count] = run
    if baseline_scale not in by_scale:
        raise DomainError(
            f"no run at baseline scale {baseline_scale}; "
            f"scales present: {sorted(by_scale)}"
        )
    baseline_flops = by_scale[baseline_scale].sustained_flops
    if not baseline_flops > 0:
        raise DomainError(f"baseline sustained_flops {baseline_flops} not > 0")
    points = []
    warnings = []
    for scale in sorted(by_scale):
        run = by_scale[scale]
        speedup = run.sustained_flops / baseline_flops
        efficiency = speedup / (scale / baseline_scale)
        if not efficiency > 0:
            raise DomainError(
                f"efficiency {efficiency} at scale {scale} not > 0"
            )
        if efficiency > 1.0:
            warnings.append(
                f"scale {scale}: efficiency {efficiency:.4f} > 1 "
                "(superlinear; likely measurement noise)"
            )
        points.append(
            ScalingPoint(
                scale=scale,
                sustained_flops=run.sustained_flops,
                efficiency=efficiency,
                speedup=speedup,
            )
        )
    return ScalingCurve(
        benchmark_id=runs[0].benchmark_id,
        baseline_scale=baseline_scale,
        points=tuple(points),
        warnings=tuple(warnings),
    )


def allreduce_bytes_per_device(
    model_bytes: float, p: int, topology: Topology = Topology.RING
) -> float:
    """Bytes each device moves to all-reduce a payload of model_bytes over
    p devices: 2 * (p - 1) / p * model_bytes, zero for a single device."""
    if p < 1:
        raise DomainError(f"device count {p} < 1")
    Topology(topology)  # both topologies use the ring volume
    return 2.0 * (p - 1) / p * model_bytes


def predict_efficiency(model: CommModel, p: int) -> float:
    """Predicted parallel efficiency at p devices: compute / (compute +
    communication), with no compute/communication overlap.

    Communication is the all-reduce volume (halved under compression) over
    the intra-node bandwidth while p fits in one node, the inter-node
    bandwidth beyond.
    """
    if p < 1:
        raise DomainError(f"device count {p} < 1")
    comm_bytes = allreduce_bytes_per_device(model.model_bytes, p, model.topology)
    if model.compression:
        comm_bytes *= 0.5
    bandwidth = (
        model.intra_node_bandwidth
        if p <= model.devices_per_node
        else model.inter_node_bandwidth
    )
    comm_seconds = comm_bytes / bandwidth
    compute = model.per_device_compute_seconds
    return compute / (compute + comm_seconds)


def write_scaling_csv(path: str | Path, curve: ScalingCurve) -> None:
    """`scaling.csv`: scale,flops,speedup,efficiency rows for plotting."""
    lines = ["scale,flops,speedup,efficiency"]
    for point in curve.points:
        lines.append(
            f"{point.scale},{point.sustained_flops!r},"
            f"{point.speedup!r},{point.efficiency!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_prediction_csv(
    path: str | Path, model: CommModel, scales: Sequence[int]
) -> None:
    """`prediction.csv`: modeled communication cost and efficiency per scale."""
    lines = ["scale,comm_bytes_per_device,comm_seconds,efficiency"]
    for p in scales:
        comm_bytes = allreduce_bytes_per_device(model.model_bytes, p, model.topology)
        if model.compression:
            comm_bytes *= 0.5
        bandwidth = (
            model.intra_node_bandwidth
            if p <= model.devices_per_node
            else model.inter_node_bandwidth
        )
        efficiency = predict_efficiency(model, p)
        lines.append(
            f"{p},{comm_bytes!r},{comm_bytes / bandwidth!r},{efficiency!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

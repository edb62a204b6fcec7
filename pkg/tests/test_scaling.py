from dataclasses import replace

import numpy as np
import pytest

from hpcai500.core import DomainError, PrecisionMode
from hpcai500.scaling import (
    CommModel,
    Topology,
    allreduce_bytes_per_device,
    predict_efficiency,
    scaling_curve,
)
from helpers import make_run


def _runs(flops_by_scale, **kwargs):
    return [
        make_run(
            run_id=f"r{scale}", accelerator_count=scale,
            sustained_flops=flops, **kwargs,
        )
        for scale, flops in flops_by_scale.items()
    ]


def _point(curve, scale):
    return next(p for p in curve.points if p.scale == scale)


def test_curve_paper_pair_091():
    curve = scaling_curve(_runs({8: 100e12, 16: 182e12}), baseline_scale=8)
    assert _point(curve, 16).efficiency == pytest.approx(0.91, abs=1e-12)
    assert _point(curve, 16).speedup == pytest.approx(1.82, abs=1e-12)


def test_curve_ideal_linear():
    curve = scaling_curve(_runs({8: 50e12, 64: 400e12}), baseline_scale=8)
    assert _point(curve, 64).efficiency == 1.0


def test_curve_back_solved_071():
    curve = scaling_curve(_runs({8: 60.74e12, 64: 345e12}), baseline_scale=8)
    assert _point(curve, 64).efficiency == pytest.approx(0.71, abs=0.005)


def test_curve_baseline_exactly_one():
    curve = scaling_curve(
        _runs({8: 123.456e12, 16: 200e12, 32: 361e12}), baseline_scale=8
    )
    assert _point(curve, 8).efficiency == 1.0
    assert _point(curve, 8).speedup == 1.0
    assert [p.scale for p in curve.points] == [8, 16, 32]


def test_curve_missing_baseline():
    with pytest.raises(DomainError, match="baseline"):
        scaling_curve(_runs({16: 100e12}), baseline_scale=8)


def test_curve_duplicate_scale():
    runs = _runs({8: 100e12}) + [
        make_run(run_id="dup", accelerator_count=8, sustained_flops=90e12)
    ]
    with pytest.raises(DomainError, match="duplicate scale 8"):
        scaling_curve(runs, baseline_scale=8)


def test_curve_mixed_configuration_rejected():
    runs = _runs({8: 100e12}) + [
        make_run(
            run_id="x", accelerator_count=16, sustained_flops=150e12,
            precision_mode=PrecisionMode.MIXED,
        )
    ]
    with pytest.raises(DomainError, match="mix"):
        scaling_curve(runs, baseline_scale=8)


def test_curve_superlinear_flagged_not_clamped():
    curve = scaling_curve(_runs({8: 100e12, 16: 210e12}), baseline_scale=8)
    assert _point(curve, 16).efficiency == pytest.approx(1.05, abs=1e-12)
    assert len(curve.warnings) == 1
    assert "superlinear" in curve.warnings[0]


def test_allreduce_volume_examples():
    assert allreduce_bytes_per_device(100e6, 1) == 0.0
    assert allreduce_bytes_per_device(100e6, 2) == 100e6
    # approaches 2M from below as p grows
    assert allreduce_bytes_per_device(1.0, 10**9) == pytest.approx(2.0, abs=1e-8)
    assert allreduce_bytes_per_device(1.0, 10**9) < 2.0


def test_allreduce_volume_matches_stepwise_evaluation():
    # 2(p-1) steps, each moving a 1/p chunk per device
    for p in (1, 2, 4, 8, 64):
        model_bytes = 100e6
        chunk = model_bytes / p
        total = 0.0
        for _ in range(2 * (p - 1)):
            total += chunk
        assert allreduce_bytes_per_device(model_bytes, p) == pytest.approx(
            total, rel=1e-12
        )


def test_allreduce_tree_uses_ring_volume():
    assert allreduce_bytes_per_device(
        8e6, 16, Topology.DOUBLE_BINARY_TREE
    ) == allreduce_bytes_per_device(8e6, 16, Topology.RING)


def _model(**overrides):
    kwargs = dict(
        model_bytes=100e6,
        per_device_compute_seconds=0.1,
        intra_node_bandwidth=300e9,
        inter_node_bandwidth=1.25e9,
        devices_per_node=8,
    )
    kwargs.update(overrides)
    return CommModel(**kwargs)


def test_predict_single_device_is_one():
    assert predict_efficiency(_model(), 1) == 1.0


def test_predict_definitional_half():
    # compute 1 s, comm 1 s
    model = _model(
        model_bytes=2e9, per_device_compute_seconds=1.0,
        intra_node_bandwidth=2e9, devices_per_node=8,
    )
    assert predict_efficiency(model, 2) == 0.5


def test_predict_bandwidth_switch_at_node_boundary():
    model = _model()
    within = predict_efficiency(model, 8)
    beyond = predict_efficiency(model, 9)
    assert beyond < within  # inter-node link is slower


def test_predict_compression_never_hurts():
    rng = np.random.default_rng(44)
    for _ in range(300):
        model = _model(
            model_bytes=float(10 ** rng.uniform(6, 10)),
            per_device_compute_seconds=float(10 ** rng.uniform(-3, 1)),
            intra_node_bandwidth=float(10 ** rng.uniform(9, 12)),
            inter_node_bandwidth=float(10 ** rng.uniform(8, 11)),
            devices_per_node=int(rng.integers(1, 17)),
        )
        p = int(rng.integers(1, 1025))
        plain = predict_efficiency(model, p)
        compressed = predict_efficiency(replace(model, compression=True), p)
        assert compressed >= plain
        if p > 1 and model.model_bytes > 0:
            assert compressed > plain


def test_predict_monotone_in_payload_and_bandwidth():
    rng = np.random.default_rng(45)
    for _ in range(300):
        base = dict(
            model_bytes=float(10 ** rng.uniform(6, 10)),
            per_device_compute_seconds=float(10 ** rng.uniform(-3, 1)),
            intra_node_bandwidth=float(10 ** rng.uniform(9, 12)),
            inter_node_bandwidth=float(10 ** rng.uniform(8, 11)),
            devices_per_node=int(rng.integers(1, 17)),
        )
        p = int(rng.integers(2, 257))
        eff = predict_efficiency(CommModel(**base), p)
        heavier = predict_efficiency(
            CommModel(**{**base, "model_bytes": base["model_bytes"] * 3.0}), p
        )
        assert heavier <= eff
        faster = predict_efficiency(
            CommModel(
                **{
                    **base,
                    "intra_node_bandwidth": base["intra_node_bandwidth"] * 3.0,
                    "inter_node_bandwidth": base["inter_node_bandwidth"] * 3.0,
                }
            ),
            p,
        )
        assert faster >= eff


def test_large_payload_workload_scales_worse():
    # same interconnect, two workloads differing only in gradient payload
    heavy = _model(model_bytes=2e9)    # communication-intensive
    light = _model(model_bytes=100e6)  # computation-intensive
    assert predict_efficiency(heavy, 64) < predict_efficiency(light, 64)


def test_comm_model_validation():
    with pytest.raises(DomainError):
        _model(intra_node_bandwidth=0.0)
    with pytest.raises(DomainError):
        _model(devices_per_node=0)
    with pytest.raises(DomainError):
        _model(per_device_compute_seconds=0.0)

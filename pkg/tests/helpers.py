"""Shared fixtures-in-code for the test suite."""

from __future__ import annotations

import numpy as np

from hpcai500.core import PrecisionMode, RunRecord
from hpcai500.report import RankingEntry

#: Fixture ranking used for emission goldens; names stress CSV and markdown
#: escaping, the second entry has a sub-unit penalty and an unreached TTQ.
RANKING_FIXTURE = [
    RankingEntry(
        rank=1, system_name="Sys,One", benchmark_id="image_classification",
        vflops=31.41e15, penalty_coefficient=1.0,
        time_to_quality_seconds=4321.0, scale=2048,
        precision_mode=PrecisionMode.MIXED,
    ),
    RankingEntry(
        rank=2, system_name="Sys|Two", benchmark_id="image_classification",
        vflops=9.39e14, penalty_coefficient=0.9486632313832455,
        time_to_quality_seconds=None, scale=64,
        precision_mode=PrecisionMode.FP32,
    ),
]


def make_run(
    run_id="r1",
    benchmark_id="image_classification",
    system_name="SysA",
    accelerator_count=64,
    precision_mode=PrecisionMode.FP32,
    comm_compression=False,
    sustained_flops=939e12,
    achieved_quality=0.763,
    epochs_run=90,
    wall_clock_seconds=7200.0,
    seed=None,
):
    return RunRecord(
        run_id=run_id,
        benchmark_id=benchmark_id,
        system_name=system_name,
        accelerator_count=accelerator_count,
        precision_mode=precision_mode,
        comm_compression=comm_compression,
        sustained_flops=sustained_flops,
        achieved_quality=achieved_quality,
        epochs_run=epochs_run,
        wall_clock_seconds=wall_clock_seconds,
        seed=seed,
    )


def random_run(rng: np.random.Generator, index: int) -> RunRecord:
    """Randomized but well-formed record; system names stress CSV quoting."""
    systems = ["SysA", "Sys,B", 'Sys"C"', "Sys|D", "Sys Eé"]
    benchmark = ["ewa", "image_classification"][int(rng.integers(2))]
    return RunRecord(
        run_id=f"run-{index:05d}",
        benchmark_id=benchmark,
        system_name=systems[int(rng.integers(len(systems)))],
        accelerator_count=int(rng.integers(1, 4097)),
        precision_mode=list(PrecisionMode)[int(rng.integers(2))],
        comm_compression=bool(rng.integers(2)),
        sustained_flops=float(10.0 ** rng.uniform(9, 18)),
        achieved_quality=float(rng.random()),
        epochs_run=int(rng.integers(1, 301)),
        wall_clock_seconds=float(10.0 ** rng.uniform(0, 6)),
        seed=int(rng.integers(0, 2**31)) if rng.random() < 0.5 else None,
    )


def blob_matrix(
    n_blobs=3, per_blob=3, dims=5, separation=10.0, spread=0.05, seed=7
):
    """Well-separated synthetic blobs plus the true blob labels."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(n_blobs, dims))
    centers *= separation / max(
        1e-9, min(np.linalg.norm(a - b) for i, a in enumerate(centers)
                  for b in centers[i + 1:])
    )
    rows = np.vstack(
        [c + rng.normal(0.0, spread, size=(per_blob, dims)) for c in centers]
    )
    labels = np.repeat(np.arange(n_blobs), per_blob)
    return rows, labels


def partition(labels) -> frozenset:
    """Partition of row indices induced by labels, comparable across
    relabelings."""
    groups = {}
    for i, label in enumerate(labels):
        groups.setdefault(label, set()).add(i)
    return frozenset(frozenset(g) for g in groups.values())

"""Workload characterization: feature standardization, k-means clustering,
and a 2-D t-SNE embedding of profiling feature vectors.

The t-SNE here is the exact O(n^2) symmetric formulation, not Barnes-Hut: the
corpora are a few dozen workloads at most, and the exact form is far easier
to verify. Everything is deterministic for a fixed seed; input vectors are
sorted by workload_id before any randomness is drawn, so shuffled input
files produce identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels as kernels
from .core import DomainError, ProfileVector

ARCH_DEPENDENT_FEATURES = ProfileVector.RATIO_FIELDS
ARCH_INDEPENDENT_FEATURES = ProfileVector.INDEPENDENT_FIELDS

# Gradient-descent schedule: early exaggeration opens gaps between natural
# clusters before the fine phase, and the momentum switch follows it.
EARLY_EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
INITIAL_MOMENTUM = 0.5
FINAL_MOMENTUM = 0.8
MIN_GAIN = 0.01
INIT_STDDEV = 1e-4

PERPLEXITY_TOL = 1e-4
MAX_CALIBRATION_STEPS = 200


class Mode(str, Enum):
    ARCH_DEPENDENT = "arch_dependent"
    ARCH_INDEPENDENT = "arch_independent"


class CalibrationError(DomainError):
    """The requested perplexity is not reachable for some input point."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Rectangular feature matrix, one row per workload. The array is frozen
    read-only so instances stay safe to share."""

    workload_ids: tuple[str, ...]
    rows: np.ndarray
    feature_names: tuple[str, ...]
    standardized: bool = False

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise DomainError(f"rows must be 2-D, got {rows.ndim}-D")
        if rows.shape[0] != len(self.workload_ids):
            raise DomainError(
                f"{len(self.workload_ids)} workload ids for {rows.shape[0]} rows"
            )
        if rows.shape[1] != len(self.feature_names):
            raise DomainError(
                f"{len(self.feature_names)} feature names for "
                f"{rows.shape[1]} columns"
            )
        if not np.all(np.isfinite(rows)):
            raise DomainError("non-finite feature value")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class ClusterResult:
    """k-means outcome. inertia_history holds the inertia of every Lloyd
    sweep, measured against the centroids used for that sweep's assignment;
    it is non-increasing."""

    labels: tuple[int, ...]
    centroids: np.ndarray
    inertia: float
    k: int
    seed: int
    inertia_history: tuple[float, ...]

    def __post_init__(self):
        if any(not 0 <= label < self.k for label in self.labels):
            raise DomainError("cluster label outside [0, k)")
        if self.inertia < 0:
            raise DomainError(f"inertia {self.inertia} < 0")
        centroids = np.ascontiguousarray(self.centroids, dtype=np.float64)
        centroids.setflags(write=False)
        object.__setattr__(self, "centroids", centroids)


@dataclass(frozen=True)
class Embedding2D:
    """2-D embedding coordinates aligned with the input rows. final_kl is
    the KL divergence of the fit in nats (natural log); the perplexity
    target uses base-2 entropy."""

    coords: tuple[tuple[float, float], ...]
    perplexity: float
    final_kl: float
    seed: int

    def __post_init__(self):
        for x, y in self.coords:
            if not (np.isfinite(x) and np.isfinite(y)):
                raise DomainError("non-finite embedding coordinate")
        if self.final_kl < 0:
            raise DomainError(f"final_kl {self.final_kl} < 0")


@dataclass(frozen=True)
class CharacterizationResult:
    mode: Mode
    workload_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    clusters: ClusterResult
    embedding: Optional[Embedding2D]
    dropped: tuple[str, ...]


def standardize(matrix: FeatureMatrix) -> FeatureMatrix:
    """Z-score each column (sample standard deviation); constant columns
    become all zeros. Standardizing twice is an error."""
    if matrix.standardized:
        raise DomainError("matrix is already standardized")
    if matrix.rows.shape[0] < 2:
        raise DomainError(
            f"standardization needs at least 2 rows, got {matrix.rows.shape[0]}"
        )
    mean = matrix.rows.mean(axis=0)
    std = matrix.rows.std(axis=0, ddof=1)
    safe = np.where(std == 0.0, 1.0, std)
    z = (matrix.rows - mean) / safe
    z[:, std == 0.0] = 0.0
    return FeatureMatrix(
        workload_ids=matrix.workload_ids,
        rows=z,
        feature_names=matrix.feature_names,
        standardized=True,
    )


def _require_standardized(matrix: FeatureMatrix):
    if not matrix.standardized:
        raise DomainError("matrix must be standardized first")


def _plus_plus_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each next centroid is drawn with probability
    proportional to its squared distance from the nearest chosen one."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[int(rng.integers(n))]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining points coincide with chosen centroids
            idx = int(rng.integers(n))
        centroids[i] = x[idx]
        d2 = np.minimum(d2, ((x - centroids[i]) ** 2).sum(axis=1))
    return centroids


def kmeans(
    matrix: FeatureMatrix,
    k: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterResult:
    """Lloyd's algorithm with k-means++ initialization.

    Deterministic for a fixed (matrix, k, seed); terminates when the biggest
    centroid movement drops below tol or after max_iter sweeps. The returned
    labels are exact nearest-centroid assignments against the returned
    centroids.
    """
    _require_standardized(matrix)
    n = matrix.rows.shape[0]
    if n == 0:
        raise DomainError("empty matrix")
    if not 1 <= k <= n:
        raise DomainError(f"k {k} outside [1, {n}]")
    if max_iter < 1:
        raise DomainError(f"max_iter {max_iter} < 1")
    x = matrix.rows
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(x, k, rng)
    history: list[float] = []
    while True:
        labels, updated, inertia = kernels.lloyd_iteration(x, centroids)
        if history and not inertia <= history[-1] * (1.0 + 1e-9) + 1e-12:
            raise AssertionError(
                f"inertia increased: {history[-1]} -> {inertia}"
            )
        history.append(inertia)
        movement = float(
            np.sqrt(((updated - centroids) ** 2).sum(axis=1)).max()
        )
        if movement < tol or len(history) >= max_iter:
            break
        centroids = updated
    return ClusterResult(
        labels=tuple(int(label) for label in labels),
        centroids=centroids,
        inertia=float(inertia),
        k=k,
        seed=seed,
        inertia_history=tuple(history),
    )


def pairwise_squared_distances(matrix: FeatureMatrix) -> np.ndarray:
    return kernels.pairwise_sq_dists(matrix.rows)


def calibrated_affinities(d2: np.ndarray, perplexity: float):
    """Conditional affinity matrix with per-point bandwidths found by
    bisection so each row's perplexity (2 ** base-2 entropy) matches the
    request within PERPLEXITY_TOL.

    Returns (P_conditional, betas, achieved_perplexities); raises
    CalibrationError when some row cannot reach the target.
    """
    d2 = np.ascontiguousarray(d2, dtype=np.float64)
    p_cond, betas, achieved = kernels.conditional_affinities(
        d2, perplexity, PERPLEXITY_TOL, MAX_CALIBRATION_STEPS
    )
    off = np.abs(achieved - perplexity) > PERPLEXITY_TOL
    if off.any():
        rows = ", ".join(str(i) for i in np.flatnonzero(off))
        raise CalibrationError(
            f"perplexity {perplexity} infeasible for row(s) {rows}; "
            f"achieved {achieved[off]}"
        )
    return p_cond, betas, achieved


def affinities_for_bandwidths(d2: np.ndarray, betas) -> np.ndarray:
    """Conditional affinities at caller-chosen bandwidths (diagnostics)."""
    d2 = np.ascontiguousarray(d2, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    return kernels.affinities_for_bandwidths(d2, betas)


def joint_affinities(matrix: FeatureMatrix, perplexity: float) -> np.ndarray:
    """Symmetrized joint probabilities: P = (P_cond + P_cond.T) / 2n.

    Non-negative, symmetric, sums to 1 (up to rounding), zero diagonal.
    """
    _require_standardized(matrix)
    d2 = pairwise_squared_distances(matrix)
    p_cond, _, _ = calibrated_affinities(d2, perplexity)
    n = matrix.rows.shape[0]
    return (p_cond + p_cond.T) / (2.0 * n)


def tsne(
    matrix: FeatureMatrix,
    seed: int,
    perplexity: float = 4.0,
    iterations: int = 1000,
    learning_rate: float = 200.0,
) -> Embedding2D:
    """Exact symmetric t-SNE to 2 dimensions.

    Student-t low-dimensional kernel; gradient descent with early
    exaggeration (factor 12 for the first 250 iterations), momentum 0.5
    switching to 0.8 at iteration 250, and the usual per-coordinate adaptive
    gains. Initialization is Gaussian with stddev 1e-4 from the seeded
    generator; deterministic for a fixed seed.
    """
    _require_standardized(matrix)
    n = matrix.rows.shape[0]
    if n < 4:
        raise DomainError(f"t-SNE needs at least 4 rows, got {n}")
    if not 1.0 <= perplexity < n - 1:
        raise CalibrationError(
            f"perplexity {perplexity} infeasible for {n} rows; "
            f"must be in [1, {n - 1})"
        )
    if iterations < 1:
        raise DomainError(f"iterations {iterations} < 1")
    p = joint_affinities(matrix, perplexity)
    p_exaggerated = p * EARLY_EXAGGERATION
    rng = np.random.default_rng(seed)
    y = rng.normal(0.0, INIT_STDDEV, size=(n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    for it in range(iterations):
        grad = kernels.tsne_grad(
            p_exaggerated if it < EXAGGERATION_ITERS else p, y
        )
        momentum = INITIAL_MOMENTUM if it < EXAGGERATION_ITERS else FINAL_MOMENTUM
        sign_match = (grad > 0) == (velocity > 0)
        gains = np.where(sign_match, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        velocity = momentum * velocity - learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    final_kl = float(kernels.kl_divergence(p, y))
    return Embedding2D(
        coords=tuple((float(a), float(b)) for a, b in y),
        perplexity=perplexity,
        final_kl=final_kl,
        seed=seed,
    )


def _feature_value(vector: ProfileVector, name: str) -> float:
    return float(getattr(vector, name))


def build_feature_matrix(
    vectors: Sequence[ProfileVector], mode: Mode
) -> tuple[FeatureMatrix, tuple[str, ...]]:
    """Assemble the (unstandardized) feature matrix for a mode.

    Rows are sorted by workload_id. In the architecture-independent mode,
    vectors missing any of the three optional features are dropped; the
    returned second element lists them.
    """
    ordered = sorted(vectors, key=lambda v: v.workload_id)
    for a, b in zip(ordered, ordered[1:]):
        if a.workload_id == b.workload_id:
            raise DomainError(f"duplicate workload_id {a.workload_id!r}")
    if mode is Mode.ARCH_DEPENDENT:
        usable = ordered
        dropped: tuple[str, ...] = ()
        names = ARCH_DEPENDENT_FEATURES
    else:
        usable = [v for v in ordered if v.has_independent_features()]
        dropped = tuple(
            v.workload_id for v in ordered if not v.has_independent_features()
        )
        names = ARCH_INDEPENDENT_FEATURES
    rows = np.array(
        [[_feature_value(v, name) for name in names] for v in usable]
    ).reshape(len(usable), len(names))
    matrix = FeatureMatrix(
        workload_ids=tuple(v.workload_id for v in usable),
        rows=rows,
        feature_names=tuple(names),
        standardized=False,
    )
    return matrix, dropped


def characterize(
    vectors: Iterable[ProfileVector],
    mode: Mode | str,
    seed: int,
    k: int = 3,
    perplexity: float = 4.0,
    iterations: int = 1000,
) -> CharacterizationResult:
    """Standardize, cluster, and embed a set of profile vectors.

    With fewer than 4 usable vectors a 2-D embedding is not meaningful, so
    the clustering is still returned but the embedding is None.
    """
    mode = Mode(mode)
    matrix, dropped = build_feature_matrix(list(vectors), mode)
    n = matrix.rows.shape[0]
    if n < k:
        raise DomainError(f"only {n} usable vectors for k={k}")
    std = standardize(matrix)
    clusters = kmeans(std, k, seed)
    embedding = None
    if n >= 4:
        embedding = tsne(std, seed, perplexity=perplexity, iterations=iterations)
    return CharacterizationResult(
        mode=mode,
        workload_ids=std.workload_ids,
        feature_names=std.feature_names,
        clusters=clusters,
        embedding=embedding,
        dropped=dropped,
    )


def write_embedding_csv(path: str | Path, result: CharacterizationResult) -> None:
    """`embedding.csv`: workload_id,x,y,cluster with one row per embedded
    workload. Coordinate cells are empty when no embedding was computed."""
    lines = ["workload_id,x,y,cluster"]
    for i, workload_id in enumerate(result.workload_ids):
        if result.embedding is not None:
            x, y = result.embedding.coords[i]
            lines.append(f"{workload_id},{x!r},{y!r},{result.clusters.labels[i]}")
        else:
            lines.append(f"{workload_id},,,{result.clusters.labels[i]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_clusters_json(path: str | Path, result: CharacterizationResult) -> None:
    """`clusters.json`: labels, centroids, inertia, and dropped workloads,
    plus the metadata needed to reproduce the run."""
    embedding = None
    if result.embedding is not None:
        embedding = {
            "perplexity": result.embedding.perplexity,
            "final_kl": result.embedding.final_kl,
            "kl_log_base": "e",
            "perplexity_entropy_base": 2,
        }
    payload = {
        "mode": result.mode.value,
        "k": result.clusters.k,
        "seed": result.clusters.seed,
        "standardized": True,
        "feature_names": list(result.feature_names),
        "workload_ids": list(result.workload_ids),
        "labels": list(result.clusters.labels),
        "centroids": [list(row) for row in result.clusters.centroids.tolist()],
        "inertia": result.clusters.inertia,
        "dropped_workloads": list(result.dropped),
        "embedding": embedding,
    }
    Path(path).write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )

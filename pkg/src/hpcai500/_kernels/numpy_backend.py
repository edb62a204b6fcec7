"""Pure-numpy implementations of the hot numeric kernels.

Same contracts as the compiled backend: float64 C-contiguous arrays in,
deterministic single-threaded evaluation. Inputs are assumed validated by
the caller.
"""

from __future__ import annotations

import math

import numpy as np

LN2 = math.log(2.0)


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance matrix, computed from coordinate
    differences (not the expanded dot-product form, which loses precision
    for nearby points)."""
    diff = x[:, None, :] - x[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, 0.0)
    return d2


def _row_affinity(e: np.ndarray, beta: float):
    """Affinities and base-2 entropy for one point at bandwidth beta.

    `e` holds that row's squared distances, self excluded, shifted by their
    minimum so the largest weight is exp(0) and the sum never underflows.
    """
    w = np.exp(-beta * e)
    s = w.sum()
    p = w / s
    h_nats = beta * float(p @ e) + math.log(s)
    return p, h_nats / LN2


def conditional_affinities(
    d2: np.ndarray, perplexity: float, tol: float, max_steps: int
):
    """Per-point bandwidth calibration by bisection.

    Returns (P, betas, achieved) where P[i, j] is the conditional affinity
    of j given i (diagonal zero, rows sum to 1) and achieved[i] is the
    realized perplexity 2**H(P[i]). Rows whose achieved perplexity is still
    off target after max_steps are returned as-is; the caller decides
    whether that is an error.
    """
    n = d2.shape[0]
    p_matrix = np.zeros((n, n))
    betas = np.empty(n)
    achieved = np.empty(n)
    others = np.arange(n - 1)
    for i in range(n):
        e = np.delete(d2[i], i)
        e = e - e.min()
        beta, lo, hi = 1.0, 0.0, math.inf
        p, h = _row_affinity(e, beta)
        perp = 2.0**h
        steps = 0
        while abs(perp - perplexity) > tol and steps < max_steps:
            if perp > perplexity:
                lo = beta
                beta = beta * 2.0 if hi == math.inf else 0.5 * (lo + hi)
            else:
                hi = beta
                beta = beta * 0.5 if lo == 0.0 else 0.5 * (lo + hi)
            p, h = _row_affinity(e, beta)
            perp = 2.0**h
            steps += 1
        betas[i] = beta
        achieved[i] = perp
        cols = np.where(others < i, others, others + 1)
        p_matrix[i, cols] = p
    return p_matrix, betas, achieved


def affinities_for_bandwidths(d2: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Conditional affinity matrix at fixed per-point bandwidths."""
    n = d2.shape[0]
    p_matrix = np.zeros((n, n))
    others = np.arange(n - 1)
    for i in range(n):
        e = np.delete(d2[i], i)
        e = e - e.min()
        p, _ = _row_affinity(e, float(betas[i]))
        cols = np.where(others < i, others, others + 1)
        p_matrix[i, cols] = p
    return p_matrix


def _student_t_numerators(y: np.ndarray) -> np.ndarray:
    diff = y[:, None, :] - y[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    num = 1.0 / (1.0 + d2)
    np.fill_diagonal(num, 0.0)
    return num


def tsne_grad(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of the KL objective for the Student-t low-dimensional
    kernel: grad_i = 4 * sum_j (p_ij - q_ij) * num_ij * (y_i - y_j)."""
    num = _student_t_numerators(y)
    q = num / num.sum()
    pq = (p - q) * num
    return 4.0 * (pq.sum(axis=1)[:, None] * y - pq @ y)


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P || Q) in nats over the off-diagonal entries; 0 * log(0) = 0."""
    num = _student_t_numerators(y)
    q = num / num.sum()
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def lloyd_iteration(x: np.ndarray, centroids: np.ndarray):
    """One assignment-plus-update sweep.

    Returns (labels, new_centroids, inertia) where inertia is measured with
    the centroids used for the assignment, and a cluster that lost all its
    points keeps its previous centroid.
    """
    diff = x[:, None, :] - centroids[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(x.shape[0]), labels].sum())
    new_centroids = centroids.copy()
    for j in range(centroids.shape[0]):
        members = x[labels == j]
        if members.shape[0]:
            new_centroids[j] = members.mean(axis=0)
    return labels.astype(np.int64), new_centroids, inertia

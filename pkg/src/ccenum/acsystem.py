"""Mutual-distance (Albouy-Chenciner) form of the central configuration equations.

With ``S_ij = r_ij**-(alpha+2) - 1/M`` (``S_ii = 0``), a configuration is a
central configuration with multiplier 1 iff for every pair ``i < j``

    f_ij = sum_k m_k [S_ik (r_jk^2 - r_ik^2 - r_ij^2) + S_jk (r_ik^2 - r_jk^2 - r_ij^2)] = 0.

The matrix form uses ``A_ij = m_i S_ij`` (zero column sums) and
``B_ij = -|q_i - q_j|^2 / 2``; the symmetric matrix ``B A + A^T B`` vanishes
as a bilinear form on zero-sum vectors, so the residual returned here is
that matrix compressed by the centering projector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PotentialParams, as_points, check_collision, pair_indices

__all__ = [
    "ABPair",
    "distances_of",
    "distance_matrix",
    "s_matrix",
    "ac_residual",
    "ab_matrices",
    "ac_matrix_residual",
]


@dataclass(frozen=True)
class ABPair:
    A: np.ndarray
    B: np.ndarray


def distances_of(config) -> np.ndarray:
    """Pairwise distances ``r_ij`` for ``i < j`` in lexicographic order."""
    q = as_points(config)
    iu = np.triu_indices(q.shape[0], 1)
    d = q[iu[1]] - q[iu[0]]
    return np.hypot(d[:, 0], d[:, 1])


def distance_matrix(distances, n: int) -> np.ndarray:
    """Symmetric ``n x n`` matrix from a lexicographic distance vector."""
    distances = np.asarray(distances, dtype=float)
    if distances.shape != (n * (n - 1) // 2,):
        raise ValueError(f"expected {n * (n - 1) // 2} distances, got {distances.shape}")
    if np.any(distances <= 0) or not np.all(np.isfinite(distances)):
        raise ValueError("distances must be finite and strictly positive")
    r = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    r[iu] = distances
    return r + r.T


def s_matrix(params: PotentialParams, distances) -> np.ndarray:
    r = distance_matrix(distances, params.n)
    eye = np.eye(params.n, dtype=bool)
    s = np.where(eye, 1.0, r) ** -(params.alpha + 2.0) - 1.0 / params.total_mass
    return np.where(eye, 0.0, s)


def ac_residual(params: PotentialParams, distances) -> np.ndarray:
    """The ``n(n-1)/2`` mutual-distance equations ``f_ij``, pairs in lexicographic order."""
    n = params.n
    r = distance_matrix(distances, n)
    s = s_matrix(params, distances)
    r2 = r**2
    m = params.m
    out = np.empty(n * (n - 1) // 2)
    for p, (i, j) in enumerate(pair_indices(n)):
        t1 = s[i] * (r2[j] - r2[i] - r2[i, j])
        t2 = s[j] * (r2[i] - r2[j] - r2[i, j])
        out[p] = np.dot(m, t1 + t2)
    return out


def ab_matrices(params: PotentialParams, config) -> ABPair:
    q = as_points(config, params.n)
    r = check_collision(q)
    iu = np.triu_indices(params.n, 1)
    s = s_matrix(params, r[iu])
    a = params.m[:, None] * s
    a[np.diag_indices(params.n)] = -a.sum(axis=0)
    b = -0.5 * r**2
    return ABPair(A=a, B=b)


def ac_matrix_residual(pair: ABPair) -> np.ndarray:
    a, b = pair.A, pair.B
    n = a.shape[0]
    p = np.eye(n) - 1.0 / n
    z = b @ a + a.T @ b
    return p @ z @ p

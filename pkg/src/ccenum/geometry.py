"""Planar configurations under a homogeneous interaction of degree -alpha.

Conventions used throughout the package:

* ``U_alpha = sum_{i<j} m_i m_j / r_ij**alpha`` for ``alpha > 0`` and
  ``U_0 = sum_{i<j} m_i m_j log r_ij``; the physical potential is ``-U_alpha``.
* The normalized central configuration residual is

      R_i = sum_{j != i} m_j (q_j - q_i) / r_ij**(alpha + 2) + q_i

  which vanishes exactly at central configurations with multiplier 1 and
  center of mass at the origin.
* The action ``G = Phi_alpha + 1/2 sum_i m_i |q_i|^2`` with
  ``Phi_alpha = U_alpha / alpha`` (``alpha > 0``) and ``Phi_0 = -U_0`` has
  gradient ``grad_i G = m_i R_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "CollisionError",
    "NormalizationError",
    "PotentialParams",
    "as_points",
    "check_collision",
    "potential",
    "inertia",
    "center_of_mass",
    "cc_residual",
    "action_value",
    "action_gradient",
    "cc_hessian",
    "cc_jacobian",
    "lambda_of",
    "normalize_lambda",
    "pair_indices",
    "rotation_generator",
]

# relative to the configuration diameter
COLLISION_RATIO = 1e-10


class CollisionError(ValueError):
    """Raised when two bodies (nearly) coincide."""


class NormalizationError(ValueError):
    """Raised when a configuration cannot be dilated to multiplier 1."""


@dataclass(frozen=True)
class PotentialParams:
    """Homogeneity degree and masses (or vortex circulations).

    Masses may be negative but never zero, and their sum must be nonzero.
    """

    alpha: float
    masses: tuple[float, ...]

    def __init__(self, alpha: float, masses: Sequence[float]):
        alpha = float(alpha)
        masses = tuple(float(m) for m in masses)
        if not np.isfinite(alpha) or alpha < 0:
            raise ValueError(f"alpha must be a finite number >= 0, got {alpha}")
        if len(masses) < 2:
            raise ValueError("need at least two bodies")
        for i, m in enumerate(masses):
            if m == 0 or not np.isfinite(m):
                raise ValueError(f"mass must be nonzero (body {i + 1} has mass {m})")
        if sum(masses) == 0:
            raise ValueError("sum of masses must be nonzero")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "masses", masses)

    @property
    def n(self) -> int:
        return len(self.masses)

    @property
    def m(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))

    @property
    def positive(self) -> bool:
        return all(m > 0 for m in self.masses)

    def with_alpha(self, alpha: float) -> "PotentialParams":
        return PotentialParams(alpha, self.masses)


def pair_indices(n: int) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` with ``i < j`` in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def as_points(config, n: int | None = None) -> np.ndarray:
    q = np.array(config, dtype=float)
    if q.ndim == 1 and q.size % 2 == 0:
        q = q.reshape(-1, 2)
    if q.ndim != 2 or q.shape[1] != 2:
        raise ValueError(f"configuration must have shape (n, 2), got {q.shape}")
    if n is not None and q.shape[0] != n:
        raise ValueError(f"configuration has {q.shape[0]} bodies, expected {n}")
    if not np.all(np.isfinite(q)):
        raise ValueError("configuration contains non-finite coordinates")
    return q


def _pairwise(q: np.ndarray):
    # d[..., i, j, :] = q_j - q_i
    d = q[..., None, :, :] - q[..., :, None, :]
    r = np.sqrt(np.einsum("...k,...k->...", d, d))
    return d, r


def check_collision(q: np.ndarray) -> np.ndarray:
    """Return the pairwise distance matrix, raising on (near-)collision."""
    _, r = _pairwise(q)
    n = q.shape[0]
    diam = r.max()
    off = r[~np.eye(n, dtype=bool)]
    if diam == 0 or off.min() <= COLLISION_RATIO * diam:
        raise CollisionError("configuration lies in the collision set")
    return r


def _inv_power(r: np.ndarray, p: float) -> np.ndarray:
    """``r**-p`` off the diagonal, zero on it (works on stacked matrices)."""
    n = r.shape[-1]
    eye = np.eye(n, dtype=bool)
    w = np.where(eye, 1.0, r) ** (-p)
    return np.where(eye, 0.0, w)


def potential(params: PotentialParams, config) -> float:
    """``U_alpha`` (the physical potential is its negative)."""
    q = as_points(config, params.n)
    r = check_collision(q)
    m = params.m
    iu = np.triu_indices(params.n, 1)
    mm = np.outer(m, m)[iu]
    if params.alpha == 0:
        return float(np.sum(mm * np.log(r[iu])))
    return float(np.sum(mm * r[iu] ** (-params.alpha)))


def center_of_mass(params: PotentialParams, config) -> np.ndarray:
    q = as_points(config, params.n)
    m = params.m
    return m @ q / m.sum()


def inertia(params: PotentialParams, config) -> float:
    """Moment of inertia about the center of mass."""
    q = as_points(config, params.n)
    c = center_of_mass(params, q)
    return float(np.sum(params.m * np.sum((q - c) ** 2, axis=1)))


def batch_residual(q: np.ndarray, m: np.ndarray, alpha: float) -> np.ndarray:
    """Residual for stacked configurations of shape ``(..., n, 2)``."""
    d, r = _pairwise(q)
    w = _inv_power(r, alpha + 2.0) * m
    return np.einsum("...ij,...ijk->...ik", w, d) + q


def batch_hessian(q: np.ndarray, m: np.ndarray, alpha: float) -> np.ndarray:
    """Hessian of the action for stacked configurations, shape ``(..., 2n, 2n)``."""
    n = q.shape[-2]
    d, r = _pairwise(q)
    eye = np.eye(n, dtype=bool)
    w = _inv_power(r, alpha + 2.0) * np.outer(m, m)
    rsafe = np.where(eye, 1.0, r)
    u = d / rsafe[..., None]
    blocks = w[..., None, None] * (
        np.eye(2) - (alpha + 2.0) * u[..., :, None] * u[..., None, :]
    )
    diag = m[:, None, None] * np.eye(2) - blocks.sum(axis=-3)
    idx = np.arange(n)
    blocks[..., idx, idx, :, :] = diag
    # (..., i, j, a, b) -> (..., i, a, j, b)
    h = np.swapaxes(blocks, -3, -2)
    return h.reshape(q.shape[:-2] + (2 * n, 2 * n))


def cc_residual(params: PotentialParams, config) -> np.ndarray:
    """Normalized CC residual as a flat ``2n`` vector ``(R_1x, R_1y, ...)``."""
    q = as_points(config, params.n)
    check_collision(q)
    return batch_residual(q, params.m, params.alpha).ravel()


def action_value(params: PotentialParams, config) -> float:
    q = as_points(config, params.n)
    u = potential(params, q)
    phi = -u if params.alpha == 0 else u / params.alpha
    return float(phi + 0.5 * np.sum(params.m * np.sum(q**2, axis=1)))


def action_gradient(params: PotentialParams, config) -> np.ndarray:
    return np.repeat(params.m, 2) * cc_residual(params, config)


def cc_hessian(params: PotentialParams, config) -> np.ndarray:
    q = as_points(config, params.n)
    check_collision(q)
    h = batch_hessian(q, params.m, params.alpha)
    return 0.5 * (h + h.T)


def cc_jacobian(params: PotentialParams, config) -> np.ndarray:
    """Jacobian of :func:`cc_residual`, i.e. the Hessian with block rows divided by ``m_i``."""
    return cc_hessian(params, config) / np.repeat(params.m, 2)[:, None]


def rotation_generator(config) -> np.ndarray:
    """Infinitesimal rotation ``(q_1^perp, ..., q_n^perp)`` as a flat vector."""
    q = as_points(config)
    return np.column_stack([-q[:, 1], q[:, 0]]).ravel()


def lambda_of(params: PotentialParams, config) -> float:
    """Multiplier of a (near) central configuration.

    Dotting the CC equation with ``m_i (q_i - c)`` and summing gives
    ``lambda = sum_{i<j} m_i m_j r_ij**-alpha / I`` for every ``alpha >= 0``.
    """
    q = as_points(config, params.n)
    r = check_collision(q)
    iu = np.triu_indices(params.n, 1)
    m = params.m
    num = float(np.sum(np.outer(m, m)[iu] * r[iu] ** (-params.alpha)))
    inert = inertia(params, q)
    if inert == 0 or not np.isfinite(inert):
        raise NormalizationError("inertia vanishes; multiplier undefined")
    return num / inert


def normalize_lambda(params: PotentialParams, config) -> np.ndarray:
    """Center at the origin and dilate so the multiplier becomes 1."""
    q = as_points(config, params.n)
    lam = lambda_of(params, q)
    if lam <= 0:
        raise NormalizationError(f"multiplier {lam:.6g} is not positive; cannot dilate to 1")
    s = lam ** (1.0 / (params.alpha + 2.0))
    return s * (q - center_of_mass(params, q))

"""Canonical forms, class fingerprints and Hessian-based non-degeneracy verdicts.

Classes are counted modulo translation, rotation and dilation. Mirror images
and relabelings are distinct classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import acsystem, geometry
from .geometry import PotentialParams, as_points

__all__ = [
    "Fingerprint",
    "HessianSummary",
    "CentralConfigClass",
    "PreconditionError",
    "InconsistentSpectrumError",
    "canonicalize",
    "fingerprint",
    "same_class",
    "classify_degeneracy",
    "make_class",
]

DEDUP_TOL = 1e-6
# a triple counts as affinely independent above this fraction of diameter**2
AREA_TOL = 1e-8
# snapping thresholds that make canonicalize idempotent bit-for-bit
_SNAP = 1e-13


class PreconditionError(ValueError):
    """Input is not a multiplier-1 central configuration."""


class InconsistentSpectrumError(RuntimeError):
    """Hessian spectrum does not resolve the rotation zero mode."""


@dataclass(frozen=True)
class Fingerprint:
    distances: tuple[float, ...]
    orientation: int

    def sort_key(self):
        # quantized so symmetric ties (equal distances) order the same way in every run
        return (self.orientation, tuple(round(d, 8) for d in self.distances), self.distances)


@dataclass(frozen=True)
class HessianSummary:
    eigenvalues: tuple[float, ...]
    kernel_dim: int
    min_nonzero: float
    gap: float
    full_index: int
    reduced_index: int | None

    @property
    def nondegenerate(self) -> bool:
        return self.kernel_dim == 1


@dataclass
class CentralConfigClass:
    id: int
    params: PotentialParams
    points: np.ndarray
    fingerprint: Fingerprint
    lam: float
    residual_inf: float
    ac_residual_inf: float
    matrix_residual_fro: float
    hessian: HessianSummary
    hits: int = 1

    @property
    def nondegenerate(self) -> bool:
        return self.hessian.nondegenerate

    @property
    def kernel_dim(self) -> int:
        return self.hessian.kernel_dim

    @property
    def full_index(self) -> int:
        return self.hessian.full_index

    @property
    def reduced_index(self) -> int | None:
        return self.hessian.reduced_index

    @property
    def orientation(self) -> int:
        return self.fingerprint.orientation

    @property
    def collinear(self) -> bool:
        return self.fingerprint.orientation == 0


def canonicalize(params: PotentialParams, config) -> np.ndarray:
    """Multiplier 1, center of mass at the origin, farthest body on the positive x-axis.

    Ties for the farthest body (within 1e-9 relative) go to the lowest index.
    """
    q = as_points(config, params.n)
    lam = geometry.lambda_of(params, q)
    if lam <= 0:
        raise geometry.NormalizationError(f"multiplier {lam:.6g} is not positive")
    s = lam ** (1.0 / (params.alpha + 2.0))
    if abs(s - 1.0) > _SNAP:
        q = s * q
    c = geometry.center_of_mass(params, q)
    scale = np.abs(q).max()
    if np.abs(c).max() > _SNAP * scale:
        q = q - c
    rad = np.hypot(q[:, 0], q[:, 1])
    k = int(np.flatnonzero(rad >= rad.max() * (1 - 1e-9))[0])
    cos, sin = q[k] / rad[k]
    if abs(sin) > _SNAP or cos < 0:
        rot = np.array([[cos, sin], [-sin, cos]])
        q = q @ rot.T
        q[k] = (rad[k], 0.0)
    return q


def _orientation(q: np.ndarray) -> int:
    n = q.shape[0]
    diam2 = max(float(np.max(np.sum((q[:, None] - q[None]) ** 2, axis=-1))), 1e-300)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b = q[j] - q[i], q[k] - q[i]
                area = 0.5 * (a[0] * b[1] - a[1] * b[0])
                if abs(area) > AREA_TOL * diam2:
                    return 1 if area > 0 else -1
    return 0


def fingerprint(params: PotentialParams, config) -> Fingerprint:
    q = as_points(config, params.n)
    return Fingerprint(
        distances=tuple(float(x) for x in acsystem.distances_of(q)),
        orientation=_orientation(q),
    )


def same_class(f1: Fingerprint, f2: Fingerprint, tol: float = DEDUP_TOL) -> bool:
    if f1.orientation != f2.orientation or len(f1.distances) != len(f2.distances):
        return False
    return float(np.max(np.abs(np.subtract(f1.distances, f2.distances)))) < tol


def _shape_basis(params: PotentialParams, q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of variations keeping the center and the inertia fixed."""
    m = params.m
    n = params.n
    constraints = np.zeros((3, 2 * n))
    constraints[0, 0::2] = m
    constraints[1, 1::2] = m
    constraints[2] = (m[:, None] * q).ravel()
    _, _, vt = np.linalg.svd(constraints)
    return vt[3:].T


def classify_degeneracy(params: PotentialParams, config, tol_zero: float = 1e-7) -> HessianSummary:
    """Spectrum census of the action Hessian at a multiplier-1 central configuration.

    ``tol_zero`` is relative to the largest eigenvalue magnitude. The reduced
    index is the Morse index on the shape space (variations with fixed center
    and inertia); it is reported for all-positive masses only.
    """
    q = as_points(config, params.n)
    res = float(np.abs(geometry.cc_residual(params, q)).max())
    lam = geometry.lambda_of(params, q)
    scale = max(1.0, float(np.abs(q).max()))
    if abs(lam - 1.0) > 1e-6 or res > 1e-6 * scale:
        raise PreconditionError(
            f"not a multiplier-1 central configuration (lambda={lam:.12g}, residual={res:.3g})"
        )
    h = geometry.cc_hessian(params, q)
    evals, evecs = np.linalg.eigh(h)
    thresh = tol_zero * float(np.abs(evals).max())
    zero = np.abs(evals) < thresh
    kernel_dim = int(zero.sum())
    if kernel_dim == 0:
        raise InconsistentSpectrumError("no zero eigenvalue; rotation mode not resolved")
    rot = geometry.rotation_generator(q)
    rot /= np.linalg.norm(rot)
    kern = evecs[:, zero]
    leak = float(np.linalg.norm(rot - kern @ (kern.T @ rot)))
    if leak > 1e-6:
        raise InconsistentSpectrumError(f"rotation generator outside the numeric kernel ({leak:.3g})")
    mags = np.sort(np.abs(evals))
    # drop the one rotation mode; the next magnitude is the distance to degeneracy
    gap = float(mags[1])
    nonzero = np.abs(evals[~zero])
    min_nonzero = float(nonzero.min()) if nonzero.size else 0.0
    full_index = int(np.sum(evals < -thresh))
    reduced = None
    if params.positive:
        basis = _shape_basis(params, q)
        hs = basis.T @ h @ basis
        reduced = int(np.sum(np.linalg.eigvalsh(0.5 * (hs + hs.T)) < -thresh))
    return HessianSummary(
        eigenvalues=tuple(float(e) for e in evals),
        kernel_dim=kernel_dim,
        min_nonzero=min_nonzero,
        gap=gap,
        full_index=full_index,
        reduced_index=reduced,
    )


def make_class(params: PotentialParams, config, hits: int = 1, id: int = 0) -> CentralConfigClass:
    """Canonicalize a converged configuration and attach residuals and the Hessian census."""
    q = canonicalize(params, config)
    dist = acsystem.distances_of(q)
    pair = acsystem.ab_matrices(params, q)
    return CentralConfigClass(
        id=id,
        params=params,
        points=q,
        fingerprint=fingerprint(params, q),
        lam=geometry.lambda_of(params, q),
        residual_inf=float(np.abs(geometry.cc_residual(params, q)).max()),
        ac_residual_inf=float(np.abs(acsystem.ac_residual(params, dist)).max()),
        matrix_residual_fro=float(np.linalg.norm(acsystem.ac_matrix_residual(pair))),
        hessian=classify_degeneracy(params, q),
        hits=hits,
    )

"""Multi-start search for central configurations.

The core iteration is a damped least-squares (Levenberg-Marquardt) step on
the normalized residual, computed through the SVD of the Jacobian. Singular
values below ``1e-8`` of the largest are dropped, which takes care of the
rotation zero mode without fixing a gauge.

Starts are processed in fixed-size chunks, each a pure function of
``(params, settings, chunk)``, so results do not depend on the number of
worker processes.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import acsystem, geometry
from .classify import (
    CentralConfigClass,
    Fingerprint,
    canonicalize,
    classify_degeneracy,
    fingerprint,
    make_class,
    same_class,
)
from .geometry import PotentialParams, as_points

__all__ = [
    "SolverSettings",
    "Status",
    "RefineResult",
    "EnumerationResult",
    "Track",
    "ContinuationResult",
    "TrackLostError",
    "random_start",
    "refine",
    "multistart",
    "enumerate_classes",
    "canonical_orderings",
    "solve_collinear",
    "continue_family",
    "sweep",
]

CHUNK = 256
AC_TOL = 1e-8
SV_CUTOFF = 1e-8
DEGENERATION_GAP = 1e-6


@dataclass(frozen=True)
class SolverSettings:
    starts: int = 2000
    seed: int = 0
    tol_residual: float = 1e-12
    max_iters: int = 200
    min_separation: float = 1e-8
    max_radius: float = 1e3
    annulus: tuple[float, float] = (0.3, 3.0)
    damping_init: float = 1e-3

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        lo, hi = self.annulus
        if not 0 <= lo < hi:
            raise ValueError("annulus must satisfy 0 <= r_lo < r_hi")
        object.__setattr__(self, "annulus", (float(lo), float(hi)))

    def to_json(self) -> dict:
        return {
            "starts": self.starts,
            "seed": self.seed,
            "tol_residual": self.tol_residual,
            "max_iters": self.max_iters,
            "min_separation": self.min_separation,
            "max_radius": self.max_radius,
            "annulus": list(self.annulus),
            "damping_init": self.damping_init,
        }


class Status(enum.Enum):
    CONVERGED = "converged"
    ITERATION_LIMIT = "iteration-limit"
    COLLISION = "collision-approach"
    DIVERGED = "divergence"


@dataclass
class RefineResult:
    points: np.ndarray | None
    status: Status
    iterations: int
    residual: float

    @property
    def ok(self) -> bool:
        return self.status is Status.CONVERGED


def random_start(n, seed, index=0, annulus=(0.3, 3.0), masses=None, recenter=True) -> np.ndarray:
    """Random points in an annulus, recentered on the center of mass.

    The stream is keyed on ``(seed, index)`` so any start can be regenerated alone.
    """
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    lo, hi = annulus
    rad = rng.uniform(lo, hi, size=n)
    ang = rng.uniform(0.0, 2.0 * np.pi, size=n)
    q = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    if not recenter:
        return q
    m = np.ones(n) if masses is None else np.asarray(masses, dtype=float)
    return q - (m @ q) / m.sum()


def _min_sep_and_radius(q: np.ndarray):
    d = q[..., None, :, :] - q[..., :, None, :]
    r = np.sqrt(np.sum(d * d, axis=-1))
    n = q.shape[-2]
    r = np.where(np.eye(n, dtype=bool), np.inf, r)
    return r.min(axis=(-2, -1)), np.sqrt(np.sum(q * q, axis=-1)).max(axis=-1)


def _lm_batch(q0: np.ndarray, m: np.ndarray, alpha: float, settings: SolverSettings):
    """Damped least squares on a stack of starts. Returns (points, status codes, iterations, residual)."""
    q = np.array(q0, dtype=float)
    k, n, _ = q.shape
    status = np.full(k, -1)  # -1 active, else index into _CODES
    iters = np.zeros(k, dtype=int)
    mu = np.full(k, settings.damping_init)
    minv = np.repeat(1.0 / m, 2)
    with np.errstate(all="ignore"):
        res = geometry.batch_residual(q, m, alpha).reshape(k, 2 * n)
        norm2 = np.sqrt(np.sum(res * res, axis=1))
        for it in range(settings.max_iters + 1):
            act = np.flatnonzero(status < 0)
            if act.size == 0:
                break
            done = np.max(np.abs(res[act]), axis=1) < settings.tol_residual
            status[act[done]] = 0
            act = act[~done]
            if act.size == 0 or it == settings.max_iters:
                break
            iters[act] += 1
            jac = geometry.batch_hessian(q[act], m, alpha) * minv[:, None]
            u, s, vt = np.linalg.svd(jac)
            smax = s[:, :1]
            lm = mu[act, None] * smax**2
            f = np.where(s > SV_CUTOFF * smax, s / (s * s + lm), 0.0)
            coef = f * np.einsum("kji,kj->ki", u, res[act])
            step = -np.einsum("kji,kj->ki", vt, coef).reshape(-1, n, 2)
            trial = q[act] + step
            tres = geometry.batch_residual(trial, m, alpha).reshape(-1, 2 * n)
            tnorm = np.sqrt(np.sum(tres * tres, axis=1))
            good = np.isfinite(tnorm) & (tnorm < norm2[act])
            acc = act[good]
            q[acc] = trial[good]
            res[acc] = tres[good]
            norm2[acc] = tnorm[good]
            mu[acc] = np.maximum(mu[acc] * 0.2, 1e-15)
            rej = act[~good]
            mu[rej] *= 10.0
            if acc.size:
                sep, rad = _min_sep_and_radius(q[acc])
                status[acc[sep < settings.min_separation]] = 2
                status[acc[(rad > settings.max_radius) & (status[acc] < 0)]] = 3
            status[rej[mu[rej] > 1e12]] = 3
    status[status < 0] = 1
    resinf = np.max(np.abs(res), axis=1)
    return q, status, iters, resinf


_CODES = (Status.CONVERGED, Status.ITERATION_LIMIT, Status.COLLISION, Status.DIVERGED)


def refine(params: PotentialParams, config0, settings: SolverSettings | None = None) -> RefineResult:
    """Drive the normalized residual below ``tol_residual`` from ``config0``."""
    settings = settings or SolverSettings()
    q0 = as_points(config0, params.n)
    sep, _ = _min_sep_and_radius(q0)
    if sep <= settings.min_separation:
        raise geometry.CollisionError("start configuration is too close to a collision")
    q, status, iters, resinf = _lm_batch(q0[None], params.m, params.alpha, settings)
    st = _CODES[status[0]]
    return RefineResult(
        points=q[0] if st is Status.CONVERGED else None,
        status=st,
        iterations=int(iters[0]),
        residual=float(resinf[0]),
    )


@dataclass
class EnumerationResult:
    params: PotentialParams
    settings: SolverSettings
    classes: list[CentralConfigClass]
    failures: dict[str, int] = field(default_factory=dict)

    @property
    def converged(self) -> int:
        return sum(c.hits for c in self.classes)


def _run_chunk(task):
    alpha, masses, settings, lo, hi = task
    params = PotentialParams(alpha, masses)
    m = params.m
    starts = np.stack(
        [random_start(params.n, settings.seed, i, settings.annulus, m) for i in range(lo, hi)]
    )
    q, status, _, _ = _lm_batch(starts, m, alpha, settings)
    found = []
    failures: dict[str, int] = {}
    for off in range(hi - lo):
        st = _CODES[status[off]]
        if st is not Status.CONVERGED:
            failures[st.value] = failures.get(st.value, 0) + 1
            continue
        try:
            c = canonicalize(params, q[off])
            ok = (
                np.abs(geometry.cc_residual(params, c)).max() < settings.tol_residual
                and np.abs(acsystem.ac_residual(params, acsystem.distances_of(c))).max() < AC_TOL
            )
        except (geometry.CollisionError, geometry.NormalizationError):
            ok = False
        if not ok:
            failures["rejected"] = failures.get("rejected", 0) + 1
            continue
        found.append((lo + off, c))
    return found, failures


def _chunks(params: PotentialParams, settings: SolverSettings):
    return [
        (params.alpha, params.masses, settings, lo, min(lo + CHUNK, settings.starts))
        for lo in range(0, settings.starts, CHUNK)
    ]


def _map(func, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


def merge_classes(params: PotentialParams, found) -> list[CentralConfigClass]:
    """Deterministic fold of ``(start index, canonical points)`` pairs into sorted classes."""
    reps: list[tuple[Fingerprint, np.ndarray, int]] = []
    for _, q in sorted(found, key=lambda t: t[0]):
        fp = fingerprint(params, q)
        for slot, (rfp, rq, hits) in enumerate(reps):
            if same_class(fp, rfp):
                reps[slot] = (rfp, rq, hits + 1)
                break
        else:
            reps.append((fp, q, 1))
    reps.sort(key=lambda t: t[0].sort_key())
    return [make_class(params, q, hits=hits, id=i + 1) for i, (_, q, hits) in enumerate(reps)]


def multistart(params: PotentialParams, settings: SolverSettings, workers: int = 1) -> EnumerationResult:
    results = _map(_run_chunk, _chunks(params, settings), workers)
    found = []
    failures: dict[str, int] = {}
    for f, fail in results:
        found.extend(f)
        for key, v in fail.items():
            failures[key] = failures.get(key, 0) + v
    classes = merge_classes(params, found)
    return EnumerationResult(params, settings, classes, dict(sorted(failures.items())))


def enumerate_classes(
    params: PotentialParams, settings: SolverSettings, workers: int = 1
) -> list[CentralConfigClass]:
    return multistart(params, settings, workers).classes


def default_workers() -> int:
    env = os.environ.get("CCENUM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --- collinear configurations -------------------------------------------------


def canonical_orderings(n: int) -> list[tuple[int, ...]]:
    """Orderings of ``0..n-1`` modulo reversal (first label smaller than last)."""
    if n == 2:
        return [(0, 1)]
    return [p for p in itertools.permutations(range(n)) if p[0] < p[-1]]


def _collinear_residual(x, m, alpha):
    d = x[None, :] - x[:, None]
    n = x.size
    eye = np.eye(n, dtype=bool)
    ad = np.where(eye, 1.0, np.abs(d))
    w = np.where(eye, 0.0, ad ** -(alpha + 2.0)) * m
    res = np.sum(w * d, axis=1) + x
    jac = -(alpha + 1.0) * w
    jac[np.diag_indices(n)] = 1.0 + (alpha + 1.0) * w.sum(axis=1)
    return res, jac


def solve_collinear(
    params: PotentialParams,
    ordering,
    settings: SolverSettings | None = None,
    start=None,
) -> RefineResult:
    """Collinear central configuration with bodies along the x-axis in ``ordering``.

    Unknowns are the leftmost position and the logarithms of consecutive gaps,
    which keeps the ordering fixed during the iteration. ``start`` optionally
    gives initial positions (in ordering order).
    """
    settings = settings or SolverSettings()
    n = params.n
    order = tuple(int(i) for i in ordering)
    if sorted(order) != list(range(n)):
        raise ValueError(f"ordering must be a permutation of 0..{n - 1}")
    m = params.m[list(order)]
    if start is None:
        size = abs(params.total_mass) ** (1.0 / (params.alpha + 2.0))
        start = np.linspace(-size, size, n)
    x = np.asarray(start, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("start positions must be strictly increasing")
    theta = np.concatenate([[x[0]], np.log(np.diff(x))])
    lower = np.tril(np.ones((n, n)))

    def positions(th):
        return th[0] + np.concatenate([[0.0], np.cumsum(np.exp(th[1:]))])

    mu = settings.damping_init
    res, jac = _collinear_residual(x, m, params.alpha)
    norm = np.linalg.norm(res)
    status = Status.ITERATION_LIMIT
    it = 0
    with np.errstate(all="ignore"):
        for it in range(settings.max_iters + 1):
            if np.abs(res).max() < settings.tol_residual:
                status = Status.CONVERGED
                break
            if it == settings.max_iters:
                break
            dx = lower * np.concatenate([[1.0], np.exp(theta[1:])])[None, :]
            jt = jac @ dx
            u, s, vt = np.linalg.svd(jt)
            f = np.where(s > SV_CUTOFF * s[0], s / (s * s + mu * s[0] ** 2), 0.0)
            trial = theta - vt.T @ (f * (u.T @ res))
            tx = positions(trial)
            tres, tjac = _collinear_residual(tx, m, params.alpha)
            tnorm = np.linalg.norm(tres)
            if np.isfinite(tnorm) and tnorm < norm:
                theta, x, res, jac, norm = trial, tx, tres, tjac, tnorm
                mu = max(mu * 0.2, 1e-15)
                if np.min(np.diff(x)) < settings.min_separation:
                    status = Status.COLLISION
                    break
                if np.abs(x).max() > settings.max_radius:
                    status = Status.DIVERGED
                    break
            else:
                mu *= 10.0
                if mu > 1e12:
                    status = Status.DIVERGED
                    break
    resinf = float(np.abs(res).max())
    if status is not Status.CONVERGED:
        return RefineResult(None, status, it, resinf)
    q = np.zeros((n, 2))
    q[list(order), 0] = x
    return RefineResult(q, status, it, resinf)


# --- continuation in alpha ----------------------------------------------------


class TrackLostError(RuntimeError):
    """Natural-parameter continuation could not advance even with the smallest step."""

    def __init__(self, alpha: float, message: str):
        super().__init__(message)
        self.alpha = alpha


@dataclass
class Track:
    class_id: int
    alphas: list[float] = field(default_factory=list)
    fingerprints: list[Fingerprint] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)
    points: list[np.ndarray] = field(default_factory=list)
    lost_at: float | None = None


@dataclass
class ContinuationResult:
    alphas: list[float]
    counts: list[int]
    tracks: list[Track]
    events: list[tuple[float, int, float]]


def _grid(alpha_lo: float, alpha_hi: float, steps: int) -> list[float]:
    if alpha_hi < alpha_lo:
        raise ValueError("alpha_hi must be >= alpha_lo")
    if alpha_hi == alpha_lo:
        return [float(alpha_lo)]
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return [float(a) for a in np.linspace(alpha_lo, alpha_hi, steps + 1)]


def _advance(params, q, a_from, a_to, settings, min_step):
    """Move a converged configuration from ``a_from`` to ``a_to`` with step halving."""
    cur_a, cur_q = a_from, q
    h = a_to - a_from
    while cur_a < a_to:
        h = min(h, a_to - cur_a)
        nxt = a_to if cur_a + h >= a_to else cur_a + h
        p = params.with_alpha(nxt)
        try:
            pred = geometry.normalize_lambda(p, cur_q)
            out = refine(p, pred, settings)
        except (geometry.CollisionError, geometry.NormalizationError):
            out = None
        if out is not None and out.ok:
            sep = float(np.min(acsystem.distances_of(pred)))
            if np.abs(out.points - pred).max() < 0.25 * sep:
                cur_a, cur_q = nxt, out.points
                continue
        h *= 0.5
        if h < min_step * (1 - 1e-12):
            raise TrackLostError(nxt, f"continuation lost the track near alpha={nxt:.6g}")
    return cur_q


def _record(track: Track, params: PotentialParams, q: np.ndarray, alpha: float, events):
    p = params.with_alpha(alpha)
    c = canonicalize(p, q)
    summary = classify_degeneracy(p, c)
    track.alphas.append(alpha)
    track.fingerprints.append(fingerprint(p, c))
    track.gaps.append(summary.gap)
    track.points.append(c)
    if summary.gap < DEGENERATION_GAP:
        events.append((alpha, track.class_id, summary.gap))
    return c


def _distinct(fps: list[Fingerprint]) -> int:
    reps: list[Fingerprint] = []
    for fp in fps:
        if not any(same_class(fp, r) for r in reps):
            reps.append(fp)
    return len(reps)


def continue_family(
    params: PotentialParams,
    class0,
    alpha_lo: float,
    alpha_hi: float,
    steps: int,
    settings: SolverSettings | None = None,
) -> ContinuationResult:
    """Follow one class from ``alpha_lo`` to ``alpha_hi`` on a uniform grid.

    ``class0`` is a :class:`CentralConfigClass` or a configuration converged at
    ``alpha_lo``. Raises :class:`TrackLostError` when step halving bottoms out
    at 1/64 of the grid spacing.
    """
    settings = settings or SolverSettings()
    grid = _grid(alpha_lo, alpha_hi, steps)
    if isinstance(class0, CentralConfigClass):
        q, cid = class0.points, class0.id
    else:
        q, cid = as_points(class0, params.n), 0
    p0 = params.with_alpha(grid[0])
    out = refine(p0, q, settings)
    if not out.ok:
        raise TrackLostError(grid[0], "starting configuration does not converge at alpha_lo")
    q = out.points
    track = Track(class_id=cid)
    events: list[tuple[float, int, float]] = []
    q = _record(track, params, q, grid[0], events)
    min_step = (grid[1] - grid[0]) / 64 if len(grid) > 1 else 0.0
    for a_prev, a_next in zip(grid, grid[1:]):
        q = _advance(params, q, a_prev, a_next, settings, min_step)
        q = _record(track, params, q, a_next, events)
    return ContinuationResult(alphas=grid, counts=[1] * len(grid), tracks=[track], events=events)


def sweep(
    params: PotentialParams,
    classes: list[CentralConfigClass],
    alpha_lo: float,
    alpha_hi: float,
    steps: int,
    settings: SolverSettings | None = None,
) -> ContinuationResult:
    """Continue every class; per-alpha counts are distinct classes among live tracks."""
    grid = _grid(alpha_lo, alpha_hi, steps)
    tracks: list[Track] = []
    events: list[tuple[float, int, float]] = []
    for c in classes:
        try:
            res = continue_family(params, c, alpha_lo, alpha_hi, steps, settings)
            tracks.append(res.tracks[0])
            events.extend(res.events)
        except TrackLostError as exc:
            t = Track(class_id=c.id, lost_at=exc.alpha)
            tracks.append(t)
    counts = []
    for idx, _ in enumerate(grid):
        fps = [t.fingerprints[idx] for t in tracks if len(t.fingerprints) > idx]
        counts.append(_distinct(fps))
    events.sort(key=lambda e: (e[0], e[1]))
    return ContinuationResult(alphas=grid, counts=counts, tracks=tracks, events=events)

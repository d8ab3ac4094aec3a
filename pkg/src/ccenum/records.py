"""Class-record serialization (JSON/CSV) and residual audits of saved records.

Reals are written as decimal strings with 17 significant digits so that a
record reloads bit-exactly; big integers are decimal strings too.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import acsystem, geometry
from .classify import CentralConfigClass
from .geometry import PotentialParams

__all__ = [
    "RecordError",
    "fmt_real",
    "class_record",
    "records_to_csv",
    "parse_record",
    "AuditResult",
    "audit_record",
]

FIELDS = (
    "id",
    "n",
    "alpha",
    "masses",
    "points",
    "distances",
    "lambda",
    "residual_inf",
    "ac_residual_inf",
    "matrix_residual_fro",
    "orientation",
    "kernel_dim",
    "full_index",
    "reduced_index",
    "nondegenerate",
    "hits",
)


class RecordError(ValueError):
    """Malformed class record; ``field`` locates the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def _pair_key(i: int, j: int, n: int) -> str:
    return f"r{i + 1}{j + 1}" if n <= 9 else f"r{i + 1}_{j + 1}"


def class_record(c: CentralConfigClass) -> dict:
    n = c.params.n
    pairs = geometry.pair_indices(n)
    return {
        "id": c.id,
        "n": n,
        "alpha": fmt_real(c.params.alpha),
        "masses": [fmt_real(m) for m in c.params.masses],
        "points": [[fmt_real(x), fmt_real(y)] for x, y in c.points],
        "distances": {
            _pair_key(i, j, n): fmt_real(d) for (i, j), d in zip(pairs, c.fingerprint.distances)
        },
        "lambda": fmt_real(c.lam),
        "residual_inf": fmt_real(c.residual_inf),
        "ac_residual_inf": fmt_real(c.ac_residual_inf),
        "matrix_residual_fro": fmt_real(c.matrix_residual_fro),
        "orientation": c.orientation,
        "kernel_dim": c.kernel_dim,
        "full_index": c.full_index,
        "reduced_index": c.reduced_index,
        "nondegenerate": c.nondegenerate,
        "hits": c.hits,
    }


def records_to_csv(records: list[dict]) -> str:
    """One row per class; masses, points and distances flattened into columns."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if not records:
        writer.writerow(FIELDS)
        return buf.getvalue()
    first = records[0]
    n = first["n"]
    header = []
    for f in FIELDS:
        if f == "masses":
            header += [f"m{i + 1}" for i in range(n)]
        elif f == "points":
            header += [f"{axis}{i + 1}" for i in range(n) for axis in ("x", "y")]
        elif f == "distances":
            header += list(first["distances"])
        else:
            header.append(f)
    writer.writerow(header)
    for rec in records:
        row = []
        for f in FIELDS:
            v = rec[f]
            if f == "masses":
                row += v
            elif f == "points":
                row += [c for pt in v for c in pt]
            elif f == "distances":
                row += list(v.values())
            elif v is None:
                row.append("")
            elif isinstance(v, bool):
                row.append(str(v).lower())
            else:
                row.append(v)
        writer.writerow(row)
    return buf.getvalue()


def _real(value, field: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise RecordError(field, f"expected a real number, got {value!r}") from None
    if not np.isfinite(x):
        raise RecordError(field, "non-finite value")
    return x


def parse_record(rec, where: str = "record") -> tuple[PotentialParams, np.ndarray]:
    """Extract potential parameters and points from a class record."""
    if not isinstance(rec, dict):
        raise RecordError(where, "expected an object")
    for key in ("alpha", "masses", "points"):
        if key not in rec:
            raise RecordError(f"{where}.{key}", "missing field")
    alpha = _real(rec["alpha"], f"{where}.alpha")
    masses_raw = rec["masses"]
    if not isinstance(masses_raw, list):
        raise RecordError(f"{where}.masses", "expected a list")
    masses = [_real(m, f"{where}.masses[{i}]") for i, m in enumerate(masses_raw)]
    pts_raw = rec["points"]
    if not isinstance(pts_raw, list) or len(pts_raw) != len(masses):
        raise RecordError(f"{where}.points", f"expected a list of {len(masses)} [x, y] pairs")
    pts = []
    for i, pt in enumerate(pts_raw):
        if not isinstance(pt, list) or len(pt) != 2:
            raise RecordError(f"{where}.points[{i}]", "expected [x, y]")
        pts.append([_real(v, f"{where}.points[{i}]") for v in pt])
    if "n" in rec and rec["n"] != len(masses):
        raise RecordError(f"{where}.n", f"n={rec['n']} but {len(masses)} masses given")
    try:
        params = PotentialParams(alpha, masses)
    except ValueError as exc:
        raise RecordError(where, str(exc)) from None
    return params, np.array(pts)


@dataclass
class AuditResult:
    id: object
    residual_inf: float
    ac_residual_inf: float
    matrix_residual_fro: float
    lam: float
    passed: bool
    reason: str = ""


def audit_record(
    rec,
    where: str = "record",
    tol_residual: float = 1e-12,
    tol_ac: float = 1e-8,
    tol_matrix: float = 1e-8,
    tol_lambda: float = 1e-8,
) -> AuditResult:
    """Recompute Cartesian, mutual-distance and matrix residuals for one record."""
    params, q = parse_record(rec, where)
    try:
        res = float(np.abs(geometry.cc_residual(params, q)).max())
        ac = float(np.abs(acsystem.ac_residual(params, acsystem.distances_of(q))).max())
        mat = float(np.linalg.norm(acsystem.ac_matrix_residual(acsystem.ab_matrices(params, q))))
        lam = geometry.lambda_of(params, q)
    except (geometry.CollisionError, geometry.NormalizationError) as exc:
        return AuditResult(rec.get("id"), np.inf, np.inf, np.inf, np.nan, False, str(exc))
    reasons = []
    if not res < tol_residual:
        reasons.append(f"residual {res:.3g} >= {tol_residual:g}")
    if not ac < tol_ac:
        reasons.append(f"ac residual {ac:.3g} >= {tol_ac:g}")
    if not mat < tol_matrix:
        reasons.append(f"matrix residual {mat:.3g} >= {tol_matrix:g}")
    if not abs(lam - 1.0) <= tol_lambda:
        reasons.append(f"lambda {lam:.12g} not 1")
    return AuditResult(rec.get("id"), res, ac, mat, lam, not reasons, "; ".join(reasons))

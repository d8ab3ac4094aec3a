"""Exact lower and upper bounds on the number of non-degenerate central configurations."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fewnomial import u_of_n

__all__ = ["BoundsReport", "poincare_polynomial", "lower_bound", "bounds_report"]


@dataclass(frozen=True)
class BoundsReport:
    n: int
    upper: int
    lower: int
    poincare: list[int]

    def to_json(self) -> dict:
        # big integers as decimal strings
        return {
            "n": self.n,
            "upper": str(self.upper),
            "lower": str(self.lower),
            "poincare": [str(c) for c in self.poincare],
        }


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")


def poincare_polynomial(n: int) -> list[int]:
    """Coefficients of ``(1 + t)(1 + 2t)...(1 + (n-1)t)``, constant term first."""
    _check_n(n)
    coeffs = [1]
    for k in range(1, n):
        nxt = coeffs + [0]
        for d in range(len(coeffs)):
            nxt[d + 1] += k * coeffs[d]
        coeffs = nxt
    return coeffs


def lower_bound(n: int) -> int:
    _check_n(n)
    return math.factorial(n) // 2


def bounds_report(n: int) -> BoundsReport:
    _check_n(n)
    report = BoundsReport(n=n, upper=u_of_n(n), lower=lower_bound(n), poincare=poincare_polynomial(n))
    assert report.lower <= report.upper
    return report

"""Polynomial-exponential reformulation of the mutual-distance equations.

Each pair ``i < j`` contributes three variables: the distance ``r_ij``,
``Y_ij`` standing for ``r_ij**-(alpha+2)`` and ``Yt_ij`` standing for
``exp(-z_ij)`` with ``z_ij = -log r_ij``.  The resulting system has one cubic
equation per pair (the mutual-distance equation with ``Y`` substituted) and
one linear equation ``r_ij - Yt_ij = 0`` per pair.  The exponent ``alpha``
never appears in the polynomials; it only enters through the substitution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .geometry import PotentialParams, pair_indices

__all__ = [
    "Poly",
    "FewnomialSystem",
    "build_system",
    "evaluate_system",
    "khovanskii_bound",
    "u_of_n",
]

Monomial = tuple[tuple[int, int], ...]  # sorted (variable index, exponent) pairs


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self.terms: dict[Monomial, Fraction] = {
            mono: Fraction(c) for mono, c in (terms or {}).items() if c != 0
        }

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, index: int) -> "Poly":
        return cls({((index, 1),): Fraction(1)})

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({mono: -c for mono, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly({mono: c * Fraction(other) for mono, c in self.terms.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _mono_mul(m1, m2)
                out[mono] = out.get(mono, Fraction(0)) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e for _, e in mono) for mono in self.terms)

    def evaluate(self, values: np.ndarray) -> float:
        total = 0.0
        for mono, c in self.terms.items():
            t = float(c)
            for v, e in mono:
                t *= values[v] ** e
            total += t
        return total

    def format(self, names: list[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in sorted(self.terms.items(), key=lambda kv: (-_mono_deg(kv[0]), kv[0])):
            factors = [names[v] if e == 1 else f"{names[v]}^{e}" for v, e in mono]
            coef = _format_coef(c)
            if factors and c == 1:
                body = "*".join(factors)
            elif factors and c == -1:
                body = "-" + "*".join(factors)
            else:
                body = "*".join([coef] + factors)
            parts.append(body)
        return " + ".join(parts).replace("+ -", "- ")


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _mono_deg(mono: Monomial) -> int:
    return sum(e for _, e in mono)


def _format_coef(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"({c.numerator}/{c.denominator})"


@dataclass
class FewnomialSystem:
    n: int
    variables: list[str]
    equations: list[Poly]
    degrees: list[int]
    k: int
    pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.equations)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "equations": self.m,
            "degree3": sum(1 for d in self.degrees if d == 3),
            "degree1": sum(1 for d in self.degrees if d == 1),
            "k": self.k,
            "degrees": self.degrees,
            "khovanskii": str(khovanskii_bound(self.degrees, self.k)),
        }

    def dump(self) -> str:
        lines = [f"variables: {', '.join(self.variables)}"]
        for eq in self.equations:
            lines.append(f"0 = {eq.format(self.variables)}")
        lines.append(json.dumps(self.summary()))
        return "\n".join(lines)


def _pair_name(i: int, j: int, n: int) -> str:
    return f"{i + 1}{j + 1}" if n <= 9 else f"{i + 1}_{j + 1}"


def build_system(params: PotentialParams) -> FewnomialSystem:
    n = params.n
    pairs = pair_indices(n)
    npairs = len(pairs)
    slot = {p: t for t, p in enumerate(pairs)}
    names = (
        [f"r{_pair_name(i, j, n)}" for i, j in pairs]
        + [f"Y{_pair_name(i, j, n)}" for i, j in pairs]
        + [f"Yt{_pair_name(i, j, n)}" for i, j in pairs]
    )
    masses = [Fraction(m) for m in params.masses]
    inv_total = 1 / sum(masses)
    zero = Poly()

    def key(a: int, b: int) -> int:
        return slot[(min(a, b), max(a, b))]

    def r2(a: int, b: int) -> Poly:
        return zero if a == b else Poly.var(key(a, b)) ** 2

    def s(a: int, b: int) -> Poly:
        return zero if a == b else Poly.var(npairs + key(a, b)) - Poly.const(inv_total)

    equations: list[Poly] = []
    for i, j in pairs:
        eq = Poly()
        for k in range(n):
            term = s(i, k) * (r2(j, k) - r2(i, k) - r2(i, j))
            term = term + s(j, k) * (r2(i, k) - r2(j, k) - r2(i, j))
            eq = eq + term * masses[k]
        equations.append(eq)
    for t in range(npairs):
        equations.append(Poly.var(t) - Poly.var(2 * npairs + t))
    degrees = [eq.degree for eq in equations]
    return FewnomialSystem(
        n=n, variables=names, equations=equations, degrees=degrees, k=2 * npairs, pairs=pairs
    )


def evaluate_system(system: FewnomialSystem, params: PotentialParams, distances) -> np.ndarray:
    """Evaluate every equation at ``Y = r**-(alpha+2)``, ``Yt = r``."""
    r = np.asarray(distances, dtype=float)
    if r.shape != (len(system.pairs),) or np.any(r <= 0):
        raise ValueError("need one strictly positive distance per pair")
    values = np.concatenate([r, r ** -(params.alpha + 2.0), r])
    return np.array([eq.evaluate(values) for eq in system.equations])


def khovanskii_bound(degrees: Iterable[int], k: int) -> int:
    """``prod(n_i) * (sum(n_i) + 1)**k * 2**(k(k-1)/2)`` as an exact integer."""
    degrees = [int(d) for d in degrees]
    if not degrees or min(degrees) < 1 or k < 0:
        raise ValueError("degrees must be a nonempty list of positive integers and k >= 0")
    return math.prod(degrees) * (sum(degrees) + 1) ** k * 2 ** (k * (k - 1) // 2)


def u_of_n(n: int) -> int:
    """Closed-form upper bound on the number of non-degenerate central configurations."""
    if n < 2:
        raise ValueError("n must be at least 2")
    p = n * (n - 1)
    return 3 ** (p // 2) * (2 * n * n - 2 * n + 1) ** p * 2 ** (p * (p - 1) // 2)

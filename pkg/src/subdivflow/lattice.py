"""Exact lattice arithmetic: multi-indices, dilation matrices and cosets.

Multi-indices are plain tuples of ints.  All rational quantities are
:class:`fractions.Fraction`; nothing in this package ever rounds.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

Rational = Fraction
_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?")
MultiIndex = tuple[int, ...]
IntMatrix = tuple[tuple[int, ...], ...]


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL.fullmatch(text):
            raise ValueError(f"not an exact rational: {value!r}")
        num, sep, den = text.partition("/")
        if sep and int(den) == 0:
            raise ZeroDivisionError("zero denominator")
        return Fraction(text)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def format_rational(value: Fraction) -> str:
    """Render as ``p/q`` (or ``p`` for integers); never as a decimal."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_index(alpha: MultiIndex) -> str:
    return "(" + ",".join(str(a) for a in alpha) + ")"


def unit_vector(s: int, ell: int) -> MultiIndex:
    """The ``ell``-th standard unit vector of Z^s (0-based ``ell``)."""
    return tuple(1 if i == ell else 0 for i in range(s))


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def sub(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a - b for a, b in zip(alpha, beta))


def neg(alpha: MultiIndex) -> MultiIndex:
    return tuple(-a for a in alpha)


def box_points(lo: MultiIndex, hi: MultiIndex) -> list[MultiIndex]:
    """All integer points of the closed box ``lo <= x <= hi``, lexicographic."""
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    return list(itertools.product(*ranges))


def bounding_box(points) -> tuple[MultiIndex, MultiIndex]:
    points = list(points)
    if not points:
        raise ValueError("empty point set has no bounding box")
    lo = tuple(min(c) for c in zip(*points))
    hi = tuple(max(c) for c in zip(*points))
    return lo, hi


def _matmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
        for i in range(len(a))
    )


def _matvec(a, x):
    return tuple(sum(a[i][k] * x[k] for k in range(len(x))) for i in range(len(a)))


def _identity(s: int):
    return tuple(tuple(1 if i == j else 0 for j in range(s)) for i in range(s))


def _det(a) -> int:
    # Bareiss elimination keeps every intermediate integral.
    n = len(a)
    m = [list(row) for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _adjugate(a) -> IntMatrix:
    n = len(a)
    if n == 1:
        return ((1,),)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(a) if k != i]
            adj[j][i] = (-1) ** (i + j) * _det(minor)
    return tuple(tuple(row) for row in adj)


@dataclass(frozen=True)
class DilationMatrix:
    """An expanding integer matrix ``M`` acting on column vectors of Z^s."""

    entries: IntMatrix

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        s = len(rows)
        if s == 0 or any(len(row) != s for row in rows):
            raise ValueError("dilation matrix must be square")
        object.__setattr__(self, "entries", rows)
        if abs(self.det) < 2:
            raise ValueError(f"dilation matrix needs |det| >= 2, got det = {self.det}")
        if not self._is_expanding():
            raise ValueError("dilation matrix is not expanding")

    @classmethod
    def scalar(cls, factor: int, s: int) -> "DilationMatrix":
        return cls(tuple(tuple(factor if i == j else 0 for j in range(s)) for i in range(s)))

    @classmethod
    def from_flat(cls, values, s: int | None = None) -> "DilationMatrix":
        values = [int(v) for v in values]
        if s is None:
            s = math.isqrt(len(values))
        if s * s != len(values):
            raise ValueError(f"dilation needs {s}*{s} entries, got {len(values)}")
        return cls(tuple(tuple(values[i * s:(i + 1) * s]) for i in range(s)))

    @property
    def s(self) -> int:
        return len(self.entries)

    @cached_property
    def det(self) -> int:
        return _det(self.entries)

    @cached_property
    def adjugate(self) -> IntMatrix:
        return _adjugate(self.entries)

    def flat(self) -> list[int]:
        return [x for row in self.entries for x in row]

    def _is_expanding(self) -> bool:
        # rho(M^-1) < 1 iff some power of M^-1 has induced inf-norm < 1.
        d = self.det
        inv = tuple(tuple(Fraction(x, d) for x in row) for row in self.adjugate)
        power = inv
        for _ in range(64):
            if max(sum(abs(x) for x in row) for row in power) < 1:
                return True
            power = _matmul(power, inv)
        return False

    def apply(self, beta: MultiIndex) -> MultiIndex:
        return _matvec(self.entries, beta)

    def power(self, r: int) -> "DilationMatrix":
        if r < 1:
            raise ValueError("only positive powers of a dilation are dilations")
        result = self.entries
        for _ in range(r - 1):
            result = _matmul(result, self.entries)
        return DilationMatrix(result)

    def __str__(self) -> str:
        return ",".join(str(x) for x in self.flat())


def coset_decompose(alpha: MultiIndex, M: DilationMatrix, r: int = 1) -> tuple[MultiIndex, MultiIndex]:
    """Split ``alpha = eps + M^r beta`` with ``eps`` the canonical representative.

    The representative is the unique class member in the half-open
    parallelepiped ``M^r [0,1)^s``: ``beta = floor(M^-r alpha)``.
    """
    P = M if r == 1 else M.power(r)
    det = P.det
    t = _matvec(P.adjugate, alpha)
    if det < 0:
        t, det = tuple(-x for x in t), -det
    beta = tuple(x // det for x in t)
    eps = sub(alpha, P.apply(beta))
    return eps, beta


def coset_representatives(M: DilationMatrix, r: int = 1) -> list[MultiIndex]:
    """Canonical representatives of Z^s / M^r Z^s, sorted lexicographically."""
    if r < 1:
        raise ValueError("level r must be positive")
    P = M if r == 1 else M.power(r)
    lo = tuple(sum(min(0, x) for x in row) for row in P.entries)
    hi = tuple(sum(max(0, x) for x in row) for row in P.entries)
    det = abs(P.det)
    sign = 1 if P.det > 0 else -1
    reps = []
    for x in box_points(lo, hi):
        t = _matvec(P.adjugate, x)
        if all(0 <= sign * ti < det for ti in t):
            reps.append(x)
    assert len(reps) == det
    return reps

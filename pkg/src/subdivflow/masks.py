"""Finitely supported matrix masks and the subdivision operator."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

from .lattice import DilationMatrix, MultiIndex, as_rational, bounding_box, coset_decompose, coset_representatives

Matrix = tuple[tuple[Fraction, ...], ...]
Vector = tuple[Fraction, ...]


def as_matrix(value, n: int, m: int) -> Matrix:
    """Accept a scalar (for 1x1), a flat list, or nested rows."""
    if not isinstance(value, (list, tuple)):
        value = [[value]]
    elif value and not isinstance(value[0], (list, tuple)):
        if len(value) != n * m:
            raise ValueError(f"expected {n * m} matrix entries, got {len(value)}")
        value = [value[i * m:(i + 1) * m] for i in range(n)]
    if len(value) != n or any(len(row) != m for row in value):
        raise ValueError(f"entry is not {n}x{m}")
    return tuple(tuple(as_rational(x) for x in row) for row in value)


def zero_matrix(n: int, m: int) -> Matrix:
    return tuple((Fraction(0),) * m for _ in range(n))


def identity_matrix(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def is_zero(mat) -> bool:
    return all(x == 0 for row in mat for x in row)


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols) for row in a)


def mat_scale(a: Matrix, lam) -> Matrix:
    return tuple(tuple(lam * x for x in row) for row in a)


def mat_abs(a: Matrix) -> Matrix:
    return tuple(tuple(abs(x) for x in row) for row in a)


def mat_vec(a: Matrix, v: Vector) -> Vector:
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


@dataclass(frozen=True)
class Mask:
    """A finitely supported map Z^s -> Q^{n x m} tied to a dilation matrix.

    Explicit zero entries are pruned at construction, so two masks are equal
    exactly when their nonzero entries agree.
    """

    n: int
    m: int
    dilation: DilationMatrix
    entries: Mapping[MultiIndex, Matrix] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        s = self.dilation.s
        for alpha, value in self.entries.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != s:
                raise ValueError(f"index {alpha} is not in Z^{s}")
            mat = as_matrix(value, self.n, self.m)
            if not is_zero(mat):
                clean[alpha] = mat
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def scalar(cls, coefficients: Mapping[MultiIndex, object], dilation: DilationMatrix) -> "Mask":
        return cls(1, 1, dilation, {k: [[v]] for k, v in coefficients.items()})

    @classmethod
    def delta(cls, n: int, dilation: DilationMatrix) -> "Mask":
        return cls(n, n, dilation, {(0,) * dilation.s: identity_matrix(n)})

    @property
    def s(self) -> int:
        return self.dilation.s

    def __getitem__(self, alpha: MultiIndex) -> Matrix:
        return self.entries.get(tuple(alpha), zero_matrix(self.n, self.m))

    def support(self) -> list[MultiIndex]:
        return list(self.entries)

    def support_box(self) -> tuple[MultiIndex, MultiIndex]:
        return bounding_box(self.entries)

    def scaled(self, lam) -> "Mask":
        lam = as_rational(lam)
        return Mask(self.n, self.m, self.dilation, {k: mat_scale(v, lam) for k, v in self.entries.items()})

    def with_dilation(self, dilation: DilationMatrix) -> "Mask":
        return Mask(self.n, self.m, dilation, self.entries)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for v in self.entries.values() for row in v for x in row)


@dataclass(frozen=True)
class Sequence:
    """A finitely supported vector sequence Z^s -> Q^n."""

    s: int
    n: int
    entries: Mapping[MultiIndex, Vector] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for alpha, value in self.entries.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.s:
                raise ValueError(f"index {alpha} is not in Z^{self.s}")
            if not isinstance(value, (list, tuple)):
                value = (value,)
            vec = tuple(as_rational(x) for x in value)
            if len(vec) != self.n:
                raise ValueError(f"entry at {alpha} is not an {self.n}-vector")
            if any(x != 0 for x in vec):
                clean[alpha] = vec
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def unit(cls, s: int, n: int, at: MultiIndex, component: int = 0) -> "Sequence":
        vec = [0] * n
        vec[component] = 1
        return cls(s, n, {tuple(at): vec})

    def __getitem__(self, alpha: MultiIndex) -> Vector:
        return self.entries.get(tuple(alpha), (Fraction(0),) * self.n)

    def __add__(self, other: "Sequence") -> "Sequence":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = tuple(x + y for x, y in zip(out.get(k, (0,) * self.n), v))
        return Sequence(self.s, self.n, out)

    def scaled(self, lam) -> "Sequence":
        lam = as_rational(lam)
        return Sequence(self.s, self.n, {k: tuple(lam * x for x in v) for k, v in self.entries.items()})


def apply_subdivision(A: Mask, c: Sequence) -> Sequence:
    """``(S_A c)(alpha) = sum_beta A(alpha - M beta) c(beta)``."""
    if A.m != c.n or A.s != c.s:
        raise ValueError(f"mask of size {A.n}x{A.m} on Z^{A.s} cannot act on {c.n}-vectors on Z^{c.s}")
    out: dict[MultiIndex, list[Fraction]] = {}
    M = A.dilation
    for beta, vec in c.entries.items():
        shift = M.apply(beta)
        for gamma, mat in A.entries.items():
            alpha = tuple(g + t for g, t in zip(gamma, shift))
            acc = out.setdefault(alpha, [Fraction(0)] * A.n)
            for i, x in enumerate(mat_vec(mat, vec)):
                acc[i] += x
    return Sequence(c.s, A.n, out)


def _refine(A: Mask, X: Mapping[MultiIndex, Matrix], n: int) -> dict[MultiIndex, Matrix]:
    # (alpha) -> sum_gamma A(alpha - M gamma) X(gamma); A's factor stays on the left.
    out: dict[MultiIndex, Matrix] = {}
    for gamma, xg in X.items():
        shift = A.dilation.apply(gamma)
        for eta, a in A.entries.items():
            alpha = tuple(e + t for e, t in zip(eta, shift))
            prod = mat_mul(a, xg)
            out[alpha] = mat_add(out[alpha], prod) if alpha in out else prod
    return out


def iterate_mask(A: Mask, r: int) -> Mask:
    """The iterated mask ``A^[r]`` of ``S_A^r``, carrying dilation ``M^r``.

    Uses ``A^[k+1](alpha) = sum_beta A(alpha - M beta) A^[k](beta)``.  The
    level-0 mask is ``delta_{I_n}`` and keeps ``M`` as its dilation.
    """
    if A.n != A.m:
        raise ValueError("only square masks can be iterated")
    if r < 0:
        raise ValueError("level must be nonnegative")
    if r == 0:
        return Mask.delta(A.n, A.dilation)
    if r == 1:
        return A
    current: Mapping[MultiIndex, Matrix] = A.entries
    for _ in range(r - 1):
        current = _refine(A, current, A.n)
    return Mask(A.n, A.n, A.dilation.power(r), current)


class SumRules(NamedTuple):
    satisfied: bool
    coset_sums: dict[MultiIndex, Fraction]


def check_sum_rules_order1(a: Mask) -> SumRules:
    """Equal coset sums ``sum_beta a(eps - M beta)`` over all ``eps``."""
    if a.n != 1 or a.m != 1:
        raise ValueError("sum rules are checked for scalar masks only")
    sums = {eps: Fraction(0) for eps in coset_representatives(a.dilation)}
    for alpha, mat in a.entries.items():
        eps, _ = coset_decompose(alpha, a.dilation)
        sums[eps] += mat[0][0]
    return SumRules(len(set(sums.values())) == 1, sums)


def coset_blocks(B: Mask) -> dict[MultiIndex, Matrix]:
    """Per coset of ``M``: the entrywise sum of ``|B|`` over that coset."""
    blocks = {eps: zero_matrix(B.n, B.m) for eps in coset_representatives(B.dilation)}
    for alpha, mat in B.entries.items():
        eps, _ = coset_decompose(alpha, B.dilation)
        blocks[eps] = mat_add(blocks[eps], mat_abs(mat))
    return blocks


def operator_norm(B: Mask, r: int = 1) -> Fraction:
    """Non-restricted norm ``||S_B^r||_inf``: worst coset row sum of ``|B^[r]|``."""
    if B.n != B.m:
        raise ValueError("operator norm needs a square mask")
    blocks = coset_blocks(iterate_mask(B, r))
    return max(sum(row, Fraction(0)) for mat in blocks.values() for row in mat)

"""Difference operators and difference masks intertwining with a scheme.

A difference operator ``T`` with ``q`` rows acts on ``n``-vector sequences by
``(T c)(alpha) = sum_beta T(beta) c(alpha - beta)``.  A difference mask ``B``
of level ``r`` has dilation ``M^r`` and satisfies ``T S_A^r = S_B T``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping

from .lattice import (
    DilationMatrix,
    MultiIndex,
    add,
    as_rational,
    bounding_box,
    box_points,
    coset_decompose,
    coset_representatives,
    sub,
    unit_vector,
)
from .masks import Mask, Matrix, Sequence, apply_subdivision, check_sum_rules_order1, iterate_mask

Stencil = Mapping[MultiIndex, tuple[Fraction, ...]]


class NoSolution(ValueError):
    """No difference mask exists on the requested support box."""

    def __init__(self, message: str, sum_rules_satisfied: bool | None = None):
        super().__init__(message)
        self.sum_rules_satisfied = sum_rules_satisfied


def _stencil_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for a, x in p.items():
        for b, y in q.items():
            k = add(a, b)
            out[k] = out.get(k, 0) + x * y
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True)
class DifferenceOperator:
    """Stacked correlation stencils; row ``j`` maps Q^n-sequences to scalars."""

    s: int
    n: int
    rows: tuple[Stencil, ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        rows = []
        for stencil in self.rows:
            clean = {}
            for beta, coeffs in stencil.items():
                beta = tuple(int(b) for b in beta)
                if len(beta) != self.s:
                    raise ValueError(f"stencil offset {beta} is not in Z^{self.s}")
                if not isinstance(coeffs, (list, tuple)):
                    coeffs = (coeffs,)
                coeffs = tuple(as_rational(x) for x in coeffs)
                if len(coeffs) != self.n:
                    raise ValueError(f"stencil row needs {self.n} coefficients")
                if any(c != 0 for c in coeffs):
                    clean[beta] = coeffs
            rows.append(dict(sorted(clean.items())))
        object.__setattr__(self, "rows", tuple(rows))

    @property
    def q(self) -> int:
        return len(self.rows)

    def coefficient(self, beta: MultiIndex) -> Matrix:
        """The ``q x n`` matrix ``T(beta)``."""
        zero = (Fraction(0),) * self.n
        return tuple(row.get(tuple(beta), zero) for row in self.rows)

    def offsets(self) -> list[MultiIndex]:
        return sorted({beta for row in self.rows for beta in row})

    def first_order_directions(self) -> list[MultiIndex] | None:
        """Directions ``xi_j`` if every row is ``delta_0 - delta_xi`` (scalar case)."""
        if self.n != 1:
            return None
        origin = (0,) * self.s
        directions = []
        for row in self.rows:
            if len(row) != 2 or row.get(origin) != (1,):
                return None
            (xi,) = [b for b in row if b != origin]
            if row[xi] != (-1,):
                return None
            directions.append(xi)
        return directions

    # -- constructors -------------------------------------------------------

    @classmethod
    def directional(cls, directions, order: int = 1) -> "DifferenceOperator":
        """Rows are products of ``order`` distinct first differences ``delta_0 - delta_xi``.

        ``order=1`` gives one row per direction; higher orders take the
        directions' combinations in ``itertools.combinations`` order.
        """
        directions = [tuple(int(x) for x in xi) for xi in directions]
        if not directions:
            raise ValueError("need at least one direction")
        s = len(directions[0])
        origin = (0,) * s
        rows = []
        for combo in itertools.combinations(directions, order):
            stencil = {origin: 1}
            for xi in combo:
                stencil = _stencil_mul(stencil, {origin: 1, xi: -1})
            rows.append({k: (v,) for k, v in stencil.items()})
        label = ";".join(",".join(map(str, xi)) for xi in directions)
        return cls(s, 1, tuple(rows), name=f"directions:{label}" + (f":{order}" if order > 1 else ""))

    @classmethod
    def nabla(cls, s: int) -> "DifferenceOperator":
        """Backward differences ``c(alpha) - c(alpha - e_l)``, one row per ``l``."""
        op = cls.directional([unit_vector(s, ell) for ell in range(s)])
        return cls(s, 1, op.rows, name="nabla")

    @classmethod
    def nabla_k(cls, s: int, k: int) -> "DifferenceOperator":
        """All ``nabla_1^mu_1 ... nabla_s^mu_s`` with ``|mu| = k``.

        Rows follow ``mu`` in lexicographic order, largest first coordinate first.
        """
        if k < 1:
            raise ValueError("difference order must be positive")
        origin = (0,) * s
        rows = []
        for mu in multi_indices_of_order(s, k):
            stencil = {origin: 1}
            for ell, power in enumerate(mu):
                for _ in range(power):
                    stencil = _stencil_mul(stencil, {origin: 1, unit_vector(s, ell): -1})
            rows.append({b: (v,) for b, v in stencil.items()})
        name = "nabla" if k == 1 else ("nabla2" if k == 2 else f"nablak:{k}")
        return cls(s, 1, tuple(rows), name=name)

    @classmethod
    def component_nabla(cls, s: int, n: int = 2) -> "DifferenceOperator":
        """Vector preset: per direction ``l``, a row ``nabla_l`` on component 1
        followed by identity rows on components 2..n.

        For ``s = n = 2`` this is the block operator
        ``[[nabla_1, 0], [0, 1], [nabla_2, 0], [0, 1]]``.
        """
        origin = (0,) * s
        rows = []
        for ell in range(s):
            e = unit_vector(s, ell)
            rows.append({origin: (1,) + (0,) * (n - 1), e: (-1,) + (0,) * (n - 1)})
            for i in range(1, n):
                rows.append({origin: tuple(int(t == i) for t in range(n))})
        return cls(s, n, tuple(rows), name="component-nabla")

    @classmethod
    def from_mask(cls, mask: Mask, name: str = "custom") -> "DifferenceOperator":
        """Read ``T(beta)`` from a ``q x n`` matrix mask."""
        rows = []
        for j in range(mask.n):
            rows.append({beta: mat[j] for beta, mat in mask.entries.items()})
        return cls(mask.s, mask.m, tuple(rows), name=name)


def multi_indices_of_order(s: int, k: int) -> list[MultiIndex]:
    """``mu in N_0^s`` with ``|mu| = k``, lexicographically descending."""
    out = [mu for mu in itertools.product(range(k + 1), repeat=s) if sum(mu) == k]
    out.sort(reverse=True)
    assert len(out) == comb(s + k - 1, s - 1)
    return out


def difference_apply(T: DifferenceOperator, c: Sequence) -> Sequence:
    if T.n != c.n or T.s != c.s:
        raise ValueError("difference operator and sequence sizes differ")
    out: dict[MultiIndex, list[Fraction]] = {}
    for gamma, vec in c.entries.items():
        for j, row in enumerate(T.rows):
            for beta, coeffs in row.items():
                alpha = add(gamma, beta)
                val = sum((x * y for x, y in zip(coeffs, vec)), Fraction(0))
                if val:
                    out.setdefault(alpha, [Fraction(0)] * T.q)[j] += val
    return Sequence(c.s, T.q, out)


def _level_dilation(A: Mask, r: int) -> DilationMatrix:
    return A.dilation if r == 1 else A.dilation.power(r)


def _lhs_coefficients(A: Mask, T: DifferenceOperator, r: int) -> dict[MultiIndex, Matrix]:
    # L(eta) = sum_gamma T(gamma) A^[r](eta - gamma), the symbol product T(z) A^[r](z).
    Ar = iterate_mask(A, r)
    out: dict[MultiIndex, list[list[Fraction]]] = {}
    for gamma in T.offsets():
        tg = T.coefficient(gamma)
        for beta, a in Ar.entries.items():
            eta = add(gamma, beta)
            acc = out.setdefault(eta, [[Fraction(0)] * A.m for _ in range(T.q)])
            for j in range(T.q):
                for i in range(A.m):
                    acc[j][i] += sum((tg[j][k] * a[k][i] for k in range(A.n)), Fraction(0))
    return {k: tuple(map(tuple, v)) for k, v in out.items() if any(x for row in v for x in row)}


def _solve_exact(equations: list[dict], rhs: list[Fraction], unknowns: list) -> dict | None:
    """Gauss-Jordan over Q; free unknowns are set to zero.  ``None`` if inconsistent."""
    index = {u: i for i, u in enumerate(unknowns)}
    rows = [({index[u]: v for u, v in eq.items() if v}, b) for eq, b in zip(equations, rhs)]
    pivots: list[tuple[int, dict, Fraction]] = []
    for row, b in rows:
        row = dict(row)
        for col, prow, pb in pivots:
            f = row.get(col)
            if f:
                for k, v in prow.items():
                    nv = row.get(k, 0) - f * v
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
                b -= f * pb
        if not row:
            if b != 0:
                return None
            continue
        col = min(row)
        piv = row[col]
        row = {k: v / piv for k, v in row.items()}
        b = b / piv
        for idx, (pcol, prow, pb) in enumerate(pivots):
            f = prow.get(col)
            if f:
                for k, v in row.items():
                    nv = prow.get(k, 0) - f * v
                    if nv:
                        prow[k] = nv
                    else:
                        prow.pop(k, None)
                pivots[idx] = (pcol, prow, pb - f * b)
        pivots.append((col, row, b))
    solution = {u: Fraction(0) for u in unknowns}
    for col, prow, pb in pivots:
        solution[unknowns[col]] = pb
    return solution


def default_support_box(A: Mask, T: DifferenceOperator, r: int) -> tuple[MultiIndex, MultiIndex]:
    lhs = _lhs_coefficients(A, T, r)
    if not lhs:
        return A.support_box()
    return bounding_box(lhs)


def construct_difference_mask(A: Mask, T: DifferenceOperator, r: int = 1, support_box=None) -> Mask:
    """Solve ``T(z) A^[r](z) = B(z) T(z^{M^r})`` for ``B`` supported in ``support_box``.

    The coefficient identity splits into independent blocks, one per output
    row ``j`` and coset of ``B``'s index mod ``M^r``.  Free unknowns are set
    to zero, which makes the returned mask deterministic.
    """
    if T.n != A.n or T.s != A.s:
        raise ValueError("operator does not match the mask's size")
    P = _level_dilation(A, r)
    lhs = _lhs_coefficients(A, T, r)
    lo, hi = support_box if support_box is not None else default_support_box(A, T, r)
    points = box_points(tuple(lo), tuple(hi))
    offsets = T.offsets()
    by_coset: dict[MultiIndex, list[MultiIndex]] = {}
    for kappa in points:
        by_coset.setdefault(coset_decompose(kappa, P)[0], []).append(kappa)
    lhs_by_coset: dict[MultiIndex, list[MultiIndex]] = {}
    for eta in lhs:
        lhs_by_coset.setdefault(coset_decompose(eta, P)[0], []).append(eta)

    entries: dict[MultiIndex, list[list[Fraction]]] = {}
    for j in range(T.q):
        for eps in coset_representatives(P):
            kappas = by_coset.get(eps, [])
            # B_{j,nu}(kappa) contributes B_{j,nu}(kappa) T_nu(gamma)_i at eta = kappa + P gamma.
            eqs: dict[tuple, dict] = {}
            for kappa in kappas:
                for gamma in offsets:
                    eta = add(kappa, P.apply(gamma))
                    tg = T.coefficient(gamma)
                    for nu in range(T.q):
                        for i in range(T.n):
                            if tg[nu][i]:
                                eq = eqs.setdefault((eta, i), {})
                                eq[(kappa, nu)] = eq.get((kappa, nu), 0) + tg[nu][i]
            for eta in lhs_by_coset.get(eps, []):
                for i in range(T.n):
                    if lhs[eta][j][i]:
                        eqs.setdefault((eta, i), {})
            keys = sorted(eqs)
            rhs = [lhs[eta][j][i] if eta in lhs else Fraction(0) for eta, i in keys]
            unknowns = [(kappa, nu) for kappa in kappas for nu in range(T.q)]
            sol = _solve_exact([eqs[k] for k in keys], rhs, unknowns)
            if sol is None:
                ok = check_sum_rules_order1(A).satisfied if A.n == 1 else None
                reason = (
                    "sum rules of order 1 fail" if ok is False
                    else "support box too small or operator incompatible"
                )
                raise NoSolution(f"no difference mask on box {tuple(lo)}..{tuple(hi)}: {reason}", ok)
            for (kappa, nu), v in sol.items():
                if v:
                    entries.setdefault(kappa, [[Fraction(0)] * T.q for _ in range(T.q)])[j][nu] = v
    return Mask(T.q, T.q, P, {k: tuple(map(tuple, v)) for k, v in entries.items()})


def _iterate_operator(A: Mask, c: Sequence, r: int) -> Sequence:
    for _ in range(r):
        c = apply_subdivision(A, c)
    return c


def verify_intertwining(A: Mask, B: Mask, T: DifferenceOperator, r: int = 1) -> bool:
    """Check ``T S_A^r = S_B T`` with ``B`` carrying dilation ``M^r``.

    Both sides ``L`` satisfy ``L(tau_gamma c) = tau_{M^r gamma} L(c)`` for
    every shift ``tau_gamma``, and every unit sequence ``delta_beta v_i`` is a
    shift of ``delta_0 v_i``.  So agreement on ``delta_0 v_i`` for all ``i``
    already forces operator equality on finitely supported sequences; the
    check runs over a full period of shifts anyway.
    """
    P = _level_dilation(A, r)
    if B.dilation != P or B.n != T.q or B.m != T.q or T.n != A.n:
        return False
    for beta in coset_representatives(P):
        for i in range(A.n):
            e = Sequence.unit(A.s, A.n, beta, i)
            lhs = difference_apply(T, _iterate_operator(A, e, r))
            rhs = apply_subdivision(B, difference_apply(T, e))
            if lhs != rhs:
                return False
    return True


@dataclass(frozen=True)
class DifferenceScheme:
    source: Mask
    operator: DifferenceOperator
    level: int
    mask: Mask
    provenance: str = "solved"


@dataclass(frozen=True)
class LpData:
    """Objective weights ``d[(beta, nu)]`` of one (eps, j) subproblem over box ``K``."""

    d: dict[tuple[MultiIndex, int], Fraction]
    box: tuple[MultiIndex, MultiIndex]


def adaptive_box(Br: Mask) -> tuple[MultiIndex, MultiIndex]:
    """Bounding box of ``{beta : eps - M^r beta in supp B^[r]}``."""
    if not Br.entries:
        origin = (0,) * Br.s
        return origin, origin
    betas = [tuple(-b for b in coset_decompose(alpha, Br.dilation)[1]) for alpha in Br.entries]
    return bounding_box(betas)


def lp_data_from_level_mask(Br: Mask, eps: MultiIndex, j: int, box=None) -> LpData:
    lo, hi = box if box is not None else adaptive_box(Br)
    d = {}
    P = Br.dilation
    for beta in box_points(lo, hi):
        mat = Br[sub(eps, P.apply(beta))]
        for nu in range(Br.m):
            d[(beta, nu)] = mat[j - 1][nu]
    return LpData(d, (lo, hi))


def build_lp_data(B: Mask, r: int, eps: MultiIndex, j: int, box=None) -> LpData:
    """``d[(beta, nu)] = B^[r]_{j,nu}(eps - M^r beta)`` for ``beta`` in ``K``.

    ``j`` is 1-based like the operator's rows.  Zero weights stay in ``d``.
    """
    if not 1 <= j <= B.n:
        raise ValueError(f"row j={j} out of range 1..{B.n}")
    return lp_data_from_level_mask(iterate_mask(B, r), tuple(eps), j, box)

"""Exact rational simplex method (two-phase, Bland's rule).

Problems have the form

    maximize c^T x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0

with constraint rows given sparsely as ``{column: coefficient}`` dicts.
Bland's rule cannot cycle, and exact arithmetic makes every optimum and
every dual certificate exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence


class Infeasible(ValueError):
    pass


class Unbounded(ValueError):
    pass


@dataclass(frozen=True)
class SimplexResult:
    value: Fraction
    x: list[Fraction]
    y_ub: list[Fraction]
    y_eq: list[Fraction]
    basis: tuple[int, ...]
    iterations: int


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.iterations = 0

    def reduced_costs(self, cost):
        red = dict((j, c) for j, c in cost.items() if c)
        for i, row in enumerate(self.rows):
            cb = cost.get(self.basis[i], 0)
            if cb:
                for j, a in row.items():
                    v = red.get(j, 0) - cb * a
                    if v:
                        red[j] = v
                    else:
                        red.pop(j, None)
        return red

    def pivot(self, i, j, red):
        row = self.rows[i]
        p = row[j]
        if p != 1:
            row = {k: v / p for k, v in row.items()}
            self.rows[i] = row
            self.rhs[i] /= p
        for k, other in enumerate(self.rows):
            if k == i:
                continue
            f = other.get(j)
            if f:
                for col, v in row.items():
                    nv = other.get(col, 0) - f * v
                    if nv:
                        other[col] = nv
                    else:
                        other.pop(col, None)
                self.rhs[k] -= f * self.rhs[i]
        f = red.get(j)
        if f:
            for col, v in row.items():
                nv = red.get(col, 0) - f * v
                if nv:
                    red[col] = nv
                else:
                    red.pop(col, None)
        self.basis[i] = j
        self.iterations += 1

    def optimize(self, red, allowed, limit):
        while True:
            entering = min((j for j, r in red.items() if r > 0 and j in allowed), default=None)
            if entering is None:
                return
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise Unbounded("objective is unbounded")
            self.pivot(best[1], entering, red)
            if self.iterations > limit:
                raise RuntimeError("simplex iteration limit exceeded")


def maximize(
    c: Mapping[int, Fraction] | Sequence[Fraction],
    nvars: int,
    A_ub: Sequence[Mapping[int, Fraction]] = (),
    b_ub: Sequence[Fraction] = (),
    A_eq: Sequence[Mapping[int, Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
    limit: int = 1_000_000,
) -> SimplexResult:
    """Solve the LP exactly; raises :class:`Infeasible` or :class:`Unbounded`.

    Dual values satisfy ``y_ub >= 0`` and ``A_ub^T y_ub + A_eq^T y_eq >= c``
    with equal objective ``b^T y = c^T x``.
    """
    cost = dict(enumerate(c)) if not isinstance(c, Mapping) else dict(c)
    cost = {j: Fraction(v) for j, v in cost.items() if v}
    rows, rhs, basis, identity, signs = [], [], [], [], []
    ncols = nvars
    artificials = []
    constraints = [(r, b, True) for r, b in zip(A_ub, b_ub)] + [(r, b, False) for r, b in zip(A_eq, b_eq)]
    for row, b, is_ub in constraints:
        row = {j: Fraction(v) for j, v in row.items() if v}
        b = Fraction(b)
        sign = 1
        if b < 0:
            row = {j: -v for j, v in row.items()}
            b, sign = -b, -1
        if is_ub:
            row[ncols] = Fraction(sign)
            slack = ncols
            ncols += 1
        if is_ub and sign == 1:
            basis.append(slack)
            identity.append(slack)
        else:
            row[ncols] = Fraction(1)
            basis.append(ncols)
            identity.append(ncols)
            artificials.append(ncols)
            ncols += 1
        rows.append(row)
        rhs.append(b)
        signs.append(sign)

    tab = _Tableau(rows, rhs, basis, ncols)
    art = set(artificials)
    real = set(range(ncols)) - art
    if art:
        red = tab.reduced_costs({j: Fraction(-1) for j in art})
        tab.optimize(red, real, limit)
        if any(tab.rhs[i] for i, bv in enumerate(tab.basis) if bv in art):
            raise Infeasible("constraints are infeasible")
        for i, bv in enumerate(tab.basis):
            if bv in art:
                col = min((j for j, v in tab.rows[i].items() if j in real and v), default=None)
                if col is not None:
                    tab.pivot(i, col, {})
                # otherwise the row is redundant; its artificial stays basic at zero

    red = tab.reduced_costs(cost)
    tab.optimize(red, real, limit)

    x = [Fraction(0)] * nvars
    for i, bv in enumerate(tab.basis):
        if bv < nvars:
            x[bv] = tab.rhs[i]
    value = sum((cost.get(j, 0) * x[j] for j in range(nvars)), Fraction(0))
    # y_i = c_B^T B^{-1} e_i, read from the column that started as e_i.
    col_of = [dict() for _ in range(ncols)]
    for i, row in enumerate(tab.rows):
        for j, v in row.items():
            col_of[j][i] = v
    y = []
    for i, idc in enumerate(identity):
        yi = sum((cost.get(tab.basis[k], 0) * v for k, v in col_of[idc].items()), Fraction(0))
        y.append(signs[i] * yi)
    n_ub = len(A_ub)
    return SimplexResult(value, x, y[:n_ub], y[n_ub:], tuple(tab.basis), tab.iterations)

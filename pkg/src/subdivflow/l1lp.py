"""The box LP ``max d^T Delta x, |Delta x| <= 1`` and its L1 dual form.

``Delta`` is the matrix of a difference operator restricted to a box ``K``:
row ``(beta, nu)`` holds ``(Tc)_nu(beta)`` as a combination of the values
``c_i(gamma)``.  Its columns are every ``(gamma, i)`` touched by some row.
Rows and columns are both kept in ascending lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .difference import DifferenceOperator
from .lattice import DilationMatrix, MultiIndex, sub
from .masks import Mask
from .simplex import maximize

Row = tuple[MultiIndex, int]


@dataclass(frozen=True)
class ConstraintMatrix:
    rows: tuple[Row, ...]
    cols: tuple[Row, ...]
    entries: tuple[dict[int, Fraction], ...]  # per row: column index -> value

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def apply(self, x: Mapping[Row, Fraction]) -> dict[Row, Fraction]:
        out = {}
        for r, row in zip(self.rows, self.entries):
            out[r] = sum((v * x.get(self.cols[j], 0) for j, v in row.items()), Fraction(0))
        return out

    def apply_transpose(self, y: Mapping[Row, Fraction]) -> dict[Row, Fraction]:
        out = {c: Fraction(0) for c in self.cols}
        for r, row in zip(self.rows, self.entries):
            w = y.get(r, 0)
            if w:
                for j, v in row.items():
                    out[self.cols[j]] += w * v
        return out

    def transpose_rows(self) -> list[dict[int, Fraction]]:
        cols = [dict() for _ in self.cols]
        for i, row in enumerate(self.entries):
            for j, v in row.items():
                cols[j][i] = v
        return cols


def build_delta_matrix(T: DifferenceOperator, points: Iterable[MultiIndex]) -> ConstraintMatrix:
    points = sorted(tuple(p) for p in points)
    rows = [(beta, nu) for beta in points for nu in range(T.q)]
    raw = []
    touched = set()
    for beta, nu in rows:
        entry = {}
        for offset, coeffs in T.rows[nu].items():
            gamma = sub(beta, offset)
            for i, v in enumerate(coeffs):
                if v:
                    entry[(gamma, i)] = entry.get((gamma, i), 0) + Fraction(v)
        entry = {k: v for k, v in entry.items() if v}
        touched.update(entry)
        raw.append(entry)
    cols = sorted(touched)
    index = {c: j for j, c in enumerate(cols)}
    entries = tuple({index[c]: v for c, v in e.items()} for e in raw)
    return ConstraintMatrix(tuple(rows), tuple(cols), entries)


@dataclass(frozen=True)
class LpSolution:
    value: Fraction
    x: dict[Row, Fraction]         # optimal sequence values c_i(gamma)
    d_star: dict[Row, Fraction]    # optimal weights, ||d_star||_1 = value
    g: dict[Row, Fraction]         # d - d_star, annihilated by Delta^T
    iterations: int


def solve_box_lp(d: Mapping[Row, Fraction], delta: ConstraintMatrix) -> LpSolution:
    """Primal box LP, with ``d*`` read off the optimal duals."""
    nc = len(delta.cols)
    obj = delta.apply_transpose(d)
    c = {}
    for j, col in enumerate(delta.cols):
        if obj[col]:
            c[j] = obj[col]
            c[nc + j] = -obj[col]
    A_ub, b_ub = [], []
    for row in delta.entries:
        split = {j: v for j, v in row.items()}
        split.update({nc + j: -v for j, v in row.items()})
        A_ub.append(split)
        b_ub.append(Fraction(1))
    for row in delta.entries:
        split = {j: -v for j, v in row.items()}
        split.update({nc + j: v for j, v in row.items()})
        A_ub.append(split)
        b_ub.append(Fraction(1))
    res = maximize(c, 2 * nc, A_ub, b_ub)
    x = {col: res.x[j] - res.x[nc + j] for j, col in enumerate(delta.cols)}
    rho = len(delta.rows)
    d_star = {r: res.y_ub[i] - res.y_ub[rho + i] for i, r in enumerate(delta.rows)}
    g = {r: Fraction(d.get(r, 0)) - d_star[r] for r in delta.rows}
    return LpSolution(res.value, x, d_star, g, res.iterations)


def l1_nullspace_distance(d: Mapping[Row, Fraction], delta: ConstraintMatrix) -> tuple[Fraction, dict[Row, Fraction]]:
    """``min ||d - g||_1`` over ``g`` with ``g^T Delta = 0``, solved directly.

    Returns the distance and the minimiser ``d - g``.
    """
    rho = len(delta.rows)
    rhs = delta.apply_transpose(d)
    cols = delta.transpose_rows()
    A_eq = []
    b_eq = []
    for j, col in enumerate(delta.cols):
        row = {i: v for i, v in cols[j].items()}
        row.update({rho + i: -v for i, v in cols[j].items()})
        A_eq.append(row)
        b_eq.append(rhs[col])
    res = maximize([Fraction(-1)] * (2 * rho), 2 * rho, A_eq=A_eq, b_eq=b_eq)
    w, y = res.x[:rho], res.x[rho:]
    assert all(not (a and b) for a, b in zip(w, y)), "w and y overlap at a vertex"
    return -res.value, {r: w[i] - y[i] for i, r in enumerate(delta.rows)}


def assemble_optimal_mask(
    dstars: Mapping[tuple[MultiIndex, int], Mapping[Row, Fraction]],
    dilation: DilationMatrix,
    q: int,
) -> Mask:
    """``B*(eps - P beta)_{j,nu} = d*_{eps,j}(beta, nu)``; ``j`` is 1-based."""
    entries: dict[MultiIndex, list[list[Fraction]]] = {}
    for (eps, j), dstar in dstars.items():
        for (beta, nu), v in dstar.items():
            if v:
                alpha = sub(eps, dilation.apply(beta))
                mat = entries.setdefault(alpha, [[Fraction(0)] * q for _ in range(q)])
                mat[j - 1][nu] = Fraction(v)
    return Mask(q, q, dilation, {a: tuple(map(tuple, m)) for a, m in entries.items()})

"""The full analysis pipeline and its certificate reports.

For each level ``r`` every ``(eps, j)`` subproblem is solved exactly.
First-order scalar directional operators go to the flow solver and all
other operators to the L1 LP.  The optimal weights are then assembled into
the mask ``B*_r``, which is checked against the original scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import formats
from .difference import (
    DifferenceOperator,
    NoSolution,
    construct_difference_mask,
    lp_data_from_level_mask,
    verify_intertwining,
)
from .l1lp import assemble_optimal_mask, build_delta_matrix, solve_box_lp
from .lattice import (
    DilationMatrix,
    MultiIndex,
    as_rational,
    box_points,
    coset_representatives,
    format_index,
    format_rational,
    sub,
)
from .masks import Mask, check_sum_rules_order1, iterate_mask, operator_norm
from .netflow import build_difference_graph, extract_optimal_d, solve_flow_problem


class AnalysisAbort(RuntimeError):
    pass


# -- configuration -----------------------------------------------------------


def resolve_operator(desc, s: int, n: int = 1) -> DifferenceOperator:
    """Turn an operator description into a :class:`DifferenceOperator`.

    Accepted forms: ``nabla``, ``nabla2``, ``nablak:<k>``, ``component-nabla``,
    ``directions:<x,y;...>[:<k>]`` and ``file:<path>``.
    """
    if isinstance(desc, DifferenceOperator):
        op = desc
    elif desc == "nabla":
        op = DifferenceOperator.nabla(s)
    elif desc == "nabla2":
        op = DifferenceOperator.nabla_k(s, 2)
    elif desc.startswith("nablak:"):
        try:
            k = int(desc.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad difference order in {desc!r}") from None
        op = DifferenceOperator.nabla_k(s, k)
    elif desc == "component-nabla":
        op = DifferenceOperator.component_nabla(s, n)
    elif desc.startswith("directions:"):
        parts = desc.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad direction list {desc!r}")
        try:
            dirs = [tuple(int(t) for t in d.split(",")) for d in parts[1].split(";")]
            order = int(parts[2]) if len(parts) == 3 else 1
        except ValueError:
            raise ValueError(f"bad direction list {desc!r}") from None
        if any(len(d) != s for d in dirs):
            raise ValueError(f"directions must lie in Z^{s}")
        op = DifferenceOperator.directional(dirs, order)
    elif desc.startswith("file:"):
        mask = formats.parse_mask_file(desc[5:], DilationMatrix.scalar(2, s))
        op = DifferenceOperator.from_mask(mask, name=desc)
    else:
        raise ValueError(f"unknown operator {desc!r}")
    if op.s != s:
        raise ValueError(f"operator acts on Z^{op.s}, mask on Z^{s}")
    if op.n != n:
        hint = " (try component-nabla or file:)" if n > 1 else ""
        raise ValueError(f"operator expects {op.n}-vector sequences, mask has n = {n}{hint}")
    return op


@dataclass(frozen=True)
class ThresholdRule:
    """``norm(r) < threshold(r)`` for some level ``r`` certifies ``claim``."""

    name: str
    claim: str
    default: Fraction | None = None
    levels: tuple[tuple[int, Fraction], ...] = ()

    def threshold(self, r: int) -> Fraction | None:
        for level, t in self.levels:
            if level == r:
                return t
        return self.default

    @classmethod
    def preset(cls, name: str) -> "ThresholdRule":
        if name == "convergence":
            return cls("convergence", "convergent", Fraction(1))
        if name == "c1-halved":
            # a working rule for C1, not a general theorem
            return cls("c1-halved", "C1 criterion satisfied", Fraction(1, 2))
        raise ValueError(f"unknown preset {name!r}")

    @classmethod
    def parse(cls, items) -> "ThresholdRule":
        """Custom rule from strings ``p/q@r`` (or bare ``p/q``, meaning every level)."""
        levels = []
        default = None
        for desc in items:
            value, _, level = desc.partition("@")
            t = as_rational(value.strip())
            if t <= 0:
                raise ValueError("thresholds must be positive")
            if level:
                levels.append((int(level), t))
            else:
                default = t
        return cls("custom", "threshold met", default, tuple(levels))

    def describe(self) -> str:
        parts = [f"{format_rational(t)}@{r}" for r, t in self.levels]
        if self.default is not None:
            parts.append(f"{format_rational(self.default)}@*")
        return f"{self.name} ({', '.join(parts)})"


@dataclass(frozen=True)
class AnalysisConfig:
    max_level: int = 1
    operator: object = "nabla"
    rule: ThresholdRule = field(default_factory=lambda: ThresholdRule.preset("convergence"))
    format: str = "text"

    def __post_init__(self):
        if self.max_level < 1:
            raise ValueError("max level must be at least 1")
        if self.format not in ("text", "kv"):
            raise ValueError(f"unknown format {self.format!r}")


# -- certificate -------------------------------------------------------------


@dataclass(frozen=True)
class Subproblem:
    eps: MultiIndex
    j: int
    value: Fraction
    l1_d: Fraction
    method: str


@dataclass(frozen=True)
class LevelReport:
    r: int
    norm: Fraction
    subproblems: tuple[Subproblem, ...]
    optimal_mask: Mask
    optimal_mask_norm: Fraction
    intertwining: bool
    scale: int
    integral: bool

    @property
    def is_consistent(self) -> bool:
        return self.norm == max(p.value for p in self.subproblems) == self.optimal_mask_norm


@dataclass(frozen=True)
class Certificate:
    mask: Mask
    operator: DifferenceOperator
    rule: ThresholdRule
    sum_rules: bool | None
    difference_mask: Mask
    difference_mask_intertwining: bool
    levels: tuple[LevelReport, ...]
    conclusion: str
    certified_level: int | None

    @property
    def norm(self) -> Fraction:
        """Smallest restricted norm over all analysed levels."""
        return min(level.norm for level in self.levels)


def _flow_subproblem(directions, points, d):
    try:
        graph = build_difference_graph(points, directions)
    except ValueError:
        return None
    weights = {(beta, sub(beta, directions[nu])): v for (beta, nu), v in d.items()}
    sol = solve_flow_problem(graph, weights)
    dstar_edges = extract_optimal_d(graph, weights, sol)
    dstar = {(beta, nu): dstar_edges[(beta, sub(beta, directions[nu]))] for (beta, nu) in d}
    return sol.value, dstar, sol.method


def _denominator_lcm(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def analyze_level(A: Mask, B: Mask, T: DifferenceOperator, r: int) -> LevelReport:
    Br = iterate_mask(B, r)
    directions = T.first_order_directions()
    subproblems = []
    dstars = {}
    scale = _denominator_lcm(v for mat in Br.entries.values() for row in mat for v in row)
    for eps in coset_representatives(A.dilation, r):
        for j in range(1, T.q + 1):
            data = lp_data_from_level_mask(Br, eps, j)
            points = box_points(*data.box)
            solved = _flow_subproblem(directions, points, data.d) if directions else None
            if solved is None:
                sol = solve_box_lp(data.d, build_delta_matrix(T, points))
                solved = (sol.value, sol.d_star, "lp")
            value, dstar, method = solved
            l1 = sum((abs(v) for v in data.d.values()), Fraction(0))
            subproblems.append(Subproblem(eps, j, value, l1, method))
            dstars[(eps, j)] = dstar
    bstar = assemble_optimal_mask(dstars, A.dilation.power(r), T.q)
    integral = all((v * scale).denominator == 1 for mat in bstar.entries.values() for row in mat for v in row)
    return LevelReport(
        r=r,
        norm=max(p.value for p in subproblems),
        subproblems=tuple(subproblems),
        optimal_mask=bstar,
        optimal_mask_norm=operator_norm(bstar),
        intertwining=verify_intertwining(A, bstar, T, r),
        scale=scale,
        integral=integral,
    )


def analyze(A: Mask, config: AnalysisConfig = AnalysisConfig()) -> Certificate:
    T = resolve_operator(config.operator, A.s, A.m)
    sum_rules = None
    if A.n == 1 and A.m == 1:
        sum_rules = check_sum_rules_order1(A).satisfied
        if not sum_rules:
            raise AnalysisAbort("not convergent: sum rules of order 1 fail")
    try:
        B = construct_difference_mask(A, T)
    except NoSolution as exc:
        raise AnalysisAbort(f"no difference mask for operator {T.name}: {exc}") from None
    levels = []
    conclusion = None
    certified = None
    rule = config.rule
    for r in range(1, config.max_level + 1):
        report = analyze_level(A, B, T, r)
        levels.append(report)
        t = rule.threshold(r)
        if t is not None and report.norm < t:
            conclusion = (
                f"restricted norm {format_rational(report.norm)} < {format_rational(t)} "
                f"at r={r} => {rule.claim}"
            )
            certified = r
            break
    if conclusion is None:
        conclusion = f"norm >= threshold for all r <= {config.max_level}: inconclusive"
    return Certificate(
        mask=A,
        operator=T,
        rule=rule,
        sum_rules=sum_rules,
        difference_mask=B,
        difference_mask_intertwining=verify_intertwining(A, B, T, 1),
        levels=tuple(levels),
        conclusion=conclusion,
        certified_level=certified,
    )


# -- rendering ---------------------------------------------------------------


def _flag(value) -> str:
    return {True: "true", False: "false", None: "n/a"}[value]


def render_kv(cert: Certificate) -> str:
    lines = [
        f"mask.s = {cert.mask.s}",
        f"mask.n = {cert.mask.n}",
        f"mask.m = {cert.mask.m}",
        f"mask.dilation = {cert.mask.dilation}",
        f"operator = {cert.operator.name}",
        f"operator.rows = {cert.operator.q}",
        f"rule = {cert.rule.describe()}",
        f"sum_rules = {_flag(cert.sum_rules)}",
        f"diffmask.intertwining = {_flag(cert.difference_mask_intertwining)}",
        f"diffmask.operator_norm = {format_rational(operator_norm(cert.difference_mask))}",
        f"levels = {len(cert.levels)}",
    ]
    for level in cert.levels:
        p = f"r{level.r}"
        lines.append(f"{p}.norm = {format_rational(level.norm)}")
        for sp in level.subproblems:
            key = f"{p}.sub.{format_index(sp.eps)}.{sp.j}"
            lines.append(f"{key}.value = {format_rational(sp.value)}")
            lines.append(f"{key}.l1_d = {format_rational(sp.l1_d)}")
            lines.append(f"{key}.method = {sp.method}")
        lines.append(f"{p}.bstar.operator_norm = {format_rational(level.optimal_mask_norm)}")
        lines.append(f"{p}.bstar.intertwining = {_flag(level.intertwining)}")
        lines.append(f"{p}.bstar.scale = {level.scale}")
        lines.append(f"{p}.bstar.integral = {_flag(level.integral)}")
        for alpha, mat in level.optimal_mask.entries.items():
            vals = " ".join(format_rational(v) for row in mat for v in row)
            lines.append(f"{p}.bstar.entry.{format_index(alpha)} = {vals}")
    lines.append(f"certified_level = {cert.certified_level if cert.certified_level else 'none'}")
    lines.append(f"conclusion = {cert.conclusion}")
    return "\n".join(lines) + "\n"


def render_text(cert: Certificate) -> str:
    A = cert.mask
    out = [
        f"mask: s={A.s} n={A.n} m={A.m} dilation={A.dilation} support={len(A.entries)} points",
        f"operator: {cert.operator.name} ({cert.operator.q} rows)",
        f"rule: {cert.rule.describe()}",
        f"sum rules of order 1: {_flag(cert.sum_rules)}",
        f"difference mask: intertwining {_flag(cert.difference_mask_intertwining)}, "
        f"operator norm {format_rational(operator_norm(cert.difference_mask))}",
    ]
    for level in cert.levels:
        out.append("")
        out.append(f"level r={level.r}: restricted norm {format_rational(level.norm)}")
        for sp in level.subproblems:
            out.append(
                f"  eps={format_index(sp.eps)} j={sp.j}: {format_rational(sp.value)}"
                f"  (||d||_1 = {format_rational(sp.l1_d)}, {sp.method})"
            )
        out.append(
            f"  optimal mask: operator norm {format_rational(level.optimal_mask_norm)}, "
            f"intertwining {_flag(level.intertwining)}, "
            f"{'integral' if level.integral else 'not integral'} at scale {level.scale}"
        )
        for line in formats.serialize_mask(level.optimal_mask).splitlines():
            out.append(f"    {line}")
    out.append("")
    out.append(f"conclusion: {cert.conclusion}")
    return "\n".join(out) + "\n"


def render(cert: Certificate, fmt: str = "text") -> str:
    return render_kv(cert) if fmt == "kv" else render_text(cert)

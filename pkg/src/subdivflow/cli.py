"""Command-line interface: ``subdivflow <command> ...``.

Exit status is 0 on success, 1 when an analysis aborts, 2 on usage or
parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import formats
from .certify import (
    AnalysisAbort,
    AnalysisConfig,
    ThresholdRule,
    analyze,
    analyze_level,
    render,
    resolve_operator,
)
from .difference import NoSolution, construct_difference_mask, verify_intertwining
from .lattice import coset_representatives, format_index, format_rational
from .masks import check_sum_rules_order1, iterate_mask, operator_norm
from .netflow import solve_flow_problem


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _dilation(text):
    return formats.parse_dilation(text)


def _load(args):
    return formats.parse_mask_file(args.mask, args.dilation)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_cosets(args):
    if args.dilation is None:
        raise ValueError("cosets needs --dilation")
    reps = coset_representatives(args.dilation, args.level)
    _emit(args, "".join(format_index(e) + "\n" for e in reps))


def _cmd_iterate(args):
    _emit(args, formats.serialize_mask(iterate_mask(_load(args), args.level)))


def _cmd_sumrules(args):
    A = _load(args)
    if A.n != 1 or A.m != 1:
        raise ValueError("sum rules are checked for scalar masks only")
    res = check_sum_rules_order1(A)
    lines = [f"satisfied = {'true' if res.satisfied else 'false'}"]
    lines += [f"{format_index(e)} = {format_rational(v)}" for e, v in res.coset_sums.items()]
    _emit(args, "\n".join(lines) + "\n")
    return 0 if res.satisfied else 1


def _cmd_diffmask(args):
    A = _load(args)
    T = resolve_operator(args.operator, A.s, A.m)
    try:
        B = construct_difference_mask(A, T)
    except NoSolution as exc:
        raise AnalysisAbort(str(exc)) from None
    ok = verify_intertwining(A, B, T)
    _emit(args, formats.serialize_mask(B) + f"# intertwining = {'true' if ok else 'false'}\n")


def _cmd_norm(args):
    _emit(args, f"norm = {format_rational(operator_norm(_load(args), args.level))}\n")


def _difference_mask(args, A, T):
    if args.diffmask:
        B = formats.parse_mask_file(args.diffmask, A.dilation)
        if not verify_intertwining(A, B, T):
            raise AnalysisAbort("supplied difference mask does not intertwine with the scheme")
        return B
    try:
        return construct_difference_mask(A, T)
    except NoSolution as exc:
        raise AnalysisAbort(str(exc)) from None


def _cmd_restricted_norm(args):
    A = _load(args)
    T = resolve_operator(args.operator, A.s, A.m)
    report = analyze_level(A, _difference_mask(args, A, T), T, args.level)
    lines = [f"restricted norm = {format_rational(report.norm)}"]
    for sp in report.subproblems:
        lines.append(f"{format_index(sp.eps)} {sp.j} = {format_rational(sp.value)} {sp.method}")
    _emit(args, "\n".join(lines) + "\n")


def _cmd_optimal_mask(args):
    A = _load(args)
    T = resolve_operator(args.operator, A.s, A.m)
    report = analyze_level(A, _difference_mask(args, A, T), T, args.level)
    _emit(args, formats.serialize_mask(report.optimal_mask))


def _cmd_flow(args):
    graph, d = formats.parse_graph_file(args.graph)
    sol = solve_flow_problem(graph, d)
    lines = [f"value = {format_rational(sol.value)}", f"method = {sol.method}", "flow:"]
    for (u, v), w in sorted(sol.flow.items()):
        if w:
            lines.append(f"  {format_index(u)} -> {format_index(v)} = {format_rational(w)}")
    lines.append("potentials:")
    for v, x in sorted(sol.potentials.items()):
        lines.append(f"  {format_index(v)} = {format_rational(x)}")
    _emit(args, "\n".join(lines) + "\n")


def _cmd_analyze(args):
    A = _load(args)
    if args.threshold:
        rule = ThresholdRule.parse(args.threshold)
    else:
        rule = ThresholdRule.preset(args.preset or "convergence")
    config = AnalysisConfig(max_level=args.level, operator=args.operator, rule=rule, format=args.format)
    cert = analyze(A, config)
    _emit(args, render(cert, config.format))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subdivflow", description="Exact norm certificates for subdivision schemes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help, mask=True, operator=False, level=True):
        p = sub.add_parser(name, help=help)
        if mask:
            p.add_argument("mask", help="mask file")
        p.add_argument("--dilation", type=_dilation, help="dilation matrix, row-major comma-separated")
        if level:
            p.add_argument("--level", "-r", type=int, default=1, help="iteration level r (default 1)")
        if operator:
            p.add_argument("--operator", default="nabla",
                           help="nabla | nabla2 | nablak:<k> | component-nabla | directions:<x,y;..>[:<k>] | file:<path>")
        p.add_argument("--out", help="write output to this file")
        p.set_defaults(func=func)
        return p

    command("cosets", _cmd_cosets, "coset representatives of Z^s / M^r Z^s", mask=False)
    command("iterate", _cmd_iterate, "the iterated mask A^[r]")
    command("sumrules", _cmd_sumrules, "sum rules of order 1", level=False)
    command("diffmask", _cmd_diffmask, "construct a difference mask B", operator=True, level=False)
    command("norm", _cmd_norm, "operator norm of S_B^r for a mask B")
    for name, func, help in (
        ("restricted-norm", _cmd_restricted_norm, "restricted norm of the difference scheme"),
        ("optimal-mask", _cmd_optimal_mask, "optimal difference mask at level r"),
    ):
        p = command(name, func, help, operator=True)
        p.add_argument("--diffmask", help="use this difference mask file instead of constructing one")
    p = command("flow", _cmd_flow, "solve a standalone flow instance", mask=False, level=False)
    p.add_argument("--graph", required=True, help="graph file")
    p = command("analyze", _cmd_analyze, "full certificate", operator=True)
    p.add_argument("--threshold", action="append", help="custom threshold p/q@r (repeatable)")
    p.add_argument("--preset", choices=("convergence", "c1-halved"))
    p.add_argument("--format", choices=("text", "kv"), default="text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "level", 1) < 1:
            parser.error("--level must be at least 1")
        if getattr(args, "threshold", None) and getattr(args, "preset", None):
            parser.error("--threshold and --preset are mutually exclusive")
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args) or 0
    except AnalysisAbort as exc:
        print(f"abort: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

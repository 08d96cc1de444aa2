"""Text formats for masks and standalone flow graphs.

Mask files::

    # comment
    s = 2
    n = 1
    m = 1
    dilation = 2,0,0,2
    entries:
    (0,0) = 1/4
    (1,0) = 1/2

Values are integers or fractions ``p/q``, row-major, one line per support
point.  Graph files hold ``vertex (..)`` and ``edge (..) -> (..) d=p/q`` lines.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .lattice import DilationMatrix, MultiIndex, format_index, format_rational
from .masks import Mask
from .netflow import LatticeGraph

_INDEX = re.compile(r"\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)")
_NUMBER = re.compile(r"[+-]?\d+(?:/[+-]?\d+)?$")


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}" + (f", column {column}" if column is not None else "") if line else ""
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.column = column


def _strip(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def parse_fraction(token: str, line: int | None = None, column: int | None = None) -> Fraction:
    if not _NUMBER.match(token):
        raise FormatError(f"not an exact rational: {token!r}", line, column)
    if "/" in token:
        p, q = token.split("/")
        if int(q) == 0:
            raise FormatError("zero denominator", line, column)
        return Fraction(int(p), int(q))
    return Fraction(int(token))


def _parse_index(text: str, lineno: int, col: int) -> MultiIndex:
    m = _INDEX.fullmatch(text.strip())
    if not m:
        raise FormatError(f"malformed index {text.strip()!r}", lineno, col)
    return tuple(int(t) for t in m.group(1).split(","))


def parse_dilation(text: str, s: int | None = None) -> DilationMatrix:
    try:
        values = [int(t) for t in text.split(",")]
    except ValueError:
        raise FormatError(f"dilation must be comma-separated integers: {text!r}") from None
    try:
        return DilationMatrix.from_flat(values, s)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def parse_mask_text(text: str, dilation: DilationMatrix | None = None) -> Mask:
    header: dict[str, tuple[str, int]] = {}
    raw_entries: list[tuple[int, str]] = []
    in_entries = False
    for lineno, line in enumerate(text.splitlines(), 1):
        body = _strip(line)
        if not body.strip():
            continue
        if not in_entries:
            if body.strip() == "entries:":
                in_entries = True
                continue
            if "=" not in body:
                raise FormatError(f"expected 'key = value', got {body.strip()!r}", lineno, 1)
            key, value = (t.strip() for t in body.split("=", 1))
            if key not in ("s", "n", "m", "dilation"):
                raise FormatError(f"unknown header key {key!r}", lineno, 1)
            if key in header:
                raise FormatError(f"duplicate header key {key!r}", lineno, 1)
            header[key] = (value, lineno)
        else:
            raw_entries.append((lineno, body))
    if not in_entries:
        raise FormatError("missing 'entries:' section")
    for key in ("s", "n", "m"):
        if key not in header:
            raise FormatError(f"missing header key {key!r}")
    ints = {}
    for key in ("s", "n", "m"):
        value, lineno = header[key]
        if not re.fullmatch(r"\d+", value) or int(value) < 1:
            raise FormatError(f"{key} must be a positive integer", lineno, 1)
        ints[key] = int(value)
    s, n, m = ints["s"], ints["n"], ints["m"]
    if "dilation" in header:
        value, lineno = header["dilation"]
        try:
            values = [int(t) for t in value.split(",")]
        except ValueError:
            raise FormatError("dilation must be comma-separated integers", lineno, 1) from None
        if len(values) != s * s:
            raise FormatError(f"dilation needs {s * s} entries for a square {s}x{s} matrix, got {len(values)}", lineno, 1)
        try:
            dilation = DilationMatrix.from_flat(values, s)
        except ValueError as exc:
            raise FormatError(str(exc), lineno, 1) from None
    elif dilation is None:
        raise FormatError("missing header key 'dilation' (or pass one explicitly)")
    elif dilation.s != s:
        raise FormatError(f"dilation is {dilation.s}x{dilation.s} but s = {s}")
    if not raw_entries:
        raise FormatError("empty mask")
    entries = {}
    for lineno, body in raw_entries:
        if "=" not in body:
            raise FormatError("expected '(index) = values'", lineno, 1)
        left, right = body.split("=", 1)
        alpha = _parse_index(left, lineno, 1)
        if len(alpha) != s:
            raise FormatError(f"index {format_index(alpha)} is not in Z^{s}", lineno, 1)
        if alpha in entries:
            raise FormatError(f"duplicate index {format_index(alpha)}", lineno, 1)
        tokens = [(mt.group(), mt.start()) for mt in re.finditer(r"\S+", right)]
        if len(tokens) != n * m:
            raise FormatError(f"expected {n * m} values for an {n}x{m} entry, got {len(tokens)}", lineno, len(left) + 2)
        offset = len(left) + 2
        vals = [parse_fraction(t, lineno, offset + c) for t, c in tokens]
        entries[alpha] = [vals[i * m:(i + 1) * m] for i in range(n)]
    return Mask(n, m, dilation, entries)


def parse_mask_file(path, dilation: DilationMatrix | None = None) -> Mask:
    return parse_mask_text(Path(path).read_text(), dilation)


def serialize_mask(mask: Mask) -> str:
    """Canonical text: fixed header order, zero entries dropped, sorted support."""
    lines = [f"s = {mask.s}", f"n = {mask.n}", f"m = {mask.m}", f"dilation = {mask.dilation}", "entries:"]
    for alpha, mat in mask.entries.items():
        values = " ".join(format_rational(v) for row in mat for v in row)
        lines.append(f"{format_index(alpha)} = {values}")
    return "\n".join(lines) + "\n"


_VERTEX = re.compile(r"vertex\s+(\(.*\))$")
_EDGE = re.compile(r"edge\s+(\([^)]*\))\s*->\s*(\([^)]*\))\s+d\s*=\s*(\S+)$")


def parse_graph_text(text: str) -> tuple[LatticeGraph, dict]:
    """Returns the graph and its edge weights ``d``. Edge endpoints are added as vertices."""
    vertices: list[MultiIndex] = []
    weights: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = _strip(line).strip()
        if not body:
            continue
        mv = _VERTEX.match(body)
        me = _EDGE.match(body)
        if mv:
            vertices.append(_parse_index(mv.group(1), lineno, mv.start(1) + 1))
        elif me:
            u = _parse_index(me.group(1), lineno, me.start(1) + 1)
            v = _parse_index(me.group(2), lineno, me.start(2) + 1)
            if (u, v) in weights:
                raise FormatError(f"duplicate edge {format_index(u)} -> {format_index(v)}", lineno, 1)
            weights[(u, v)] = parse_fraction(me.group(3), lineno, me.start(3) + 1)
        else:
            raise FormatError(f"expected a vertex or edge line, got {body!r}", lineno, 1)
    if not weights:
        raise FormatError("graph has no edges")
    seen = set(vertices)
    for u, v in weights:
        for p in (u, v):
            if p not in seen:
                seen.add(p)
                vertices.append(p)
    try:
        graph = LatticeGraph(tuple(vertices), tuple(weights))
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return graph, weights


def parse_graph_file(path) -> tuple[LatticeGraph, dict]:
    return parse_graph_text(Path(path).read_text())


def serialize_graph(graph: LatticeGraph, d) -> str:
    lines = [f"vertex {format_index(v)}" for v in graph.vertices]
    lines += [f"edge {format_index(u)} -> {format_index(v)} d={format_rational(d.get((u, v), 0))}" for u, v in graph.edges]
    return "\n".join(lines) + "\n"

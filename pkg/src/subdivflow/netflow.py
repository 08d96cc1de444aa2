"""Unit-cost network flows on lattice graphs.

For edge weights ``d`` on a directed graph ``G = (V, E)`` the problem

    max sum_{(u,v) in E} d_uv (x_u - x_v)   s.t.  |x_u - x_v| <= 1 on E

equals ``max sum_v b_v x_v`` over the same smooth potentials, where ``b`` is
the divergence of ``d``.  Its dual is the uncapacitated unit-cost flow problem
on the symmetric closure of ``E``; the solver here is successive shortest
paths with Dijkstra on reduced costs.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .lattice import MultiIndex, bounding_box, box_points, sub, unit_vector

Edge = tuple[MultiIndex, MultiIndex]


@dataclass(frozen=True)
class LatticeGraph:
    """Directed graph on lattice points; ``arcs`` is the symmetric closure of ``edges``."""

    vertices: tuple[MultiIndex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        verts = sorted({tuple(v) for v in self.vertices} | {x for e in self.edges for x in e})
        edges = tuple(sorted({(tuple(u), tuple(v)) for u, v in self.edges}))
        if len(edges) != len(self.edges):
            raise ValueError("duplicate edge")
        eset = set(edges)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if (v, u) in eset:
                raise ValueError(f"edge {u}->{v} appears in both orientations")
        object.__setattr__(self, "vertices", tuple(verts))
        object.__setattr__(self, "edges", edges)
        if verts and not self._connected():
            raise ValueError("graph is disconnected")

    def _connected(self) -> bool:
        adj = self.neighbours()
        seen = {self.vertices[0]}
        queue = deque(seen)
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    def neighbours(self) -> dict[MultiIndex, list[MultiIndex]]:
        adj: dict[MultiIndex, list[MultiIndex]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    @property
    def arcs(self) -> list[Edge]:
        return sorted(list(self.edges) + [(v, u) for u, v in self.edges])

    @property
    def s(self) -> int:
        return len(self.vertices[0]) if self.vertices else 0

    def is_unit_step(self) -> bool:
        return all(sum(abs(x) for x in sub(v, u)) == 1 for u, v in self.edges)

    def is_full_grid(self) -> bool:
        """Vertices fill their bounding box and every unit step between them is an edge."""
        if not self.is_unit_step():
            return False
        lo, hi = bounding_box(self.vertices)
        count = 1
        for a, b in zip(lo, hi):
            count *= b - a + 1
        if count != len(self.vertices):
            return False
        expected = sum((b - a) * count // (b - a + 1) for a, b in zip(lo, hi))
        return len(self.edges) == expected

    def axis_partition(self) -> dict[int, list[Edge]]:
        """``E_i``: edges stepping along coordinate ``i`` (unit-step graphs)."""
        parts: dict[int, list[Edge]] = {}
        for u, v in self.edges:
            step = sub(v, u)
            (axis,) = [i for i, x in enumerate(step) if x]
            parts.setdefault(axis, []).append((u, v))
        return parts


def build_difference_graph(points: Iterable[MultiIndex], directions: list[MultiIndex]) -> LatticeGraph:
    """``V = K u (K - xi)``, ``E = {(beta, beta - xi)}`` for ``beta`` in ``K``."""
    points = [tuple(p) for p in points]
    edges = [(beta, sub(beta, xi)) for beta in points for xi in directions]
    return LatticeGraph(tuple(points), tuple(edges))


def box_graph(lo: MultiIndex, hi: MultiIndex) -> LatticeGraph:
    """Full grid on a box, edges ``(u, u - e_l)`` whenever both ends lie in it."""
    pts = box_points(lo, hi)
    pset = set(pts)
    s = len(lo)
    edges = []
    for u in pts:
        for ell in range(s):
            v = sub(u, unit_vector(s, ell))
            if v in pset:
                edges.append((u, v))
    return LatticeGraph(tuple(pts), tuple(edges))


def divergence(G: LatticeGraph, d: Mapping[Edge, Fraction]) -> dict[MultiIndex, Fraction]:
    """``b_v = sum_out d - sum_in d``; always sums to zero."""
    b = {v: Fraction(0) for v in G.vertices}
    for u, v in G.edges:
        w = d.get((u, v), 0)
        b[u] += w
        b[v] -= w
    return b


def l1_norm(d: Mapping) -> Fraction:
    return sum((abs(x) for x in d.values()), Fraction(0))


@dataclass(frozen=True)
class Augmentation:
    source: MultiIndex
    sink: MultiIndex
    amount: Fraction
    # (tail, head, cancelling) arcs in path order; cancelling arcs push back flow on (head, tail).
    path: tuple[tuple[MultiIndex, MultiIndex, bool], ...]


@dataclass(frozen=True)
class FlowSolution:
    """Optimal flow on the symmetric closure and optimal smooth potentials.

    ``potentials`` maximize ``sum_v b_v x_v`` subject to ``|x_u - x_v| <= 1``.
    """

    flow: dict[Edge, Fraction]
    potentials: dict[MultiIndex, Fraction] | None
    value: Fraction
    method: str = "ssp"
    augmentations: tuple[Augmentation, ...] = field(default=(), compare=False)

    def dual_value(self, b: Mapping[MultiIndex, Fraction]) -> Fraction:
        return sum((b[v] * x for v, x in self.potentials.items()), Fraction(0))


Chooser = Callable[[list[MultiIndex], list[MultiIndex]], tuple[MultiIndex, MultiIndex]]


def _lexicographic(pos: list[MultiIndex], neg: list[MultiIndex]) -> tuple[MultiIndex, MultiIndex]:
    return pos[0], neg[0]


def _dijkstra(source, residual, pi):
    dist = {source: 0}
    pred: dict = {}
    heap = [(0, source)]
    done = set()
    while heap:
        du, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, cost, cancel in residual(u):
            rc = cost - pi[u] + pi[v]
            assert rc >= 0, "negative reduced cost"
            nd = du + rc
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = (u, cancel)
                heapq.heappush(heap, (nd, v))
    return dist, pred


def _bfs(source, adj):
    pred = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in sorted(adj[u]):
            if v not in pred:
                pred[v] = u
                queue.append(v)
    return pred


def solve_min_cost_flow(
    G: LatticeGraph,
    b: Mapping[MultiIndex, Fraction],
    choose: Chooser | None = None,
    residual: bool = True,
) -> FlowSolution:
    """Successive shortest paths for ``min sum f`` with divergence ``b``.

    ``choose`` picks ``(v_plus, v_minus)`` from the sorted excess and deficit
    lists; the default takes the lexicographically smallest of each.  With
    ``residual=False`` previous paths are never cancelled: this is the naive
    path-stacking heuristic, which is not optimal in general and returns no
    potentials.
    """
    if sum(b.values()) != 0:
        raise ValueError("divergences must sum to zero")
    choose = choose or _lexicographic
    excess = {v: Fraction(b.get(v, 0)) for v in G.vertices}
    adj = G.neighbours()
    flow: dict[Edge, Fraction] = {}
    pi = {v: 0 for v in G.vertices}
    trace = []

    def arcs_from(u):
        for v in adj[u]:
            yield v, 1, False
            if flow.get((v, u), 0) > 0:
                yield v, -1, True

    while True:
        pos = sorted(v for v, e in excess.items() if e > 0)
        if not pos:
            break
        neg = sorted(v for v, e in excess.items() if e < 0)
        vp, vm = choose(pos, neg)
        if residual:
            dist, pred = _dijkstra(vp, arcs_from, pi)
            path = []
            v = vm
            while v != vp:
                u, cancel = pred[v]
                path.append((u, v, cancel))
                v = u
        else:
            parent = _bfs(vp, adj)
            path = []
            v = vm
            while v != vp:
                path.append((parent[v], v, False))
                v = parent[v]
        path.reverse()
        gamma = min(excess[vp], -excess[vm])
        for u, v, cancel in path:
            if cancel:
                gamma = min(gamma, flow[(v, u)])
        for u, v, cancel in path:
            if cancel:
                left = flow[(v, u)] - gamma
                if left:
                    flow[(v, u)] = left
                else:
                    del flow[(v, u)]
            else:
                flow[(u, v)] = flow.get((u, v), 0) + gamma
        excess[vp] -= gamma
        excess[vm] += gamma
        trace.append(Augmentation(vp, vm, gamma, tuple(path)))
        if residual:
            for v in G.vertices:
                pi[v] -= dist[v]
            for u in G.vertices:
                for v, cost, _ in arcs_from(u):
                    assert cost - pi[u] + pi[v] >= 0, "reduced cost went negative"

    value = sum(flow.values(), Fraction(0))
    potentials = {v: Fraction(p) for v, p in pi.items()} if residual else None
    sol = FlowSolution(flow, potentials, value, "ssp" if residual else "naive", tuple(trace))
    if residual and G.is_full_grid():
        # shortcutting a non-monotone path needs the shifted path to exist
        assert check_monotone_support(G, flow), "optimal flow support is not monotone"
    return sol


def _flow_from_d(d: Mapping[Edge, Fraction]) -> dict[Edge, Fraction]:
    flow = {}
    for (u, v), w in d.items():
        if w > 0:
            flow[(u, v)] = Fraction(w)
        elif w < 0:
            flow[(v, u)] = Fraction(-w)
    return flow


def signed_d_fast_path(G: LatticeGraph, d: Mapping[Edge, Fraction]) -> FlowSolution | None:
    """Closed-form optimum when each axis class carries weights of one sign.

    An edge stepping ``u -> v`` along axis ``i`` has orientation
    ``sigma = u_i - v_i``; if ``sign(d_uv) * sigma`` is ``kappa_i`` or zero on
    every edge of ``E_i``, then ``f = (d^+, d^-)`` and ``x(v) = sum kappa_i v_i``
    are optimal with value ``||d||_1``.
    """
    if not G.is_unit_step():
        return None
    kappa = [1] * G.s
    seen = [False] * G.s
    for axis, edges in G.axis_partition().items():
        for u, v in edges:
            w = d.get((u, v), 0)
            if not w:
                continue
            k = (1 if w > 0 else -1) * (u[axis] - v[axis])
            if seen[axis] and k != kappa[axis]:
                return None
            kappa[axis], seen[axis] = k, True
    x = {v: Fraction(sum(k * c for k, c in zip(kappa, v))) for v in G.vertices}
    return FlowSolution(_flow_from_d(d), x, l1_norm(d), "signed")


def univariate_fast_path(G: LatticeGraph, d: Mapping[Edge, Fraction]) -> FlowSolution:
    """On a path graph flows are forced: ``z* = ||d||_1`` and ``d* = d``.

    The maximizing potentials step by ``sgn d_uv`` across each edge.
    """
    if G.s != 1 or len(G.edges) != len(G.vertices) - 1:
        raise ValueError("univariate fast path needs a path graph in Z^1")
    adj: dict[MultiIndex, list[Edge]] = {v: [] for v in G.vertices}
    for u, v in G.edges:
        adj[u].append((u, v))
        adj[v].append((u, v))
    root = G.vertices[0]
    x = {root: Fraction(0)}
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for u, v in adj[a]:
            w = d.get((u, v), 0)
            sgn = (w > 0) - (w < 0)
            if u == a and v not in x:
                x[v] = x[u] - sgn
                queue.append(v)
            elif v == a and u not in x:
                x[u] = x[v] + sgn
                queue.append(u)
    return FlowSolution(_flow_from_d(d), x, l1_norm(d), "univariate")


def solve_flow_problem(G: LatticeGraph, d: Mapping[Edge, Fraction]) -> FlowSolution:
    """Fast paths first, successive shortest paths otherwise."""
    if G.s == 1 and len(G.edges) == len(G.vertices) - 1:
        return univariate_fast_path(G, d)
    fast = signed_d_fast_path(G, d)
    if fast is not None:
        return fast
    return solve_min_cost_flow(G, divergence(G, d))


def solve_dual_value(G: LatticeGraph, d: Mapping[Edge, Fraction]) -> Fraction:
    """``max {sum d_uv (x_u - x_v) : x smooth}``, read off the optimal potentials."""
    sol = solve_flow_problem(G, d)
    x = sol.potentials
    return sum((w * (x[u] - x[v]) for (u, v), w in d.items()), Fraction(0))


def extract_optimal_d(G: LatticeGraph, d: Mapping[Edge, Fraction], solution: FlowSolution) -> dict[Edge, Fraction]:
    """``d*_uv = f_uv - f_vu`` on every edge of ``E``."""
    f = solution.flow
    return {(u, v): f.get((u, v), Fraction(0)) - f.get((v, u), Fraction(0)) for u, v in G.edges}


def check_monotone_support(G: LatticeGraph, flow: Mapping[Edge, Fraction]) -> bool:
    """True iff no directed path in the flow's support steps both ways along an axis."""
    succ: dict[MultiIndex, list[MultiIndex]] = {}
    arcs = [(u, v) for (u, v), w in flow.items() if w > 0]
    for u, v in arcs:
        succ.setdefault(u, []).append(v)

    reach: dict[MultiIndex, set] = {}

    def reachable(a):
        if a not in reach:
            seen = {a}
            stack = [a]
            while stack:
                x = stack.pop()
                for y in succ.get(x, ()):
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            reach[a] = seen
        return reach[a]

    for k in range(G.s):
        up = [(u, v) for u, v in arcs if v[k] > u[k]]
        down = [(u, v) for u, v in arcs if v[k] < u[k]]
        for a, b in up:
            for c, e in down:
                if c in reachable(b) or a in reachable(e):
                    return False
    return True

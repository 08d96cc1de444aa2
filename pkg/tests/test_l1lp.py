from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from oracles import box_lp_oracle
from reference_masks import BOX_SPLINE_B, TWO
from subdivflow.difference import DifferenceOperator, build_lp_data
from subdivflow.l1lp import assemble_optimal_mask, build_delta_matrix, l1_nullspace_distance, solve_box_lp
from subdivflow.lattice import box_points
from subdivflow.masks import operator_norm
from subdivflow.netflow import build_difference_graph, solve_flow_problem

NABLA = DifferenceOperator.nabla(2)


def dense(delta):
    return [[row.get(j, 0) for j in range(len(delta.cols))] for row in delta.entries]


def test_first_differences_on_a_line():
    delta = build_delta_matrix(DifferenceOperator.nabla(1), [(-1,), (0,)])
    assert delta.cols == (((-2,), 0), ((-1,), 0), ((0,), 0))
    assert dense(delta) == [[-1, 1, 0], [0, -1, 1]]


def test_second_difference_row():
    delta = build_delta_matrix(DifferenceOperator.nabla_k(1, 2), [(0,)])
    assert dense(delta) == [[1, -2, 1]]


def box_spline_subproblem():
    data = build_lp_data(BOX_SPLINE_B, 2, (2, 1), 2)
    return data, build_delta_matrix(NABLA, box_points(*data.box))


def test_box_spline_rows():
    data, delta = box_spline_subproblem()
    rows = dict(zip(delta.rows, delta.entries))
    col = {c: j for j, c in enumerate(delta.cols)}
    assert rows[((0, 0), 0)] == {col[((0, 0), 0)]: 1, col[((-1, 0), 0)]: -1}
    assert rows[((-1, -1), 0)] == {col[((-1, -1), 0)]: 1, col[((-2, -1), 0)]: -1}
    assert rows[((0, -1), 0)] == {col[((0, -1), 0)]: 1, col[((-1, -1), 0)]: -1}
    assert rows[((0, 0), 1)] == {col[((0, 0), 0)]: 1, col[((0, -1), 0)]: -1}
    assert rows[((-1, 0), 1)] == {col[((-1, 0), 0)]: 1, col[((-1, -1), 0)]: -1}


def test_box_spline_value():
    data, delta = box_spline_subproblem()
    sol = solve_box_lp(data.d, delta)
    assert sol.value == F(6, 16)
    assert sum(abs(v) for v in sol.d_star.values()) == F(6, 16)
    assert not any(v for v in delta.apply_transpose(sol.g).values())
    assert l1_nullspace_distance(data.d, delta)[0] == F(6, 16)


def test_reference_optimal_weights_are_feasible():
    data, delta = box_spline_subproblem()
    reference = {((0, -1), 0): F(1, 16), ((-1, -1), 0): F(-1, 16), ((0, 0), 1): F(1, 16), ((-1, 0), 1): F(3, 16)}
    assert delta.apply_transpose(reference) == delta.apply_transpose(data.d)
    assert sum(abs(v) for v in reference.values()) == F(6, 16)


def test_zero_weights():
    delta = build_delta_matrix(NABLA, box_points((0, 0), (1, 1)))
    sol = solve_box_lp({}, delta)
    assert sol.value == 0 and not any(sol.g.values()) and not any(sol.d_star.values())


def test_univariate_has_no_slack():
    delta = build_delta_matrix(DifferenceOperator.nabla(1), [(b,) for b in range(4)])
    d = {((0,), 0): F(1, 2), ((1,), 0): F(-2), ((3,), 0): F(1, 3)}
    sol = solve_box_lp(d, delta)
    assert sol.value == F(17, 6)
    assert all(sol.d_star[r] == d.get(r, 0) for r in delta.rows)
    assert not any(sol.g.values())


def test_nullspace_weights_vanish():
    delta = build_delta_matrix(NABLA, box_points((-1, -1), (0, 0)))
    d = {((0, 0), 0): F(1), ((-1, 0), 1): F(1), ((0, 0), 1): F(-1), ((0, -1), 0): F(-1)}
    assert not any(delta.apply_transpose(d).values())
    sol = solve_box_lp(d, delta)
    assert sol.value == 0 and not any(sol.d_star.values())


def test_assemble_zero():
    mask = assemble_optimal_mask({((0, 0), 1): {}}, TWO, 2)
    assert not mask.entries and operator_norm(mask) == 0


def test_assemble_places_entries():
    mask = assemble_optimal_mask({((1, 0), 2): {((-1, 0), 0): F(1, 4)}}, TWO, 2)
    assert mask.entries == {(3, 0): ((0, 0), (F(1, 4), 0))}


# -- randomized comparisons ---------------------------------------------------

weights = st.fractions(min_value=-2, max_value=2, max_denominator=4)
stencils = st.dictionaries(st.tuples(st.integers(-1, 1), st.integers(-1, 1)), st.integers(-2, 2),
                           min_size=2, max_size=3)


@st.composite
def instances(draw):
    kind = draw(st.sampled_from(["nabla", "nabla2", "random"]))
    if kind == "nabla":
        T = NABLA
    elif kind == "nabla2":
        T = DifferenceOperator.nabla_k(2, 2)
    else:
        rows = tuple({k: (v,) for k, v in draw(stencils).items()} for _ in range(draw(st.integers(1, 2))))
        T = DifferenceOperator(2, 1, rows)
    w, h = draw(st.sampled_from([(1, 1), (1, 2), (2, 1)] + ([(2, 2)] if kind == "nabla" else [])))
    pts = box_points((0, 0), (w - 1, h - 1))
    delta = build_delta_matrix(T, pts)
    d = {r: draw(weights) for r in delta.rows}
    return T, pts, delta, d


@settings(max_examples=100, deadline=None)
@given(instances())
def test_box_lp_matches_vertex_enumeration(inst):
    T, pts, delta, d = inst
    sol = solve_box_lp(d, delta)
    oracle = box_lp_oracle(dense(delta), [d[r] for r in delta.rows])
    assert sol.value == oracle
    l1 = sum(abs(v) for v in d.values())
    assert 0 <= sol.value <= l1
    assert sum(abs(v) for v in sol.d_star.values()) == sol.value
    assert not any(delta.apply_transpose(sol.g).values())
    y = delta.apply(sol.x)
    assert all(abs(v) <= 1 for v in y.values())
    assert sum(d[r] * y[r] for r in delta.rows) == sol.value
    dist, minimiser = l1_nullspace_distance(d, delta)
    assert dist == sol.value
    assert delta.apply_transpose(minimiser) == delta.apply_transpose(d)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(2, 2), (3, 2), (2, 3), (3, 3)]), st.data())
def test_flow_matches_lp_for_first_differences(shape, data):
    pts = box_points((0, 0), (shape[0] - 1, shape[1] - 1))
    delta = build_delta_matrix(NABLA, pts)
    d = {r: data.draw(weights) for r in delta.rows}
    G = build_difference_graph(pts, [(1, 0), (0, 1)])
    edge_d = {(beta, (beta[0] - (nu == 0), beta[1] - (nu == 1))): v for (beta, nu), v in d.items()}
    assert solve_flow_problem(G, edge_d).value == solve_box_lp(d, delta).value

from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from weakconj.certify import (
    check_adapted,
    check_admissible,
    check_position_function,
    check_semi_adapted,
    check_uniform,
    common_parent_counts,
    filter_adapted,
    find_position_function,
    full_sum,
    semi_sum,
    solve_semi_adapted,
)
from weakconj.graph_core import GraphError, UnorientedEdgeError, VertexFunction, fathers_and_sons, load_graph

from conftest import graph, vfun

F = Fraction


def walk_index(g, walk):
    """Independent index of a closed walk: +1 per step to a son, -1 per step to a father."""
    total = 0
    for x, y in zip(walk, walk[1:]):
        fathers, sons = fathers_and_sons(g, x)
        assert (y in sons) != (y in fathers)
        total += 1 if y in sons else -1
    return total


# --- position functions -------------------------------------------------------


def test_directed_z_position_function(z):
    cert = find_position_function(z)
    assert cert
    phi = cert.data["phi"]
    assert [phi(("o", (n,))) for n in range(-2, 3)] == [-2, -1, 0, 1, 2]


def test_bc2_position_function(bc2):
    phi = find_position_function(bc2).data["phi"]
    for lab in "ab":
        for n in range(-3, 4):
            assert phi((lab, (n,))) == n
    assert check_position_function(bc2, phi)


def test_directed_triangle_has_no_position_function():
    g = graph("odd_cycle_directed")
    cert = find_position_function(g)
    assert not cert
    walk = cert.witness["cycle"]
    assert walk[0] == walk[-1]
    assert walk_index(g, walk) == cert.witness["index"] == 3


def test_contradictory_slopes_witness():
    # edges of lengths 1 and 2 both pointing up: no integer-valued position function
    g = load_graph({"rank": 1, "cell": ["o"], "edges": [["o", "o", [1], "son"], ["o", "o", [2], "son"]]})
    cert = find_position_function(g)
    assert not cert
    w = cert.witness
    trans, index = 0, 0
    for (u, v, t), k in zip(w["edges"], w["multiplicities"]):
        e = (g.index(u), g.index(v), t)
        trans += k * t[0]
        index += k * (1 if g.orientation.sons[e] else -1)
    assert trans == 0
    assert index == w["index"] != 0


def test_unoriented_graph_is_an_error(k3):
    with pytest.raises(UnorientedEdgeError):
        find_position_function(k3)
    with pytest.raises(UnorientedEdgeError):
        check_uniform(k3)


def test_partially_oriented_graph_is_an_error():
    g = load_graph({"rank": 1, "cell": ["a", "b"], "edges": [["a", "b", [0], "son"], ["a", "b", [1]]]})
    with pytest.raises(UnorientedEdgeError):
        check_admissible(g)


def test_disconnected_quotient_reports_components():
    g = load_graph({"rank": 1, "cell": ["a", "b"], "edges": [["a", "a", [1], "son"], ["b", "b", [1], "son"]]})
    cert = find_position_function(g)
    assert cert and "disconnected-quotient" in cert.flags
    assert len(cert.data["components"]) == 2
    assert check_position_function(g, cert.data["phi"])


def test_component_slopes_that_differ():
    g = load_graph({"rank": 1, "cell": ["a", "b"], "edges": [["a", "a", [1], "son"], ["b", "b", [2], "son"]]})
    cert = find_position_function(g)
    assert cert and cert.data["phi"] is None
    assert "component-slopes-differ" in cert.flags
    assert [c["slope"] for c in cert.data["components"]] == [(F(1),), (F(1, 2),)]


def test_rational_slope_is_flagged():
    g = load_graph({"rank": 1, "cell": ["o"], "edges": [["o", "o", [2], "son"]]})
    cert = find_position_function(g)
    assert cert and "rational-values" in cert.flags
    assert check_position_function(g, cert.data["phi"])


# --- uniformity ---------------------------------------------------------------


def brute_counts(x, y, up):
    """Common fathers/sons on Z with edges n -> n + s for s in ``up``."""
    n, m = x[1][0], y[1][0]
    fx, fy = {n - s for s in up}, {m - s for s in up}
    sx, sy = {n + s for s in up}, {m + s for s in up}
    return len(fx & fy), len(sx & sy)


def test_uniform_examples(z, bc2):
    assert check_uniform(z)
    assert check_uniform(bc2)
    assert common_parent_counts(z, ("o", (0,)), ("o", (0,))) == (1, 1)
    assert common_parent_counts(z, ("o", (0,)), ("o", (2,))) == (0, 0)
    assert common_parent_counts(bc2, ("a", (0,)), ("b", (0,))) == (2, 2)


def test_doubled_son_edges_counts_match_enumeration():
    g = load_graph({"rank": 1, "cell": ["o"], "edges": [["o", "o", [1], "son"], ["o", "o", [2], "son"]]})
    x = ("o", (0,))
    assert common_parent_counts(g, x, ("o", (1,))) == (1, 1)
    for m in range(-4, 5):
        y = ("o", (m,))
        assert common_parent_counts(g, x, y) == brute_counts(x, y, (1, 2))
    assert check_uniform(g)


def test_non_uniform_witness():
    # a -> b and a -> c, nothing else: b and c share a father but no son
    g = load_graph({"rank": 0, "cell": ["a", "b", "c"], "edges": [["a", "b", [], "son"], ["a", "c", [], "son"]]})
    cert = check_uniform(g)
    assert not cert
    w = cert.witness
    assert (w["common_fathers"], w["common_sons"]) == common_parent_counts(g, w["x"], w["y"])
    assert w["common_fathers"] != w["common_sons"]
    assert not check_admissible(g)


def test_admissibility_examples(z, bc2):
    assert check_admissible(z)
    assert check_admissible(bc2)
    cert = check_admissible(graph("odd_cycle_directed"))
    assert not cert and cert.witness["failed"] == "position_function"


@pytest.mark.parametrize("name", ["z_lattice", "z2_lattice", "bc2_chain"])
def test_admissible_implies_position_function_adapted(name):
    g = graph(name)
    cert = check_admissible(g)
    assert cert
    assert check_adapted(g, cert.data["phi"])
    assert check_position_function(g, cert.data["phi"])


# --- adapted functions ----------------------------------------------------------


def test_z_position_is_semi_adapted_with_bound_one(z):
    cert = check_semi_adapted(z, vfun("z_position"))
    assert cert and cert.data["c"] == 1
    assert not cert.flags


def test_k3_bad_function_witness(k3):
    phi = vfun("k3_bad")
    cert = check_semi_adapted(k3, phi)
    assert not cert
    w = cert.witness
    assert semi_sum(k3, phi, w["x"], w["y"]) == w["sum"] != 0
    # the pair named in the usual hand computation fails the same way
    assert semi_sum(k3, phi, ("v1", ()), ("v2", ())) == 2


@pytest.mark.parametrize("gname, fname", [("z_lattice", "z_position"), ("bc2_chain", "bc2_position"),
                                          ("z2_lattice", "z2_position")])
def test_adapted_examples(gname, fname):
    assert check_adapted(graph(gname), vfun(fname))


def test_bc2_same_column_cubic_sum(bc2):
    phi = vfun("bc2_position")
    assert full_sum(bc2, phi, ("a", (0,)), ("b", (0,))) == 0
    assert semi_sum(bc2, phi, ("a", (0,)), ("b", (0,))) == 0


@pytest.mark.parametrize("name", ["z_lattice", "bc2_chain", "k3", "p3"])
def test_constant_is_adapted_but_degenerate(name):
    g = graph(name)
    cert = check_adapted(g, VertexFunction.constant(g, F(7, 3)))
    assert cert and "degenerate" in cert.flags


def test_cubic_sum_hand_values(k3, z):
    phi = vfun("k3_bad")
    # pair (v1, v2), common neighbour v3: (1 - 0)(1 - 0)(2 - 0 - 0)
    assert full_sum(k3, phi, ("v1", ()), ("v2", ())) == 2
    # pair (v3, v3), common neighbours v1, v2: 2 * (-1)(-1)(-2)
    assert full_sum(k3, phi, ("v3", ()), ("v3", ())) == -4
    pos = vfun("z_position")
    # x = y on Z: (-1)^2 (-2) + 1^2 * 2
    assert full_sum(z, pos, ("o", (0,)), ("o", (0,))) == 0
    assert full_sum(z, pos, ("o", (0,)), ("o", (2,))) == 0


def test_p3_linear_function_is_not_semi_adapted(p3):
    phi = VertexFunction({"v1": F(0), "v2": F(1), "v3": F(2)}, ())
    cert = check_semi_adapted(p3, phi)
    assert not cert
    # x = y = v1: the single common neighbour v2 contributes 2*1 - 0 - 0
    assert semi_sum(p3, phi, ("v1", ()), ("v1", ())) == 2
    assert cert.witness["sum"] == semi_sum(p3, phi, cert.witness["x"], cert.witness["y"])


def test_solver_examples(k3, p3):
    for g in (k3, p3):
        basis = solve_semi_adapted(g)
        assert len(basis) == 1
        assert basis[0].is_constant(g)
    k2 = load_graph({"rank": 0, "cell": ["v1", "v2"], "edges": [["v1", "v2", []]]})
    assert len(solve_semi_adapted(k2)) == 1


def test_solver_needs_finite_graph(z):
    with pytest.raises(GraphError):
        solve_semi_adapted(z)
    with pytest.raises(GraphError):
        filter_adapted(z, [])


def test_filter_adapted(k3, p3):
    const = VertexFunction.constant(p3, 1)
    line = VertexFunction({"v1": F(0), "v2": F(1), "v3": F(2)}, ())
    assert filter_adapted(p3, [const, line]) == [const]
    assert filter_adapted(k3, [VertexFunction.constant(k3, 0)]) == [VertexFunction.constant(k3, 0)]
    assert filter_adapted(k3, []) == []


# --- properties -------------------------------------------------------------------

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def finite_graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    cell = [f"v{i}" for i in range(n)]
    return load_graph({"rank": 0, "cell": cell, "edges": [[cell[i], cell[j], []] for i, j in chosen]}), chosen


@settings(max_examples=60, deadline=None)
@given(finite_graphs())
def test_solution_dimension_is_component_count(gc):
    g, chosen = gc
    oracle = nx.Graph()
    oracle.add_nodes_from(range(len(g.cell)))
    oracle.add_edges_from(chosen)
    basis = solve_semi_adapted(g)
    assert len(basis) == nx.number_connected_components(oracle)
    for phi in basis:
        assert check_semi_adapted(g, phi)


@settings(max_examples=40, deadline=None)
@given(finite_graphs(), st.lists(rationals, min_size=9, max_size=9))
def test_combinations_of_basis_stay_semi_adapted(gc, coeffs):
    g, _ = gc
    basis = solve_semi_adapted(g)
    offsets = {lab: sum((c * b.offsets[lab] for c, b in zip(coeffs, basis)), F(0)) for lab in g.cell}
    assert check_semi_adapted(g, VertexFunction(offsets, ()))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["z_lattice", "bc2_chain", "z2_lattice", "k3", "p3"]), st.data())
def test_affine_equivariance(name, data):
    g = graph(name)
    offsets = {lab: data.draw(rationals) for lab in g.cell}
    slope = tuple(data.draw(rationals) for _ in range(g.rank))
    phi = VertexFunction(offsets, slope)
    lam = data.draw(rationals.filter(lambda x: x != 0))
    shift = data.draw(rationals)
    a, b = check_semi_adapted(g, phi), check_semi_adapted(g, phi.scaled(lam, shift))
    assert a.verdict == b.verdict
    c = check_adapted(g, phi)
    assert c.verdict == check_adapted(g, phi.scaled(lam, shift)).verdict
    for cert, fn in ((a, semi_sum), (c, full_sum if c.witness and c.witness["condition"] == "full" else semi_sum)):
        if not cert:
            w = cert.witness
            assert fn(g, phi, w["x"], w["y"]) == w["sum"] != 0

import itertools
import math

import networkx as nx
import numpy as np
import pytest
from conftest import to_networkx
from hypothesis import given
from hypothesis import strategies as st

from robustcover.graph_core import (
    UnionFind,
    WeightedGraph,
    cut_of_side,
    distance_matrix,
    gomory_hu_tree,
    max_flow_min_cut,
    minimum_spanning_tree,
    shortest_paths,
)
from robustcover.harness.generate import random_connected_graph
from robustcover.oracle import exact_cover_cost
from robustcover.steiner import SteinerTreeProblem


@st.composite
def graphs(draw, min_n=2, max_n=8, connected=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(len(pairs), 14)))
    if connected:
        chosen = sorted(set(chosen) | {(i, i + 1) for i in range(n - 1)})
    costs = draw(st.lists(st.integers(0, 9), min_size=len(chosen), max_size=len(chosen)))
    return WeightedGraph(n, [(u, v, c) for (u, v), c in zip(chosen, costs)])


def test_union_find_merges_and_reports():
    uf = UnionFind(range(4))
    assert uf.union(0, 1) and uf.union(2, 3)
    assert not uf.union(1, 0)
    assert uf.same(0, 1) and not uf.same(1, 2)


def test_parallel_edges_are_summed_and_bad_input_rejected():
    g = WeightedGraph(3, [(0, 1, 2), (1, 0, 3), (1, 2, 1)])
    assert g.m == 2 and g.edges[0] == (0, 1, 5)
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 0, 1)])
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 1, -1)])
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 5, 1)])


def test_path_distance_and_contraction():
    g = WeightedGraph(3, [(0, 1, 2), (1, 2, 3)])
    assert shortest_paths(g, 0).dist[2] == 5
    assert shortest_paths(g, 0, [(0, 2)]).dist[2] == 0


def test_unreachable_is_infinite():
    g = WeightedGraph(3, [(0, 1, 1)])
    tree = shortest_paths(g, 0)
    assert tree.dist[2] == math.inf
    with pytest.raises(ValueError):
        tree.path_edges(2)


def _explicitly_contracted_distances(g, a, b):
    h = to_networkx(g)
    merged = nx.contracted_nodes(nx.MultiGraph(h), a, b, self_loops=False)
    simple = nx.Graph()
    simple.add_nodes_from(merged.nodes)
    for u, v, data in merged.edges(data=True):
        w = data["weight"]
        if not simple.has_edge(u, v) or simple[u][v]["weight"] > w:
            simple.add_edge(u, v, weight=w)
    lengths = dict(nx.all_pairs_dijkstra_path_length(simple))
    rep = lambda x: a if x == b else x
    return [[lengths[rep(u)].get(rep(v), math.inf) for v in range(g.n)] for u in range(g.n)]


def test_contracted_distances_match_explicit_contraction():
    # Five-vertex random graphs, one contracted pair, checked against networkx on the quotient graph.
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = random_connected_graph(rng, 5, 0.6, 9)
        a, b = 0, 3
        ours = distance_matrix(g, [(a, b)])
        theirs = _explicitly_contracted_distances(g, a, b)
        for u in range(g.n):
            for v in range(g.n):
                assert ours[u][v] == theirs[u][v]


@given(graphs(connected=True), st.data())
def test_path_extraction_realizes_distance(g, data):
    src = data.draw(st.integers(0, g.n - 1))
    tree = shortest_paths(g, src)
    ref = nx.single_source_dijkstra_path_length(to_networkx(g), src)
    for v in range(g.n):
        assert tree.dist[v] == ref[v]
        assert g.cost(tree.path_edges(v)) == tree.dist[v]


@given(graphs(), st.data())
def test_contraction_is_monotone(g, data):
    pairs = data.draw(st.lists(st.tuples(st.integers(0, g.n - 1), st.integers(0, g.n - 1)), max_size=3))
    src = data.draw(st.integers(0, g.n - 1))
    prev = shortest_paths(g, src).dist
    for j in range(1, len(pairs) + 1):
        cur = shortest_paths(g, src, pairs[:j]).dist
        assert all(c <= p for c, p in zip(cur, prev))
        prev = cur


def test_max_flow_spec_examples(triangle):
    path = WeightedGraph(3, [(0, 1, 3), (1, 2, 2)])
    flow, cut = max_flow_min_cut(path, 0, 2)
    assert flow == 2 and cut.edges == frozenset({path.edge_id(1, 2)})
    assert max_flow_min_cut(triangle, 0, 1)[0] == 2
    k4 = WeightedGraph(4, [(u, v, 1) for u, v in itertools.combinations(range(4), 2)])
    assert max_flow_min_cut(k4, 0, 3)[0] == 3


def test_disconnected_flow_is_zero():
    g = WeightedGraph(4, [(0, 1, 5), (2, 3, 5)])
    flow, cut = max_flow_min_cut(g, 0, 3)
    assert flow == 0 and cut.edges == frozenset()


def test_overlapping_terminal_sets_rejected(triangle):
    with pytest.raises(ValueError):
        max_flow_min_cut(triangle, {0, 1}, {1})


@given(graphs(min_n=3), st.data())
def test_max_flow_matches_networkx_and_its_cut(g, data):
    vs = list(range(g.n))
    sources = data.draw(st.lists(st.sampled_from(vs), min_size=1, max_size=2, unique=True))
    sinks = data.draw(st.lists(st.sampled_from([v for v in vs if v not in sources]), min_size=1, max_size=2, unique=True))
    flow, cut = max_flow_min_cut(g, sources, sinks)
    h = to_networkx(g)
    h.add_edges_from((("S", s) for s in sources), capacity=math.inf)
    h.add_edges_from((("T", t) for t in sinks), capacity=math.inf)
    assert flow == nx.maximum_flow_value(h, "S", "T")
    assert cut.cost == flow == cut_of_side(g, cut.side).cost
    assert all(not g.connected(s, t, removed=cut.edges) for s in sources for t in sinks)


@pytest.mark.parametrize("seed", range(6))
def test_gomory_hu_pairwise_property(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, 8, 0.45, 9)
    tree = gomory_hu_tree(g)
    assert len(tree.tree_edges) == g.n - 1
    h = to_networkx(g)
    for u, v in itertools.combinations(range(g.n), 2):
        assert tree.min_cut(u, v) == nx.minimum_cut_value(h, u, v)


def test_gomory_hu_small_cases(triangle):
    tree = gomory_hu_tree(triangle)
    assert all(tree.min_cut(u, v) == 2 for u, v in itertools.combinations(range(3), 2))
    star = WeightedGraph(4, [(0, 1, 1), (0, 2, 2), (0, 3, 3)])
    st_tree = gomory_hu_tree(star)
    assert sorted((min(a, b), max(a, b), w) for a, b, w in st_tree.tree_edges) == [(0, 1, 1), (0, 2, 2), (0, 3, 3)]


def test_mst_examples():
    tri = WeightedGraph(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)])
    assert minimum_spanning_tree(tri)[1] == 3
    assert minimum_spanning_tree(tri, [0, 2])[1] == 3  # direct edge and two-edge path tie
    with pytest.raises(ValueError):
        minimum_spanning_tree(WeightedGraph(3, [(0, 1, 1)]), [0, 2])


@given(graphs(connected=True))
def test_mst_matches_networkx(g):
    assert minimum_spanning_tree(g)[1] == nx.minimum_spanning_tree(to_networkx(g)).size(weight="weight")


@pytest.mark.parametrize("seed", range(8))
def test_closure_mst_within_twice_exact_steiner_tree(seed):
    rng = np.random.default_rng(100 + seed)
    g = random_connected_graph(rng, 7, 0.5, 9)
    terminals = [int(v) for v in rng.choice(7, size=4, replace=False)]
    problem = SteinerTreeProblem(g, terminals)
    exact = exact_cover_cost(problem, range(4))[0]
    edges, cost = minimum_spanning_tree(problem.graph, terminals)
    assert exact <= cost <= 2 * exact
    assert problem.satisfies(edges, range(4))

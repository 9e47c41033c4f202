import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from conftest import to_networkx
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from robustcover.graph_core import WeightedGraph, max_flow_min_cut
from robustcover.harness.generate import random_connected_graph
from robustcover.lp_core import (
    GVY_CONSTANT,
    CoveringLP,
    InfeasibleLPError,
    fractional_multicut,
    gvy_region_growing,
    solve_covering_lp,
)


def test_single_forced_cover():
    sol = solve_covering_lp(CoveringLP(1, (frozenset({0}),), (1,)))
    assert sol.primal == (1,) and sol.dual == (1,) and sol.objective == 1


def test_triangle_system_half_integral():
    lp = CoveringLP(3, (frozenset({0, 1}), frozenset({1, 2}), frozenset({0, 2})), (1, 1, 1))
    sol = solve_covering_lp(lp)
    assert sol.objective == Fraction(3, 2)
    assert sol.primal == (Fraction(1, 2),) * 3


def test_single_row_picks_cheaper_column():
    sol = solve_covering_lp(CoveringLP(1, (frozenset({0}), frozenset({0})), (3, 5)))
    assert sol.primal == (1, 0) and sol.dual == (3,)


def test_uncovered_row_is_reported():
    with pytest.raises(InfeasibleLPError) as err:
        CoveringLP(3, (frozenset({0}), frozenset({2})), (1, 1))
    assert err.value.rows == (1,)


@st.composite
def covering_lps(draw):
    rows = draw(st.integers(1, 6))
    cols = draw(st.integers(1, 7))
    columns = [frozenset(draw(st.sets(st.integers(0, rows - 1), max_size=rows))) for _ in range(cols)]
    for r in range(rows):
        if not any(r in c for c in columns):
            j = draw(st.integers(0, cols - 1))
            columns[j] = columns[j] | {r}
    costs = draw(st.lists(st.integers(0, 12), min_size=cols, max_size=cols))
    return CoveringLP(rows, tuple(columns), tuple(costs))


@given(covering_lps())
def test_covering_lp_matches_scipy_and_slackness(lp):
    sol = solve_covering_lp(lp)
    assert sum(sol.dual) == sol.objective == sum(c * x for c, x in zip(lp.costs, sol.primal))
    a = np.array([[1.0 if r in col else 0.0 for col in lp.columns] for r in range(lp.n_rows)])
    ref = linprog(np.array(lp.costs, dtype=float), A_ub=-a, b_ub=-np.ones(lp.n_rows), bounds=(0, None), method="highs")
    assert ref.status == 0
    assert abs(float(sol.objective) - ref.fun) < 1e-7
    for j, col in enumerate(lp.columns):
        if sol.primal[j] > 0:
            assert sum(sol.dual[r] for r in col) == lp.costs[j]
    for r in range(lp.n_rows):
        if sol.dual[r] > 0:
            assert sum(sol.primal[j] for j, col in enumerate(lp.columns) if r in col) == 1


# ---------------------------------------------------------------- fractional multicut


def _distance_after(g, lengths, s):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    for e, (u, v, _) in enumerate(g.edges):
        h.add_edge(u, v, weight=lengths[e])
    return nx.single_source_dijkstra_path_length(h, s)


def _path_lp(g, pairs, hop_cap=10):
    h = to_networkx(g)
    rows = []
    for s, t in pairs:
        for path in nx.all_simple_paths(h, s, t, cutoff=hop_cap):
            rows.append({g.edge_id(a, b) for a, b in zip(path, path[1:])})
    columns = tuple(frozenset(r for r, p in enumerate(rows) if e in p) for e in range(g.m))
    return solve_covering_lp(CoveringLP(len(rows), columns, tuple(c for _, _, c in g.edges))).objective


def test_single_pair_fractional_equals_min_cut():
    rng = np.random.default_rng(3)
    g = random_connected_graph(rng, 7, 0.5, 9)
    frac = fractional_multicut(g, [(0, 6)], 0.05)
    cut = max_flow_min_cut(g, 0, 6)[0]
    assert frac.flow_value <= cut + 1e-9 <= frac.cost * (1 + 1e-9) + 1e-9
    assert frac.cost <= 1.05 * cut + 1e-9


def test_shared_bridge_costs_one():
    # Two triangles joined by a unit bridge; both pairs cross it.
    g = WeightedGraph(6, [(0, 1, 5), (1, 2, 5), (0, 2, 5), (2, 3, 1), (3, 4, 5), (4, 5, 5), (3, 5, 5)])
    frac = fractional_multicut(g, [(0, 4), (1, 5)], 0.05)
    assert _path_lp(g, [(0, 4), (1, 5)]) == 1
    assert 1 - 1e-9 <= frac.cost <= 1.05 + 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_fractional_multicut_near_path_lp(seed):
    rng = np.random.default_rng(40 + seed)
    g = random_connected_graph(rng, 8, 0.35, 9)
    pairs = [(0, 7), (1, 6), (2, 5)]
    tol = 0.05
    frac = fractional_multicut(g, pairs, tol)
    exact = float(_path_lp(g, pairs))
    assert frac.flow_value <= exact * (1 + 1e-9)
    assert exact <= frac.cost * (1 + 1e-9)
    assert frac.cost <= (1 + tol) ** 2 * exact + 1e-9
    for s, t in pairs:
        assert _distance_after(g, frac.lengths, s)[t] >= 1 - tol


def test_nonpositive_tolerance_rejected(triangle):
    with pytest.raises(ValueError):
        fractional_multicut(triangle, [(0, 1)], 0)


# ---------------------------------------------------------------- region growing


def test_region_growing_single_pair_is_a_cut():
    rng = np.random.default_rng(8)
    g = random_connected_graph(rng, 7, 0.5, 9)
    frac = fractional_multicut(g, [(0, 5)])
    cut = gvy_region_growing(g, [(0, 5)], frac)
    mincut = max_flow_min_cut(g, 0, 5)[0]
    assert not g.connected(0, 5, removed=cut)
    assert mincut <= g.cost(cut) <= GVY_CONSTANT * math.log(g.n + 1) * mincut * 1.05


def test_region_growing_cuts_a_forced_edge():
    g = WeightedGraph(2, [(0, 1, 4)])
    frac = fractional_multicut(g, [(0, 1)])
    assert frac.lengths[0] >= 1 - 1e-9
    assert gvy_region_growing(g, [(0, 1)], frac) == frozenset({0})


@pytest.mark.parametrize("seed", range(6))
def test_region_growing_separates_and_is_cheap(seed):
    rng = np.random.default_rng(60 + seed)
    g = random_connected_graph(rng, 10, 0.3, 9)
    pairs = [tuple(int(x) for x in rng.choice(10, size=2, replace=False)) for _ in range(3)]
    frac = fractional_multicut(g, pairs)
    cut = gvy_region_growing(g, pairs, frac)
    for s, t in pairs:
        assert not g.connected(s, t, removed=cut)
    assert g.cost(cut) <= GVY_CONSTANT * math.log(g.n + 1) * frac.cost + 1e-9

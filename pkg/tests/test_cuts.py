import itertools
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from conftest import all_ksets, small_graph_spec, to_networkx

from robustcover.cuts import (
    MinCutAlgorithm,
    MinCutProblem,
    MulticutAlgorithm,
    MulticutProblem,
    discriminating_mincut,
    discriminating_multicut,
    expensive_terminals,
    maxmin_mincut_greedy,
    mincut_beta,
    multicut_beta,
    multicut_parameters,
)
from robustcover.framework import RobustInstance, instance_grid
from robustcover.graph_core import WeightedGraph, max_flow_min_cut
from robustcover.harness.generate import generate_instance
from robustcover.lp_core import GVY_CONSTANT
from robustcover.oracle import exact_maxmin_value, exact_robust_opt
from robustcover.pipeline import solve_robust


def _star(leaves=4, cost=1):
    return WeightedGraph(leaves + 1, [(0, i, cost) for i in range(1, leaves + 1)])


def test_beta_constants():
    e = math.e
    assert abs(float(mincut_beta()) - 10 * e / (e - 1)) < 1e-14
    n = 10
    expected = 4 * math.log(n) * 16 * math.log(n) / (0.25 * math.log(math.log(n)))
    assert abs(float(multicut_beta(n)) / expected - 1) < 1e-12
    assert multicut_beta(2) == multicut_beta(4)
    a1, a2 = multicut_parameters(n)
    assert abs(float(a1) - 2 * GVY_CONSTANT * math.log(n + 1)) < 1e-12
    assert a2 > a1 > 0


def test_constructor_errors():
    g = _star()
    with pytest.raises(ValueError):
        MinCutProblem(g, 0, [0, 1])
    with pytest.raises(ValueError):
        MinCutProblem(g, 0, [7])
    with pytest.raises(ValueError):
        MulticutProblem(g, [(1, 1)])
    with pytest.raises(ValueError):
        MulticutProblem(g, [(1, 9)])


def test_huge_threshold_keeps_first_stage_empty():
    p = MinCutProblem(_star(), 0, [1, 2, 3, 4])
    out = discriminating_mincut(p, 2, 10**6)
    assert out.first_stage == frozenset() and out.info["expensive"] == frozenset()
    for i, aug in enumerate(out.singleton_augment):
        assert p.second_stage_cost(aug) == 1 <= out.beta * 10**6 / 2


def test_zero_threshold_cuts_the_whole_star():
    p = MinCutProblem(_star(), 0, [1, 2, 3, 4])
    out = discriminating_mincut(p, 2, 0)
    assert out.first_stage == frozenset(range(4))
    assert all(a == frozenset() for a in out.singleton_augment)
    assert (out.alpha1, out.alpha2, out.beta) == (3, out.beta / 2, mincut_beta())


@pytest.mark.parametrize("seed", range(8))
def test_expensive_set_matches_fresh_flows(seed):
    inst = generate_instance(small_graph_spec("mincut", n=8, terminals=5), seed)
    p = inst.problem
    nxg = to_networkx(p.graph)
    beta = mincut_beta()
    for T in list(instance_grid(inst))[::4]:
        S = expensive_terminals(p, inst.k, T, beta).members
        for i, t in enumerate(p.terminals):
            flow = nx.maximum_flow_value(nxg, p.root, t)
            assert (i in S) == (flow >= beta * T / inst.k)


@pytest.mark.parametrize("seed", range(8))
def test_mincut_first_stage_and_property_a(seed):
    inst = generate_instance(small_graph_spec("mincut", n=8, terminals=5), seed)
    p = inst.problem
    alg = MinCutAlgorithm(p, inst.k, inst.lam)
    for T in [Fraction(0), *list(instance_grid(inst))[::3]]:
        out = alg.run(T)
        S = out.info["expensive"]
        assert p.satisfies(out.first_stage, S)
        if S:
            assert p.graph.cost(out.first_stage) == p.cut_value(S)
        for i, aug in enumerate(out.singleton_augment):
            assert p.second_stage_cost(aug) <= out.beta * T / inst.k
        for D in all_ksets(p.n_requirements, inst.k):
            assert p.satisfies(out.first_stage.union(*(out.singleton_augment[i] for i in D)), D)


def test_desk_mincut_ratio():
    inst = generate_instance(small_graph_spec("mincut", n=8, terminals=4, k=2, lam=2, max_edges=13), 3)
    sol = solve_robust(inst)
    assert sol.objective_exact < 17 * exact_robust_opt(inst).robust_opt


def test_greedy_k1_is_exact():
    inst = generate_instance(small_graph_spec("mincut", n=8, terminals=5), 2)
    p = inst.problem
    res = maxmin_mincut_greedy(p, 1)
    assert res.value == max(p.root_cut(i)[0] for i in range(5))


def test_greedy_on_disjoint_cuts_is_exact():
    g = WeightedGraph(5, [(0, 1, 4), (0, 2, 7), (0, 3, 1), (0, 4, 5)])
    p = MinCutProblem(g, 0, [1, 2, 3, 4])
    res = maxmin_mincut_greedy(p, 2)
    assert res.requirements == (1, 3) and res.value == 12
    assert maxmin_mincut_greedy(p, 9).value == 17


@pytest.mark.parametrize("seed", range(6))
def test_greedy_beats_one_minus_inverse_e(seed):
    inst = generate_instance(small_graph_spec("mincut", n=8, terminals=5), seed)
    p = inst.problem
    best = max(p.cut_value(D) for D in itertools.combinations(range(5), 2))
    assert exact_maxmin_value(p, 2)[0] == best
    assert maxmin_mincut_greedy(p, 2).value >= (1 - 1 / math.e) * best


@pytest.mark.parametrize("seed", range(4))
def test_cut_function_is_submodular(seed):
    inst = generate_instance(small_graph_spec("mincut", n=8, terminals=5), seed)
    p = inst.problem
    rng = np.random.default_rng(seed)
    n = p.n_requirements
    for _ in range(30):
        B = {i for i in range(n) if rng.random() < 0.6}
        A = {i for i in B if rng.random() < 0.5}
        rest = [x for x in range(n) if x not in B]
        if not rest:
            continue
        x = int(rng.choice(rest))
        gain_a = p.cut_value(A | {x}) - p.cut_value(A)
        gain_b = p.cut_value(B | {x}) - p.cut_value(B)
        assert gain_a >= gain_b >= 0


@pytest.mark.parametrize("seed", range(8))
def test_low_terminals_are_cheap_after_the_optimal_first_stage(seed):
    # Emergent check: at T = T*, the expensive terminals whose cut in G minus
    # Phi* stays below (beta/2)T*/k can be separated in G minus Phi* for 2 Phi*.
    inst = generate_instance(small_graph_spec("mincut", n=7, terminals=4, max_edges=11), seed)
    p = inst.problem
    report = exact_robust_opt(inst)
    phi, k, beta = report.first_stage, inst.k, mincut_beta()
    T = Fraction(report.t_star)
    S = expensive_terminals(p, k, T, beta).members
    low = set()
    for i in S:
        value, _ = max_flow_min_cut(p.graph, p.root, p.terminals[i], removed=phi)
        if value < beta / 2 * T / k:
            low.add(i)
    assert p.cut_value(low, removed=phi) <= 2 * report.phi_star


# ---------------------------------------------------------------- multicut


def test_multicut_single_pair_huge_threshold():
    g = WeightedGraph(4, [(0, 1, 2), (1, 2, 3), (0, 2, 4), (2, 3, 1)])
    p = MulticutProblem(g, [(0, 3)])
    out = discriminating_multicut(p, 1, 10**6)
    assert out.first_stage == frozenset() and out.info["expensive"] == frozenset()
    assert p.second_stage_cost(out.singleton_augment[0]) == 1
    assert p.satisfies(out.singleton_augment[0], [0])


def test_multicut_zero_threshold_separates_everything():
    inst = generate_instance(small_graph_spec("multicut", n=8, pairs=3), 1)
    p = inst.problem
    out = discriminating_multicut(p, inst.k, 0)
    assert out.info["expensive"] == frozenset(range(3))
    assert p.satisfies(out.first_stage, range(3))


def test_multicut_custom_beta():
    inst = generate_instance(small_graph_spec("multicut", n=8, pairs=3), 1)
    alg = MulticutAlgorithm(inst.problem, inst.k, 1, beta=5)
    assert alg.beta == 5 and alg.run(1).beta == 5


@pytest.mark.parametrize("seed", range(3))
def test_multicut_desk_feasibility(seed):
    inst = generate_instance(small_graph_spec("multicut", n=10, pairs=3, max_edges=15, density=0.3), seed)
    inst = RobustInstance(inst.problem, 2, 5)
    p = inst.problem
    sol = solve_robust(inst)
    assert sol.objective_exact is not None and math.isfinite(sol.objective_exact)
    for D in all_ksets(3, 2):
        assert p.satisfies(sol.first_stage | sol.augment(D), D)
    # Second-stage cuts are computed in G itself, not in G minus the first stage.
    alg = MulticutAlgorithm(p, 2, 5)
    out = alg.run(1)
    for i in range(3):
        if i not in out.info["expensive"]:
            assert out.singleton_augment[i] == p.pair_cut(i)[1]

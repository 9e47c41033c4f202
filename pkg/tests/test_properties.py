"""Cross-module invariants on hypothesis-drawn instances and thresholds."""

from fractions import Fraction

from conftest import small_graph_spec
from hypothesis import given, settings
from hypothesis import strategies as st

from robustcover.framework import RobustSolution, evaluate_robust_objective
from robustcover.harness.generate import GeneratorSpec, generate_instance
from robustcover.harness.io import format_instance, parse_instance_text
from robustcover.oracle import exact_cover_cost, exact_robust_opt
from robustcover.pipeline import algorithm_for, solve_maxmin, solve_robust

ROBUST_KINDS = ["setcover", "setcover_nonuniform", "steiner_tree", "steiner_tree_unrooted", "steiner_forest", "mincut", "multicut"]


def _instance(kind, seed, k, lam):
    if kind.startswith("setcover"):
        spec = GeneratorSpec(kind, n=6, m=5, k=k, lam=1 if kind.endswith("nonuniform") else lam)
    else:
        spec = small_graph_spec(kind, n=7, k=k, lam=lam, terminals=4, pairs=3, max_edges=11)
    return generate_instance(spec, seed)


kinds = st.sampled_from(ROBUST_KINDS)
seeds = st.integers(0, 10**6)
lams = st.sampled_from([1, Fraction(3, 2), 2, 5])


@given(kinds, seeds, st.integers(1, 3), lams, st.fractions(0, 200))
def test_augmentations_respect_the_threshold(kind, seed, k, lam, T):
    inst = _instance(kind, seed, k, lam)
    p = inst.problem
    out = algorithm_for(inst).run(T)
    for i, aug in enumerate(out.singleton_augment):
        assert p.second_stage_cost(aug) <= out.beta * T / inst.k
        assert p.satisfies(out.first_stage | aug, [i])


@given(kinds, seeds, st.integers(1, 2), lams)
@settings(max_examples=25)
def test_bound_evaluation_dominates_exact(kind, seed, k, lam):
    inst = _instance(kind, seed, k, lam)
    sol = algorithm_for(inst).run(Fraction(seed % 17))
    candidate = RobustSolution(sol.first_stage, sol.singleton_augment, sol.T)
    assert evaluate_robust_objective(candidate, inst, "exact") <= evaluate_robust_objective(candidate, inst, "bound")


@given(st.sampled_from(ROBUST_KINDS[:-1]), seeds, st.integers(1, 2), lams)
@settings(max_examples=25)
def test_solutions_are_feasible_and_never_beat_the_oracle(kind, seed, k, lam):
    inst = _instance(kind, seed, k, lam)
    p = inst.problem
    sol = solve_robust(inst)
    report = exact_robust_opt(inst)
    assert sol.objective_exact >= report.robust_opt
    for D in report.scenario_costs:
        assert p.satisfies(sol.first_stage | sol.augment(D), D)


@given(st.sampled_from(["setcover", "steiner_tree", "steiner_tree_unrooted", "steiner_forest"]), seeds, st.integers(1, 3))
@settings(max_examples=25)
def test_maxmin_certificates_bracket_the_witness(kind, seed, k):
    inst = _instance(kind, seed, k, 1)
    res = solve_maxmin(inst, seed)
    assert len(res.witness) == inst.k
    assert exact_cover_cost(inst.problem, res.witness)[0] >= res.certified_lower
    assert res.certified_lower <= res.universal_upper


@given(kinds, seeds, st.integers(1, 3), lams)
def test_round_trip_preserves_everything(kind, seed, k, lam):
    inst = _instance(kind, seed, k, lam)
    text = format_instance(inst)
    again = parse_instance_text(text)
    assert format_instance(again) == text
    assert again.problem.first_cost == inst.problem.first_cost

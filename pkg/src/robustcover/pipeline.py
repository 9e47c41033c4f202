"""Problem registry and the two end-to-end pipelines."""

from __future__ import annotations

from .cuts import (
    MinCutAlgorithm,
    MinCutProblem,
    MulticutAlgorithm,
    MulticutProblem,
    maxmin_mincut_greedy,
)
from .framework import (
    DEFAULT_ENUMERATION_CAP,
    MaxMinResult,
    RobustInstance,
    RobustSolution,
    ThresholdAlgorithm,
    better_solution,
    run_guess_and_verify,
    run_maxmin_driver,
    trivial_second_stage_solution,
)
from .setcover import SetCoverAlgorithm, SetSystem
from .steiner import (
    SteinerForestAlgorithm,
    SteinerForestProblem,
    SteinerTreeAlgorithm,
    SteinerTreeProblem,
)

ALGORITHMS = {
    SetSystem: SetCoverAlgorithm,
    SteinerTreeProblem: SteinerTreeAlgorithm,
    SteinerForestProblem: SteinerForestAlgorithm,
    MinCutProblem: MinCutAlgorithm,
    MulticutProblem: MulticutAlgorithm,
}


def algorithm_for(instance: RobustInstance) -> ThresholdAlgorithm:
    try:
        cls = ALGORITHMS[type(instance.problem)]
    except KeyError:
        raise TypeError(f"no threshold algorithm for {type(instance.problem).__name__}") from None
    return cls(instance.problem, instance.k, instance.lam)


def problem_label(problem) -> str:
    return getattr(problem, "kind_label", problem.kind)


def solve_robust(instance: RobustInstance, cap: int = DEFAULT_ENUMERATION_CAP) -> RobustSolution:
    """Better of the guess-and-verify threshold solution and the second-stage-only one."""
    threshold = run_guess_and_verify(instance, algorithm_for(instance))
    trivial = trivial_second_stage_solution(instance)
    return better_solution(instance, [threshold, trivial], cap)


def solve_maxmin(instance: RobustInstance, seed: int = 0):
    """Max-min pipeline: the threshold driver, or greedy for minimum cut."""
    if isinstance(instance.problem, MinCutProblem):
        return maxmin_mincut_greedy(instance.problem, instance.k)
    if isinstance(instance.problem, MulticutProblem):
        raise ValueError("max-min multicut is not supported")
    return run_maxmin_driver(instance.with_params(lam=1), algorithm_for(instance.with_params(lam=1)), seed)


__all__ = ["ALGORITHMS", "algorithm_for", "problem_label", "solve_robust", "solve_maxmin", "MaxMinResult"]

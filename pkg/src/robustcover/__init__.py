"""Two-stage k-robust covering: threshold algorithms, drivers and exact oracles."""

from .cuts import MinCutProblem, MulticutProblem, maxmin_mincut_greedy
from .framework import (
    DEFAULT_EPSILON,
    EnumerationCapError,
    MaxMinResult,
    RobustInstance,
    RobustSolution,
    build_threshold_grid,
    evaluate_robust_objective,
    run_guess_and_verify,
    run_maxmin_driver,
    trivial_second_stage_solution,
)
from .graph_core import WeightedGraph
from .oracle import OracleReport, exact_cover_cost, exact_maxmin_value, exact_robust_opt
from .pipeline import algorithm_for, solve_maxmin, solve_robust
from .setcover import SetSystem
from .steiner import SteinerForestProblem, SteinerTreeProblem

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_EPSILON",
    "EnumerationCapError",
    "MaxMinResult",
    "MinCutProblem",
    "MulticutProblem",
    "OracleReport",
    "RobustInstance",
    "RobustSolution",
    "SetSystem",
    "SteinerForestProblem",
    "SteinerTreeProblem",
    "WeightedGraph",
    "algorithm_for",
    "build_threshold_grid",
    "evaluate_robust_objective",
    "exact_cover_cost",
    "exact_maxmin_value",
    "exact_robust_opt",
    "maxmin_mincut_greedy",
    "run_guess_and_verify",
    "run_maxmin_driver",
    "solve_maxmin",
    "solve_robust",
    "trivial_second_stage_solution",
]

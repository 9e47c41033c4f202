"""Batch experiments: solve, compare with the oracle, and emit ratio reports."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from ..cuts import MinCutProblem, MulticutProblem
from ..framework import (
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapError,
    RobustInstance,
    attach_exact_objective,
    scenario_count,
)
from ..oracle import exact_cover_cost, exact_maxmin_value, exact_robust_opt
from ..pipeline import algorithm_for, problem_label, solve_maxmin, solve_robust
from ..setcover import SetSystem
from ..steiner import SteinerForestProblem, SteinerTreeProblem
from .generate import GeneratorSpec, generate_instance
from .io import parse_instance

WORKERS_ENV = "ROBUSTCOVER_WORKERS"

# Headline constants for the combined (better-of-two) algorithms.
HEADLINE_RATIO = {
    SteinerTreeProblem: Fraction(9, 2),
    SteinerForestProblem: Fraction(10),
    MinCutProblem: Fraction(17),
}

ROBUST_COLUMNS = (
    "id", "problem", "k", "lambda", "algorithm", "chosen_T", "first_stage", "worst_second",
    "objective_exact", "objective_bound", "oracle_opt", "ratio", "ratio_bound", "feasible", "status",
)
MAXMIN_COLUMNS = (
    "id", "problem", "k", "witness", "certified_lower", "oracle_maxmin", "upper", "ratio", "ratio_bound", "status",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run. Either ``generator`` with ``seeds`` or a list of ``paths``."""

    mode: str = "robust"
    generator: GeneratorSpec | None = None
    seeds: tuple[int, ...] = (0,)
    paths: tuple[str, ...] = ()
    k: int | None = None
    lam: object = None
    epsilon: object = None
    oracle: bool = True
    cap: int = DEFAULT_ENUMERATION_CAP
    solver_seed: int = 0


@dataclass
class RatioReport:
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)

    @property
    def ratios(self) -> list[Fraction]:
        return [r["ratio"] for r in self.rows if r["ratio"] is not None]

    @property
    def max_ratio(self):
        return max(self.ratios, default=None)

    @property
    def mean_ratio(self):
        rs = self.ratios
        return sum(rs, Fraction(0)) / len(rs) if rs else None

    @property
    def bound_violations(self) -> list[dict]:
        return [r for r in self.rows if r["status"] == "bound-violation"]

    @property
    def infeasible(self) -> list[dict]:
        return [r for r in self.rows if r.get("feasible") is False]

    def exit_code(self) -> int:
        if self.infeasible:
            return 3
        if self.bound_violations:
            return 2
        return 0

    def to_tsv(self) -> str:
        lines = ["# " + "\t".join(self.columns)]
        for row in self.rows:
            lines.append("\t".join(_cell(row[c]) for c in self.columns))
        if self.ratios:
            lines.append(f"# max_ratio\t{float(self.max_ratio):.6f}\tmean_ratio\t{float(self.mean_ratio):.6f}")
        return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{float(value):.6f}"
    if isinstance(value, (tuple, list, frozenset)):
        return ",".join(str(x) for x in sorted(value)) or "{}"
    return str(value)


def ratio_bound(instance: RobustInstance) -> Fraction | None:
    """The asserted ratio bound for the combined algorithm, or None (multicut)."""
    p = instance.problem
    if isinstance(p, MulticutProblem):
        return None
    if isinstance(p, SetSystem):
        return algorithm_for(instance).driver_bound(instance.lam, instance.epsilon)
    return HEADLINE_RATIO[type(p)] * (1 + instance.epsilon)


def check_feasible(solution, instance: RobustInstance, cap: int = DEFAULT_ENUMERATION_CAP) -> bool | None:
    p, k = instance.problem, instance.k
    if scenario_count(p.n_requirements, k) > cap:
        return None
    return all(
        p.satisfies(solution.first_stage | solution.augment(D), D) for D in combinations(range(p.n_requirements), k)
    )


def _load(config: ExperimentConfig, source) -> RobustInstance:
    inst = parse_instance(source) if isinstance(source, str) else generate_instance(config.generator, source)
    changes = {}
    if config.k is not None:
        changes["k"] = min(config.k, inst.problem.n_requirements)
    if config.lam is not None:
        changes["lam"] = config.lam
    if config.epsilon is not None:
        changes["epsilon"] = config.epsilon
    return inst.with_params(**changes) if changes else inst


def robust_row(instance: RobustInstance, ident, config: ExperimentConfig) -> dict:
    p = instance.problem
    sol = solve_robust(instance, config.cap)
    row = {c: None for c in ROBUST_COLUMNS}
    row.update(
        id=ident, problem=problem_label(p), k=instance.k, algorithm=sol.label,
        chosen_T=sol.chosen_T, first_stage=p.first_stage_cost(sol.first_stage),
        objective_bound=sol.objective_upper, ratio_bound=ratio_bound(instance), status="ok",
    )
    row["lambda"] = instance.lam
    try:
        if sol.objective_exact is None:
            attach_exact_objective(sol, instance, config.cap)
        row["objective_exact"] = sol.objective_exact
        row["worst_second"] = (sol.objective_exact - row["first_stage"]) / instance.lam
    except EnumerationCapError:
        pass
    row["feasible"] = check_feasible(sol, instance, config.cap)
    if config.oracle:
        try:
            report = exact_robust_opt(instance, config.cap)
            row["oracle_opt"] = report.robust_opt
            value = row["objective_exact"]
            if value is not None and report.robust_opt:
                row["ratio"] = value / report.robust_opt
            elif value is not None:
                # A zero optimum is only matched by a zero objective.
                row["ratio"] = Fraction(1) if value == 0 else None
                if value:
                    row["status"] = "bound-violation"
        except EnumerationCapError:
            row["status"] = "feasibility-only"
    if row["feasible"] is False:
        row["status"] = "infeasible"
    elif row["status"] == "ok" and row["ratio"] is not None and row["ratio_bound"] is not None and row["ratio"] > row["ratio_bound"]:
        row["status"] = "bound-violation"
    return row


def maxmin_row(instance: RobustInstance, ident, config: ExperimentConfig) -> dict:
    p = instance.problem
    instance = instance.with_params(lam=1)
    result = solve_maxmin(instance, config.solver_seed)
    row = {c: None for c in MAXMIN_COLUMNS}
    row.update(id=ident, problem=problem_label(p), k=instance.k, status="ok")
    if isinstance(p, MinCutProblem):
        row.update(witness=result.requirements, certified_lower=Fraction(result.value))
        row["ratio_bound"] = 1 - Fraction(math.exp(-1))
    else:
        alg = algorithm_for(instance)
        row.update(witness=result.witness, certified_lower=result.certified_lower, upper=result.universal_upper)
        row["ratio_bound"] = 1 / ((1 + instance.epsilon) * (alg.alpha2 + alg.beta))
    if config.oracle:
        try:
            value, _ = exact_maxmin_value(p, instance.k, config.cap)
            row["oracle_maxmin"] = value
            lower = row["certified_lower"]
            row["ratio"] = Fraction(1) if value == 0 else lower / value
            witness_cost = exact_cover_cost(p, row["witness"])[0]
            bad = witness_cost < lower or row["ratio"] < row["ratio_bound"]
            if row["upper"] is not None and value > row["upper"]:
                bad = True
            if bad:
                row["status"] = "bound-violation"
        except EnumerationCapError:
            row["status"] = "feasibility-only"
    return row


def _run_one(args) -> dict:
    config, ident, source = args
    instance = _load(config, source)
    if config.mode == "robust":
        return robust_row(instance, ident, config)
    if config.mode == "maxmin":
        return maxmin_row(instance, ident, config)
    raise ValueError(f"unknown experiment mode {config.mode!r}")


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, not {raw!r}") from None


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> RatioReport:
    """Rows come back in instance order whatever the worker count."""
    if config.paths:
        jobs = [(config, str(i), path) for i, path in enumerate(config.paths)]
    elif config.generator is not None:
        jobs = [(config, f"seed{s}", s) for s in config.seeds]
    else:
        raise ValueError("experiment needs instance paths or a generator")
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(job) for job in jobs]
    columns = ROBUST_COLUMNS if config.mode == "robust" else MAXMIN_COLUMNS
    return RatioReport(columns, rows)


__all__ = [
    "ExperimentConfig",
    "RatioReport",
    "check_feasible",
    "ratio_bound",
    "run_experiment",
]

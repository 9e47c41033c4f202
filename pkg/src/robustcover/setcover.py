"""Robust set cover: the threshold algorithm, its two-cost variant, and the
randomized dual-rounding witness used for max-min set cover."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .framework import (
    DEFAULT_WITNESS_RETRIES,
    CoveringProblem,
    DiscriminatingOutput,
    ThresholdAlgorithm,
    Witness,
    harmonic,
    high_precision,
    integral_scale,
    rational_above,
)
from .lp_core import CoveringLP, solve_covering_lp


class UncoverableElementError(ValueError):
    def __init__(self, element: int):
        self.element = element
        super().__init__(f"element {element} is covered by no set")


class SetSystem(CoveringProblem):
    """Universe 0..n-1 and a family of sets with first/second-stage costs.

    Without ``second_costs`` the system is uniform: the base second-stage cost
    of each set equals its first-stage cost and the robust instance's lambda
    supplies the inflation. With ``second_costs`` (requires b <= c) the costs
    are used as given and lambda should be 1.
    """

    kind = "setcover"

    def __init__(self, n: int, sets: Sequence[Iterable[int]], costs: Sequence, second_costs: Sequence | None = None):
        self.n = n
        self.sets = tuple(frozenset(s) for s in sets)
        if len(costs) != len(self.sets):
            raise ValueError("one cost per set required")
        self.uniform = second_costs is None
        raw_second = list(costs) if second_costs is None else list(second_costs)
        if len(raw_second) != len(self.sets):
            raise ValueError("one second-stage cost per set required")
        scaled, self.scale = integral_scale(list(costs) + raw_second)
        m = len(self.sets)
        self.first_cost = tuple(scaled[:m])
        self.second_cost = tuple(scaled[m:])
        if any(c < 0 for c in scaled):
            raise ValueError("set costs must be nonnegative")
        for j, s in enumerate(self.sets):
            if any(e < 0 or e >= n for e in s):
                raise ValueError(f"set {j} contains an element outside 0..{n - 1}")
        for j, (b, c) in enumerate(zip(self.first_cost, self.second_cost)):
            if b > c:
                raise ValueError(f"set {j}: first-stage cost exceeds second-stage cost")
        self.containing = tuple(tuple(j for j, s in enumerate(self.sets) if e in s) for e in range(n))
        for e in range(n):
            if not self.containing[e]:
                raise UncoverableElementError(e)
        self.offline_ratio = float(harmonic(n))

    def __repr__(self) -> str:
        return f"SetSystem(n={self.n}, m={self.m}, uniform={self.uniform})"

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def n_requirements(self) -> int:
        return self.n

    def costs(self, which: str) -> tuple:
        if which == "b":
            return self.first_cost
        if which == "c":
            return self.second_cost
        raise ValueError(f"cost selector must be 'b' or 'c', not {which!r}")

    def covered(self, chosen: Iterable[int]) -> frozenset:
        return frozenset().union(*(self.sets[j] for j in chosen)) if chosen else frozenset()

    def satisfies(self, elements, scenario) -> bool:
        return set(scenario) <= self.covered(list(elements))

    def cheapest_set(self, element: int, which: str = "c") -> int:
        cost = self.costs(which)
        return min(self.containing[element], key=lambda j: (cost[j], j))

    def singleton_solution(self, requirement: int) -> frozenset:
        return frozenset({self.cheapest_set(requirement, "c")})

    def offline_solution(self, scenario) -> frozenset:
        return frozenset(greedy_set_cover(self, scenario, "c")[0])


def setcover_beta(m: int) -> Fraction:
    """36 ln m, rounded up to a rational."""
    if m <= 1:
        return Fraction(0)
    return rational_above(high_precision(lambda: 36 * Decimal(m).ln()))


@dataclass(frozen=True)
class ExpensiveElementSet:
    elements: frozenset
    threshold: Fraction


def expensive_elements(sys: SetSystem, k: int, T, beta: Fraction, which: str = "c") -> ExpensiveElementSet:
    """Elements whose cheapest covering set costs at least beta*T/k."""
    threshold = beta * Fraction(T) / k
    cost = sys.costs(which)
    chosen = frozenset(e for e in range(sys.n) if cost[sys.cheapest_set(e, which)] >= threshold)
    return ExpensiveElementSet(chosen, threshold)


def greedy_set_cover(sys: SetSystem, targets: Iterable[int], which: str = "b") -> tuple[list[int], int]:
    """Repeatedly buy the set with the lowest cost per newly covered target."""
    remaining = set(targets)
    for e in remaining:
        if not 0 <= e < sys.n:
            raise ValueError(f"target {e} is outside the universe")
        if not sys.containing[e]:
            raise UncoverableElementError(e)
    cost = sys.costs(which)
    chosen: list[int] = []
    while remaining:
        best, best_cost, best_gain = None, None, 0
        for j, s in enumerate(sys.sets):
            gain = len(s & remaining)
            if gain == 0:
                continue
            # Compare cost/gain without division.
            if best is None or cost[j] * best_gain < best_cost * gain:
                best, best_cost, best_gain = j, cost[j], gain
        chosen.append(best)
        remaining -= sys.sets[best]
    return chosen, sum(cost[j] for j in chosen)


def _threshold_cover(sys: SetSystem, k: int, T: Fraction, filter_by: str, buy_by: str) -> DiscriminatingOutput:
    beta = setcover_beta(sys.m)
    H = harmonic(sys.n)
    expensive = expensive_elements(sys, k, T, beta, filter_by)
    chosen, _ = greedy_set_cover(sys, expensive.elements, buy_by)
    augment = tuple(
        frozenset() if e in expensive.elements else frozenset({sys.cheapest_set(e, filter_by)}) for e in range(sys.n)
    )
    return DiscriminatingOutput(
        T, frozenset(chosen), augment, H, 12 * H, beta, info={"expensive": expensive.elements}
    )


def discriminating_set_cover(sys: SetSystem, k: int, T, lam=1) -> DiscriminatingOutput:
    """Buy a greedy cover of the expensive elements; others wait for stage two.

    Parameters (H_n, 12 H_n, 36 ln m). Lambda does not enter the rule itself.
    """
    return _threshold_cover(sys, k, Fraction(T), "b", "b")


def nonuniform_discriminating_set_cover(sys: SetSystem, k: int, T) -> DiscriminatingOutput:
    """Filter by second-stage cost, buy by first-stage cost."""
    return _threshold_cover(sys, k, Fraction(T), "c", "b")


@dataclass(frozen=True)
class CoarseCostVector:
    unit: Fraction
    costs: dict


def coarse_costs(sys: SetSystem, elements: frozenset, k: int, T: Fraction, beta: Fraction | None = None) -> CoarseCostVector:
    """ceil(c_R / (6T/k)) for the sets touching ``elements``."""
    unit = 6 * Fraction(T) / k
    residual = sorted({j for e in elements for j in sys.containing[e]})
    costs = {j: math.ceil(Fraction(sys.second_cost[j]) / unit) for j in residual}
    if beta is not None and beta >= 6:
        for j, cj in costs.items():
            c = sys.second_cost[j]
            if not (c <= cj * unit < 2 * c) or cj < beta / 6:
                raise AssertionError(f"coarse cost of set {j} breaks its invariants")
    return CoarseCostVector(unit, costs)


def sample_rounded_dual(y: Sequence[Fraction], rng: np.random.Generator) -> list[int]:
    """Y_e = floor(y_e) + Bernoulli(frac(y_e))."""
    out = []
    for value in y:
        whole = math.floor(value)
        frac = value - whole
        out.append(whole + (1 if frac > 0 and rng.random() < frac else 0))
    return out


def is_dual_feasible(sys: SetSystem, rows: Sequence[int], values: Sequence, coarse: CoarseCostVector, divisor=3) -> bool:
    """Does values/divisor pack under the coarse costs?"""
    weight = dict(zip(rows, values))
    return all(
        sum(weight.get(e, 0) for e in sys.sets[j]) <= divisor * cj for j, cj in coarse.costs.items()
    )


def _top_k(rows: Sequence[int], values: Sequence, k: int) -> list[int]:
    order = sorted(range(len(rows)), key=lambda idx: (-values[idx], rows[idx]))
    return [rows[idx] for idx in order[:k]]


def maxmin_setcover_witness(
    sys: SetSystem,
    k: int,
    T,
    seed: int | np.random.Generator = 0,
    retries: int = DEFAULT_WITNESS_RETRIES,
    expensive: frozenset | None = None,
) -> Witness:
    """k expensive elements whose cover provably costs more than T.

    Solves the coarse-cost dual LP over the expensive elements exactly and
    rounds it randomly; a sample is accepted when a third of it still packs
    under the coarse costs and its k largest entries sum to at least k. Since
    coarse cost times 3T/k is below the true cost, (T/k)*Y restricted to Q is
    then a packing for the true costs worth at least T.
    """
    T = Fraction(T)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    beta = setcover_beta(sys.m)
    if expensive is None:
        expensive = expensive_elements(sys, k, T, beta, "c").elements
    rows = sorted(expensive)
    if not rows or T <= 0:
        return Witness(tuple(rows[:k]), Fraction(0), rounded=False)
    coarse = coarse_costs(sys, expensive, k, T, beta)
    cols = sorted(coarse.costs)
    index = {e: r for r, e in enumerate(rows)}
    lp = CoveringLP(
        len(rows),
        tuple(frozenset(index[e] for e in sys.sets[j] if e in index) for j in cols),
        tuple(coarse.costs[j] for j in cols),
    )
    y = list(solve_covering_lp(lp).dual)
    for attempt in range(retries):
        Y = sample_rounded_dual(y, rng)
        chosen = _top_k(rows, Y, k)
        total = sum(Y[index[e]] for e in chosen)
        if total >= k and is_dual_feasible(sys, rows, Y, coarse) and beta >= 6:
            certificate = _packing_value(sys, {e: T / k * Y[index[e]] for e in chosen}, strict=True)
            return Witness(tuple(sorted(chosen)), certificate, True, {"attempts": attempt + 1})
    chosen = _top_k(rows, y, k)
    # y packs under the coarse costs, and (3T/k) * coarse < true cost once beta >= 6.
    certificate = _packing_value(sys, {e: 3 * T / k * y[index[e]] for e in chosen}, strict=beta >= 6)
    return Witness(tuple(sorted(chosen)), certificate, False, {"attempts": retries})


def _packing_value(sys: SetSystem, weights: dict, strict: bool) -> Fraction:
    """Value of a packing for the true costs; scaled down to feasibility unless strict."""
    factor = Fraction(1)
    for j, s in enumerate(sys.sets):
        load = sum(weights.get(e, 0) for e in s)
        if load > sys.second_cost[j]:
            if strict:
                raise AssertionError(f"witness certificate overpacks set {j}")
            factor = min(factor, Fraction(sys.second_cost[j]) / load)
    return factor * sum(weights.values(), Fraction(0))


class SetCoverAlgorithm(ThresholdAlgorithm):
    name = "threshold-setcover"

    def __init__(self, problem: SetSystem, k: int, lam=1):
        super().__init__(problem, k, lam)
        if not problem.uniform and self.lam != 1:
            raise ValueError("two-cost set systems carry their own second-stage costs; use lambda = 1")
        self.alpha1 = harmonic(problem.n)
        self.alpha2 = 12 * self.alpha1
        self.beta = setcover_beta(problem.m)

    def _run(self, T):
        if self.problem.uniform:
            return discriminating_set_cover(self.problem, self.k, T, self.lam)
        return nonuniform_discriminating_set_cover(self.problem, self.k, T)

    def witness(self, T, output, rng):
        return maxmin_setcover_witness(self.problem, self.k, T, rng, expensive=output.info["expensive"])

    def driver_bound(self, lam, epsilon):
        # Two-cost instances are priced with their own second-stage costs (lambda = 1).
        if not self.problem.uniform:
            lam = 1
        return super().driver_bound(lam, epsilon)

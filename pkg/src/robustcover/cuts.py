"""Robust minimum cut, robust multicut, and greedy max-min minimum cut.

Both problems use deletion semantics: a set of edges satisfies a scenario when
removing it separates every scenario terminal from the root (min-cut) or every
scenario pair (multicut).

Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence

from .framework import (
    DiscriminatingOutput,
    ThresholdAlgorithm,
    high_precision,
    rational_above,
)
from .graph_core import WeightedGraph, max_flow_min_cut
from .lp_core import (
    GVY_CONSTANT,
    FractionalMulticut,
    fractional_multicut,
    gvy_region_growing,
)
from .steiner import _GraphProblem

DEFAULT_MULTICUT_EPSILON = Fraction(1, 4)
DEFAULT_FLOW_TOLERANCE = 0.05


class MinCutProblem(_GraphProblem):
    """Cut each scenario terminal away from a fixed root."""

    kind = "mincut"
    offline_ratio = 1.0

    def __init__(self, graph: WeightedGraph, root: int, terminals: Sequence[int]):
        if not terminals:
            raise ValueError("at least one terminal is required")
        self._setup_graph(graph)
        self.root = int(root)
        self.terminals = tuple(int(t) for t in terminals)
        for v in (self.root,) + self.terminals:
            if not 0 <= v < graph.n:
                raise ValueError(f"vertex {v} is outside the graph")
        if self.root in self.terminals:
            raise ValueError("the root cannot also be a terminal")
        self._root_cut: dict[int, tuple] = {}

    @property
    def n_requirements(self) -> int:
        return len(self.terminals)

    def root_cut(self, requirement: int) -> tuple:
        """(value, edges) of a minimum cut between the root and one terminal in G."""
        if requirement not in self._root_cut:
            value, cut = max_flow_min_cut(self.graph, self.root, self.terminals[requirement])
            self._root_cut[requirement] = (value, cut.edges)
        return self._root_cut[requirement]

    def cut_value(self, scenario: Iterable[int], removed: Iterable[int] = ()) -> int:
        sources = {self.terminals[i] for i in scenario}
        return max_flow_min_cut(self.graph, sources, self.root, removed)[0] if sources else 0

    def satisfies(self, elements, scenario) -> bool:
        removed = frozenset(elements)
        return not any(self.graph.connected(self.root, self.terminals[i], removed=removed) for i in scenario)

    def singleton_solution(self, requirement: int) -> frozenset:
        return self.root_cut(requirement)[1]

    def offline_solution(self, scenario) -> frozenset:
        sources = {self.terminals[i] for i in scenario}
        if not sources:
            return frozenset()
        return max_flow_min_cut(self.graph, sources, self.root)[1].edges


class MulticutProblem(_GraphProblem):
    """Separate each scenario pair. Offline solutions come from region growing."""

    kind = "multicut"

    def __init__(self, graph: WeightedGraph, pairs: Sequence[tuple[int, int]], flow_tolerance: float = DEFAULT_FLOW_TOLERANCE):
        if not pairs:
            raise ValueError("at least one pair is required")
        self._setup_graph(graph)
        self.pairs = tuple((int(s), int(t)) for s, t in pairs)
        for s, t in self.pairs:
            if not (0 <= s < graph.n and 0 <= t < graph.n):
                raise ValueError(f"pair ({s}, {t}) uses a vertex outside the graph")
            if s == t:
                raise ValueError(f"pair ({s}, {t}) has identical endpoints")
        self.flow_tolerance = flow_tolerance
        self.offline_ratio = GVY_CONSTANT * math.log(graph.n + 1) * (1 + flow_tolerance)
        self._pair_cut: dict[int, tuple] = {}
        self._multicut: dict[frozenset, tuple] = {}

    @property
    def n_requirements(self) -> int:
        return len(self.pairs)

    def pair_cut(self, requirement: int) -> tuple:
        """(value, edges) of a minimum cut between the two ends of a pair in G."""
        if requirement not in self._pair_cut:
            s, t = self.pairs[requirement]
            value, cut = max_flow_min_cut(self.graph, s, t)
            self._pair_cut[requirement] = (value, cut.edges)
        return self._pair_cut[requirement]

    def satisfies(self, elements, scenario) -> bool:
        removed = frozenset(elements)
        return not any(self.graph.connected(*self.pairs[i], removed=removed) for i in scenario)

    def singleton_solution(self, requirement: int) -> frozenset:
        return self.pair_cut(requirement)[1]

    def region_growing_multicut(self, requirements: Iterable[int]) -> tuple[frozenset, FractionalMulticut | None]:
        """Integral multicut for a pair subset, cached by the subset."""
        key = frozenset(requirements)
        if key not in self._multicut:
            live = [self.pairs[i] for i in sorted(key) if self.graph.connected(*self.pairs[i])]
            if not live:
                self._multicut[key] = (frozenset(), None)
            else:
                frac = fractional_multicut(self.graph, live, self.flow_tolerance)
                self._multicut[key] = (gvy_region_growing(self.graph, live, frac), frac)
        return self._multicut[key]

    def offline_solution(self, scenario) -> frozenset:
        return self.region_growing_multicut(scenario)[0]


# ---------------------------------------------------------------- minimum cut


def mincut_beta() -> Fraction:
    """10e/(e-1), rounded up to a rational."""

    def value() -> Decimal:
        e = Decimal(1).exp()
        return 10 * e / (e - 1)

    return rational_above(high_precision(value))


@dataclass(frozen=True)
class ExpensiveTerminalSet:
    members: frozenset
    threshold: Fraction


def expensive_terminals(problem: MinCutProblem, k: int, T, beta: Fraction) -> ExpensiveTerminalSet:
    threshold = beta * Fraction(T) / k
    members = frozenset(i for i in range(problem.n_requirements) if problem.root_cut(i)[0] >= threshold)
    return ExpensiveTerminalSet(members, threshold)


def discriminating_mincut(problem: MinCutProblem, k: int, T, lam=1) -> DiscriminatingOutput:
    """Cut all expensive terminals from the root at once; cut the rest later.

    Remaining terminals are cut in the graph with the first stage removed.
    Parameters (3, beta/2, beta).
    """
    T = Fraction(T)
    beta = mincut_beta()
    expensive = expensive_terminals(problem, k, T, beta)
    g = problem.graph
    if expensive.members:
        sources = {problem.terminals[i] for i in expensive.members}
        _, cut = max_flow_min_cut(g, sources, problem.root)
        first = cut.edges
    else:
        first = frozenset()
    augment = []
    for i, t in enumerate(problem.terminals):
        if i in expensive.members:
            augment.append(frozenset())
        else:
            augment.append(max_flow_min_cut(g, problem.root, t, removed=first)[1].edges)
    return DiscriminatingOutput(
        T, first, tuple(augment), Fraction(3), beta / 2, beta, info={"expensive": expensive.members}
    )


class MinCutAlgorithm(ThresholdAlgorithm):
    name = "threshold-mincut"

    def __init__(self, problem: MinCutProblem, k: int, lam=1):
        super().__init__(problem, k, lam)
        self.beta = mincut_beta()
        self.alpha1 = Fraction(3)
        self.alpha2 = self.beta / 2

    def _run(self, T):
        return discriminating_mincut(self.problem, self.k, T, self.lam)


@dataclass(frozen=True)
class GreedyCutResult:
    requirements: tuple[int, ...]
    value: int
    gains: tuple[int, ...]


def maxmin_mincut_greedy(problem: MinCutProblem, k: int) -> GreedyCutResult:
    """Greedy maximization of the cut function f(Q) = mincut(r, Q).

    f is monotone submodular, so k greedy steps reach (1 - 1/e) of the best
    k-set. Ties go to the lowest terminal index; k above |U| is truncated.
    """
    k = min(k, problem.n_requirements)
    chosen: list[int] = []
    value, gains = 0, []
    for _ in range(k):
        best = None
        for i in range(problem.n_requirements):
            if i in chosen:
                continue
            v = problem.cut_value(chosen + [i])
            if best is None or v > best[0]:
                best = (v, i)
        gains.append(best[0] - value)
        value = best[0]
        chosen.append(best[1])
    return GreedyCutResult(tuple(sorted(chosen)), value, tuple(gains))


# ---------------------------------------------------------------- multicut


def racke_placeholder(n: int) -> Decimal:
    """Stand-in for the oblivious-routing factor rho = O(log n): 4 ln n."""
    return 4 * Decimal(n).ln()


def multicut_beta(n: int, epsilon=DEFAULT_MULTICUT_EPSILON, rho=None) -> Fraction:
    """rho * 16 ln n / (epsilon * ln ln n), rounded up to a rational.

    ``n`` is clamped to at least 4 so the double logarithm stays comfortably
    positive. ``rho`` defaults to the placeholder 4 ln n.
    """
    n = max(n, 4)
    epsilon = Fraction(epsilon)

    def value() -> Decimal:
        r = racke_placeholder(n) if rho is None else Decimal(str(rho))
        ln_n = Decimal(n).ln()
        eps = Decimal(epsilon.numerator) / Decimal(epsilon.denominator)
        return r * 16 * ln_n / (eps * ln_n.ln())

    return rational_above(high_precision(value))


def multicut_parameters(n: int, epsilon=DEFAULT_MULTICUT_EPSILON, rho=None) -> tuple[Fraction, Fraction]:
    """Declared (alpha1, alpha2); recorded in reports, never asserted.

    alpha1 = 2 * GVY_CONSTANT * ln(n+1): the Gomory-Hu argument loses a factor
    2 against the optimal first stage before region growing.
    alpha2 = 8 * e * rho * ln^eps(n) * GVY_CONSTANT * ln(n+1): the dual-rounding
    fractional bound before region growing.
    """
    n = max(n, 4)
    epsilon = Fraction(epsilon)

    def values() -> tuple[Decimal, Decimal]:
        r = racke_placeholder(n) if rho is None else Decimal(str(rho))
        eps = Decimal(epsilon.numerator) / Decimal(epsilon.denominator)
        gvy = GVY_CONSTANT * Decimal(n + 1).ln()
        alpha = Decimal(1).exp() * r * (eps * Decimal(n).ln().ln()).exp()
        return 2 * gvy, 8 * alpha * gvy

    a1, a2 = high_precision(values)
    return rational_above(a1), rational_above(a2)


def discriminating_multicut(problem: MulticutProblem, k: int, T, lam=1, beta: Fraction | None = None) -> DiscriminatingOutput:
    """Region-grow a multicut for the expensive pairs; cut the others in G later."""
    T = Fraction(T)
    if beta is None:
        beta = multicut_beta(problem.graph.n)
    threshold = beta * T / k
    expensive = frozenset(i for i in range(problem.n_requirements) if problem.pair_cut(i)[0] >= threshold)
    first, _ = problem.region_growing_multicut(expensive)
    augment = tuple(
        frozenset() if i in expensive else problem.pair_cut(i)[1] for i in range(problem.n_requirements)
    )
    a1, a2 = multicut_parameters(problem.graph.n)
    return DiscriminatingOutput(T, first, augment, a1, a2, beta, info={"expensive": expensive})


class MulticutAlgorithm(ThresholdAlgorithm):
    name = "threshold-multicut"

    def __init__(self, problem: MulticutProblem, k: int, lam=1, beta: Fraction | None = None):
        super().__init__(problem, k, lam)
        self.beta = multicut_beta(problem.graph.n) if beta is None else Fraction(beta)
        self.alpha1, self.alpha2 = multicut_parameters(problem.graph.n)

    def _run(self, T):
        return discriminating_multicut(self.problem, self.k, T, self.lam, self.beta)

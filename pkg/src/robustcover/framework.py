"""Problem-agnostic two-stage model, threshold grid and the two drivers.

Costs inside the library are integers: every problem constructor rescales its
input by a common denominator (kept as ``problem.scale``), so thresholds,
objectives and oracle values all live in the same integral units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from heapq import nlargest
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_EPSILON = Fraction(1, 10)
DEFAULT_ENUMERATION_CAP = 10_000
DEFAULT_WITNESS_RETRIES = 64

_RATIONAL_DIGITS = 18


class EnumerationCapError(ValueError):
    """Raised when an exhaustive enumeration would exceed its configured cap."""


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        return Fraction(value)
    return Fraction(value)


def integral_scale(values: Iterable) -> tuple[list[int], Fraction]:
    """Multiply rationals by the lcm of their denominators."""
    fracs = [to_fraction(v) for v in values]
    scale = 1
    for f in fracs:
        scale = scale * f.denominator // math.gcd(scale, f.denominator)
    return [int(f * scale) for f in fracs], Fraction(scale)


def harmonic(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def rational_above(x: Decimal) -> Fraction:
    """Smallest multiple of 10^-18 that is >= x."""
    unit = 10**_RATIONAL_DIGITS
    return Fraction(math.ceil(Fraction(x) * unit), unit)


def high_precision(fn: Callable[[], Decimal]) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 60
        return fn()


def scenario_count(n: int, k: int) -> int:
    return math.comb(n, k)


class CoveringProblem:
    """A covering problem: requirements, ground elements and two cost vectors.

    Subclasses provide ``n_requirements``, integral ``first_cost`` and
    ``second_cost`` tuples (indexed by ground element), and the problem-specific
    feasibility and offline routines below. ``second_cost`` holds base
    second-stage costs; the inflation ``lambda`` multiplies them.
    """

    kind = "abstract"
    n_requirements: int
    first_cost: tuple
    second_cost: tuple
    scale: Fraction = Fraction(1)
    offline_ratio: float = 1.0

    @property
    def n_elements(self) -> int:
        return len(self.first_cost)

    @property
    def max_cost(self) -> int:
        return max(list(self.first_cost) + list(self.second_cost) + [0])

    def first_stage_cost(self, elements: Iterable[int]) -> int:
        return sum(self.first_cost[e] for e in set(elements))

    def second_stage_cost(self, elements: Iterable[int]) -> int:
        return sum(self.second_cost[e] for e in set(elements))

    def satisfies(self, elements: Iterable[int], scenario: Iterable[int]) -> bool:
        raise NotImplementedError

    def singleton_solution(self, requirement: int) -> frozenset:
        """Cheap solution for one requirement; unions over a scenario are feasible."""
        raise NotImplementedError

    def offline_solution(self, scenario: Sequence[int]) -> frozenset:
        """Approximate offline solution (ratio ``offline_ratio``) for a scenario."""
        raise NotImplementedError

    def second_stage_solution(self, scenario: Sequence[int]) -> frozenset:
        """Cheaper of the offline solution and the union of singleton solutions."""
        if not scenario:
            return frozenset()
        union = frozenset().union(*(self.singleton_solution(i) for i in scenario))
        offline = self.offline_solution(list(scenario))
        if self.second_stage_cost(offline) < self.second_stage_cost(union):
            return offline
        return union

    def unscale(self, value) -> Fraction:
        return Fraction(value) / self.scale


@dataclass(frozen=True)
class RobustInstance:
    problem: CoveringProblem
    k: int
    lam: Fraction = Fraction(1)
    epsilon: Fraction = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "lam", to_fraction(self.lam))
        object.__setattr__(self, "epsilon", to_fraction(self.epsilon))
        n = self.problem.n_requirements
        if not 1 <= self.k <= n:
            raise ValueError(f"k={self.k} must lie in 1..{n}")
        if self.lam < 1:
            raise ValueError("inflation factor must be at least 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie strictly between 0 and 1")
        if any(b > c for b, c in zip(self.problem.first_cost, self.problem.second_cost)):
            raise ValueError("first-stage cost exceeds second-stage cost for some element")

    def with_params(self, **changes) -> "RobustInstance":
        fields = {"problem": self.problem, "k": self.k, "lam": self.lam, "epsilon": self.epsilon}
        fields.update(changes)
        return RobustInstance(**fields)


@dataclass(frozen=True)
class ThresholdGrid:
    values: tuple[Fraction, ...]

    @property
    def N(self) -> int:
        return len(self.values) - 1

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def build_threshold_grid(m: int, c_max, epsilon) -> ThresholdGrid:
    """Powers (1+eps)^0..(1+eps)^N with N = ceil(log_{1+eps}(m*c_max)) + 1."""
    epsilon = to_fraction(epsilon)
    c_max = to_fraction(c_max)
    # Instances keep epsilon < 1; the grid itself also accepts epsilon = 1 (doubling).
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if c_max < 1:
        raise ValueError("c_max must be at least 1 (scale costs to integers first)")
    if m < 1:
        raise ValueError("element count must be at least 1")
    target = m * c_max
    base = 1 + epsilon
    power, exponent = Fraction(1), 0
    while power < target:
        power *= base
        exponent += 1
    last = exponent + 1
    return ThresholdGrid(tuple(base**i for i in range(last + 1)))


def instance_grid(instance: RobustInstance) -> ThresholdGrid:
    p = instance.problem
    return build_threshold_grid(max(1, p.n_elements), max(1, p.max_cost), instance.epsilon)


@dataclass(frozen=True)
class DiscriminatingOutput:
    T: Fraction
    first_stage: frozenset
    singleton_augment: tuple[frozenset, ...]
    alpha1: Fraction
    alpha2: Fraction
    beta: Fraction
    info: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Witness:
    requirements: tuple[int, ...]
    certificate: Fraction
    rounded: bool = True
    info: dict = field(default_factory=dict, compare=False)


class ThresholdAlgorithm:
    """Handle for a discriminating algorithm on one instance.

    ``run(T)`` returns the first stage and augmentations for threshold ``T``;
    strongly discriminating algorithms also implement ``witness``.
    """

    alpha1: Fraction
    alpha2: Fraction
    beta: Fraction
    name = "threshold"

    def __init__(self, problem: CoveringProblem, k: int, lam=Fraction(1)):
        self.problem = problem
        self.k = k
        self.lam = to_fraction(lam)
        self._cache: dict[Fraction, DiscriminatingOutput] = {}

    def run(self, T) -> DiscriminatingOutput:
        T = to_fraction(T)
        if T < 0:
            raise ValueError("threshold must be nonnegative")
        if T not in self._cache:
            self._cache[T] = self._run(T)
        return self._cache[T]

    def _run(self, T: Fraction) -> DiscriminatingOutput:
        raise NotImplementedError

    def witness(self, T: Fraction, output: DiscriminatingOutput, rng: np.random.Generator) -> Witness:
        raise NotImplementedError(f"{type(self).__name__} has no witness extractor")

    def driver_bound(self, lam, epsilon) -> Fraction:
        """(1+eps) * max{alpha1, beta + alpha2/lambda}."""
        lam, epsilon = to_fraction(lam), to_fraction(epsilon)
        return (1 + epsilon) * max(self.alpha1, self.beta + self.alpha2 / lam)


@dataclass
class RobustSolution:
    first_stage: frozenset
    singleton_augment: tuple[frozenset, ...]
    chosen_T: Fraction | None
    label: str = "threshold"
    scenario_solver: Callable[[Sequence[int]], frozenset] | None = None
    objective_upper: Fraction | None = None
    objective_exact: Fraction | None = None
    score: Fraction | None = None

    def augment(self, scenario: Iterable[int]) -> frozenset:
        scenario = sorted(set(scenario))
        if self.scenario_solver is not None:
            bought = self.scenario_solver(scenario)
        else:
            bought = frozenset().union(*(self.singleton_augment[i] for i in scenario)) if scenario else frozenset()
        return bought - self.first_stage


def evaluate_robust_objective(
    solution: RobustSolution,
    instance: RobustInstance,
    mode: str = "bound",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Fraction:
    """c(E0) + lambda * worst-case second stage.

    ``bound`` adds the k largest singleton augmentation costs (valid because
    every scenario's augmentation is covered by the union of its singletons);
    ``exact`` enumerates every k-set of requirements.
    """
    p = instance.problem
    first = Fraction(p.first_stage_cost(solution.first_stage))
    if mode == "bound":
        costs = [p.second_stage_cost(a - solution.first_stage) for a in solution.singleton_augment]
        return first + instance.lam * sum(nlargest(instance.k, costs))
    if mode != "exact":
        raise ValueError(f"unknown evaluation mode {mode!r}")
    n, k = p.n_requirements, instance.k
    if scenario_count(n, k) > cap:
        raise EnumerationCapError(f"C({n},{k}) scenarios exceed the cap {cap}")
    worst = 0
    for scenario in combinations(range(n), k):
        worst = max(worst, p.second_stage_cost(solution.augment(scenario)))
    return first + instance.lam * worst


def run_guess_and_verify(
    instance: RobustInstance,
    algorithm: ThresholdAlgorithm,
    grid: ThresholdGrid | None = None,
    include_zero: bool = True,
) -> RobustSolution:
    """Sweep the grid and keep the threshold minimizing c(Phi_T) + lambda*beta*T.

    ``T = 0`` is also tried (unless disabled): integral costs allow an optimal
    second stage of cost 0, and the grid starts at 1.
    """
    grid = grid or instance_grid(instance)
    candidates = ([Fraction(0)] if include_zero else []) + list(grid.values)
    if not candidates:
        raise ValueError("empty threshold grid")
    p = instance.problem
    best = None
    for T in candidates:
        out = algorithm.run(T)
        score = p.first_stage_cost(out.first_stage) + instance.lam * out.beta * T
        if best is None or score < best[0]:
            best = (score, out)
    score, out = best
    solution = RobustSolution(out.first_stage, out.singleton_augment, out.T, label=algorithm.name, score=score)
    solution.objective_upper = evaluate_robust_objective(solution, instance, "bound")
    return solution


def trivial_second_stage_solution(instance: RobustInstance) -> RobustSolution:
    """Buy nothing up front; each scenario gets the problem's offline solution."""
    p = instance.problem
    singles = tuple(p.singleton_solution(i) for i in range(p.n_requirements))
    solution = RobustSolution(
        frozenset(), singles, None, label="second-stage-only", scenario_solver=p.second_stage_solution
    )
    solution.objective_upper = evaluate_robust_objective(solution, instance, "bound")
    return solution


def attach_exact_objective(solution: RobustSolution, instance: RobustInstance, cap: int = DEFAULT_ENUMERATION_CAP):
    solution.objective_exact = evaluate_robust_objective(solution, instance, "exact", cap)
    return solution


def better_solution(instance: RobustInstance, solutions: Sequence[RobustSolution], cap: int = DEFAULT_ENUMERATION_CAP):
    """Pick the cheapest solution, by exact objective when the scenarios fit the cap."""
    n, k = instance.problem.n_requirements, instance.k
    exact = scenario_count(n, k) <= cap
    for s in solutions:
        if exact and s.objective_exact is None:
            attach_exact_objective(s, instance, cap)
    key = (lambda s: s.objective_exact) if exact else (lambda s: s.objective_upper)
    return min(solutions, key=key)


@dataclass(frozen=True)
class MaxMinResult:
    witness: tuple[int, ...]
    certified_lower: Fraction
    universal_upper: Fraction
    achieved_upper: Fraction
    index: int
    certificate: Fraction
    rounded: bool = True

    def __post_init__(self):
        if self.certified_lower > self.universal_upper:
            raise AssertionError("certified lower bound exceeds the universal upper bound")


def _pad_witness(requirements: Sequence[int], k: int, n: int) -> tuple[int, ...]:
    chosen = list(dict.fromkeys(requirements))[:k]
    for i in range(n):
        if len(chosen) >= k:
            break
        if i not in chosen:
            chosen.append(i)
    return tuple(sorted(chosen))


def run_maxmin_driver(instance: RobustInstance, algorithm: ThresholdAlgorithm, seed: int = 0) -> MaxMinResult:
    """Locate the first grid point where the first stage is cheap, certify the one before.

    With p the smallest index in 1..N having c(Phi(t_p)) <= alpha2*t_p, the
    witness at t_{p-1} costs at least t_{p-1} and every k-set can be covered
    for at most c(Phi(t_p)) + beta*t_p <= (alpha2+beta)*t_p. When the condition
    already holds at t_0, the grid is extended downward by factors of (1+eps)
    until it fails or the threshold is too small for any cost to register.
    """
    if instance.lam != 1:
        raise ValueError("the max-min driver needs lambda = 1")
    p = instance.problem
    grid = list(instance_grid(instance).values)
    cost = lambda T: p.first_stage_cost(algorithm.run(T).first_stage)
    cheap = lambda T: cost(T) <= algorithm.alpha2 * T
    index = next((i for i in range(1, len(grid)) if cheap(grid[i])), None)
    if index is None:
        raise AssertionError("no grid threshold has a cheap first stage; costs are probably not scaled")
    lower_grid = grid[index - 1]
    step = 1 + instance.epsilon
    # Below this floor a cheap first stage can only mean that every requirement
    # is coverable at zero cost (integral costs make any positive cost >= 1).
    floor = min([Fraction(1), 1 / algorithm.alpha2] + ([instance.k / algorithm.beta] if algorithm.beta else [])) / 2
    while cheap(lower_grid) and lower_grid >= floor:
        index -= 1
        lower_grid /= step
    upper_T = lower_grid * step
    rng = np.random.default_rng(seed)
    out = algorithm.run(lower_grid)
    if cheap(lower_grid):
        # Every requirement is free to cover: the max-min value is 0.
        witness = Witness(_pad_witness((), instance.k, p.n_requirements), Fraction(0))
        certified = Fraction(0)
    else:
        witness = algorithm.witness(lower_grid, out, rng)
        certified = lower_grid if witness.rounded else min(lower_grid, witness.certificate)
    upper_out = algorithm.run(upper_T)
    singles = [p.second_stage_cost(a) for a in upper_out.singleton_augment]
    achieved = p.first_stage_cost(upper_out.first_stage) + sum(nlargest(instance.k, singles))
    return MaxMinResult(
        witness=_pad_witness(witness.requirements, instance.k, p.n_requirements),
        certified_lower=certified,
        universal_upper=(algorithm.alpha2 + algorithm.beta) * upper_T,
        achieved_upper=Fraction(achieved),
        index=index,
        certificate=witness.certificate,
        rounded=witness.rounded,
    )

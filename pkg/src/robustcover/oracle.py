"""Exact brute-force solvers used as ground truth by the tests and reports.

Two independent routes are provided:

* ``SubsetEngine`` enumerates every subset of the ground elements at once with
  numpy (component labels or coverage masks built incrementally), and answers
  "cheapest feasible superset of E0" for all E0 via a superset-minimum
  transform. It drives ``exact_robust_opt``.
* ``exact_cover_cost`` solves one scenario exactly with a problem-specific
  method (branch and bound, Dreyfus-Wagner, pair partitions, max-flow, or
  labeling search) and drives ``exact_maxmin_value``.

Caps are hard errors (``EnumerationCapError``); nothing here approximates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import singledispatch
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .cuts import MinCutProblem, MulticutProblem
from .framework import (
    DEFAULT_ENUMERATION_CAP,
    CoveringProblem,
    EnumerationCapError,
    RobustInstance,
    scenario_count,
)
from .graph_core import WeightedGraph, max_flow_min_cut, shortest_paths
from .setcover import SetSystem
from .steiner import SteinerForestProblem, SteinerTreeProblem

MAX_SETCOVER_GROUND = 16
MAX_GRAPH_GROUND = 14
MAX_ENGINE_GROUND = 20
MAX_SETCOVER_ELEMENTS = 20
MAX_TREE_TERMINALS = 12
MAX_FOREST_PAIRS = 6
MAX_LABELING_PAIRS = 4

_INF = np.int64(1) << np.int64(60)


# ---------------------------------------------------------------- subset engine


def _blockwise(base: np.ndarray, g: int, extend) -> np.ndarray:
    """Fill an array over all 2^g subsets: entries with top bit j come from
    those without it via ``extend(block, j)``."""
    out = np.empty((1 << g,) + base.shape, dtype=base.dtype)
    out[0] = base
    for j in range(g):
        half = 1 << j
        out[half : 2 * half] = extend(out[:half], j)
    return out


def subset_costs(costs: Sequence[int]) -> np.ndarray:
    costs = [int(c) for c in costs]
    return _blockwise(np.zeros((), dtype=np.int64), len(costs), lambda block, j: block + costs[j])


def component_labels(g: WeightedGraph) -> np.ndarray:
    """labels[F, v] = smallest vertex in v's component of the subgraph with edges F."""
    if g.n > 127:
        raise EnumerationCapError("label engine supports at most 127 vertices")

    def extend(block, j):
        u, v, _ = g.edges[j]
        lu, lv = block[:, u], block[:, v]
        lo, hi = np.minimum(lu, lv), np.maximum(lu, lv)
        return np.where(block == hi[:, None], lo[:, None], block)

    return _blockwise(np.arange(g.n, dtype=np.int8), g.m, extend)


def superset_minimum(values: np.ndarray, g: int) -> np.ndarray:
    """out[E] = min over F containing E of values[F]."""
    out = values.copy()
    for j in range(g):
        view = out.reshape(-1, 2, 1 << j)
        np.minimum(view[:, 0, :], view[:, 1, :], out=view[:, 0, :])
    return out


class SubsetEngine:
    """Feasibility of every ground subset for any scenario, plus subset costs."""

    def __init__(self, problem: CoveringProblem, max_ground: int = MAX_ENGINE_GROUND):
        self.problem = problem
        self.g = problem.n_elements
        if self.g > max_ground:
            raise EnumerationCapError(f"{self.g} ground elements exceed the cap {max_ground}")
        self.first = subset_costs(problem.first_cost)
        self.second = subset_costs(problem.second_cost)
        self._prepare()

    def _prepare(self):
        p = self.problem
        if isinstance(p, SetSystem):
            masks = [sum(1 << e for e in s) for s in p.sets]
            self.coverage = _blockwise(np.zeros((), dtype=np.int64), self.g, lambda block, j: block | masks[j])
        elif isinstance(p, (SteinerTreeProblem, SteinerForestProblem)):
            self.labels = component_labels(p.graph)
        elif isinstance(p, (MinCutProblem, MulticutProblem)):
            # Deleting F leaves the complement, whose index is (2^g - 1) - F.
            self.labels = component_labels(p.graph)[::-1]
        else:
            raise TypeError(f"no subset engine for {type(p).__name__}")

    def feasible(self, scenario: Iterable[int]) -> np.ndarray:
        p = self.problem
        scenario = sorted(set(scenario))
        size = 1 << self.g
        if not scenario:
            return np.ones(size, dtype=bool)
        if isinstance(p, SetSystem):
            need = sum(1 << e for e in scenario)
            return (self.coverage & need) == need
        lab = self.labels
        if isinstance(p, SteinerTreeProblem):
            vs = p.scenario_vertices(scenario)
            return np.all(lab[:, vs] == lab[:, vs[:1]], axis=1)
        if isinstance(p, SteinerForestProblem):
            s = [p.pairs[i][0] for i in scenario]
            t = [p.pairs[i][1] for i in scenario]
            return np.all(lab[:, s] == lab[:, t], axis=1)
        if isinstance(p, MinCutProblem):
            ts = [p.terminals[i] for i in scenario]
            return np.all(lab[:, ts] != lab[:, [p.root]], axis=1)
        s = [p.pairs[i][0] for i in scenario]
        t = [p.pairs[i][1] for i in scenario]
        return np.all(lab[:, s] != lab[:, t], axis=1)

    def residual_costs(self, scenario: Iterable[int]) -> np.ndarray:
        """For every E0: cheapest second-stage cost of extending E0 to cover the scenario."""
        h = np.where(self.feasible(scenario), self.second, _INF)
        return superset_minimum(h, self.g) - self.second

    def cheapest(self, scenario: Iterable[int]) -> tuple[int, frozenset]:
        h = np.where(self.feasible(scenario), self.second, _INF)
        best = int(np.argmin(h))
        return int(h[best]), frozenset(j for j in range(self.g) if best >> j & 1)


def _mask_to_set(mask: int, g: int) -> frozenset:
    return frozenset(j for j in range(g) if mask >> j & 1)


# ---------------------------------------------------------------- robust optimum


@dataclass
class OracleReport:
    """Exact robust optimum (in the problem's integral cost units) and friends.

    ``first_costs[E]`` and ``worst_second[E]`` give, for every first stage E (as
    a bitmask), its cost and its worst-case second-stage cost T'(E).
    """

    robust_opt: Fraction
    first_stage: frozenset
    phi_star: int
    t_star: int
    scenario_costs: dict
    maxmin_value: int
    maxmin_argmax: tuple
    first_costs: np.ndarray = field(repr=False)
    worst_second: np.ndarray = field(repr=False)
    stats: dict = field(default_factory=dict)

    def optimal_splits(self, lam) -> list[tuple[int, int]]:
        """Every distinct (Phi*, T*) pair attaining the optimum."""
        lam = Fraction(lam)
        q, p = lam.denominator, lam.numerator
        obj = q * self.first_costs + p * self.worst_second
        best = obj.min()
        idx = np.flatnonzero(obj == best)
        return sorted({(int(self.first_costs[i]), int(self.worst_second[i])) for i in idx})


def _ground_cap(problem: CoveringProblem) -> int:
    return MAX_SETCOVER_GROUND if isinstance(problem, SetSystem) else MAX_GRAPH_GROUND


def exact_robust_opt(instance: RobustInstance, cap: int = DEFAULT_ENUMERATION_CAP, max_ground: int | None = None) -> OracleReport:
    """min over E0 of b(E0) + lambda * max over k-sets D of the cheapest residual cover."""
    start = time.perf_counter()
    p, k = instance.problem, instance.k
    n = p.n_requirements
    if scenario_count(n, k) > cap:
        raise EnumerationCapError(f"C({n},{k}) scenarios exceed the cap {cap}")
    engine = SubsetEngine(p, _ground_cap(p) if max_ground is None else max_ground)
    worst = np.zeros(1 << engine.g, dtype=np.int64)
    scenario_costs = {}
    for scenario in combinations(range(n), k):
        residual = engine.residual_costs(scenario)
        scenario_costs[scenario] = int(residual[0])
        np.maximum(worst, residual, out=worst)
    lam = instance.lam
    q, num = lam.denominator, lam.numerator
    objective = q * engine.first + num * worst
    best = int(np.argmin(objective))
    argmax = max(scenario_costs, key=lambda s: (scenario_costs[s], tuple(-i for i in s)))
    return OracleReport(
        robust_opt=Fraction(int(objective[best]), q),
        first_stage=_mask_to_set(best, engine.g),
        phi_star=int(engine.first[best]),
        t_star=int(worst[best]),
        scenario_costs=scenario_costs,
        maxmin_value=scenario_costs[argmax],
        maxmin_argmax=argmax,
        first_costs=engine.first,
        worst_second=worst,
        stats={
            "subsets": 1 << engine.g,
            "scenarios": len(scenario_costs),
            "seconds": time.perf_counter() - start,
        },
    )


def exact_maxmin_value(problem: CoveringProblem, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[Fraction, tuple]:
    """Largest exact cover cost over all k-sets, with the lexicographically first argmax."""
    n = problem.n_requirements
    if scenario_count(n, k) > cap:
        raise EnumerationCapError(f"C({n},{k}) scenarios exceed the cap {cap}")
    best = None
    for scenario in combinations(range(n), k):
        value = exact_cover_cost(problem, scenario)[0]
        if best is None or value > best[0]:
            best = (value, scenario)
    return best


# ---------------------------------------------------------------- exact per-scenario costs


@singledispatch
def exact_cover_cost(problem: CoveringProblem, scenario: Iterable[int]) -> tuple[Fraction, frozenset]:
    """Exact minimum second-stage cost of covering a requirement set, with a solution."""
    engine = SubsetEngine(problem)
    cost, chosen = engine.cheapest(scenario)
    return Fraction(cost), chosen


@exact_cover_cost.register
def _(problem: SetSystem, scenario: Iterable[int]) -> tuple[Fraction, frozenset]:
    targets = frozenset(scenario)
    if len(targets) > MAX_SETCOVER_ELEMENTS:
        raise EnumerationCapError(f"{len(targets)} elements exceed the set cover cap {MAX_SETCOVER_ELEMENTS}")
    cost = problem.second_cost
    best: list = [None, frozenset()]

    def lower_bound(uncovered: frozenset) -> Fraction:
        # Each uncovered element pays its cheapest per-element share: a feasible dual.
        total = Fraction(0)
        for e in uncovered:
            total += min(Fraction(cost[j], len(problem.sets[j] & uncovered)) for j in problem.containing[e])
        return total

    def search(uncovered: frozenset, chosen: tuple, spent: int):
        if not uncovered:
            if best[0] is None or spent < best[0]:
                best[0], best[1] = spent, frozenset(chosen)
            return
        if best[0] is not None and spent + lower_bound(uncovered) >= best[0]:
            return
        pivot = min(uncovered, key=lambda e: (len(problem.containing[e]), e))
        for j in sorted(problem.containing[pivot], key=lambda j: (cost[j], j)):
            search(uncovered - problem.sets[j], chosen + (j,), spent + cost[j])

    search(targets, (), 0)
    return Fraction(best[0]), best[1]


class _PathCache:
    def __init__(self, g: WeightedGraph):
        self.g = g
        self.trees = {}

    def path(self, a: int, b: int) -> frozenset:
        if a not in self.trees:
            self.trees[a] = shortest_paths(self.g, a)
        return frozenset(self.trees[a].path_edges(b))


def _distance_array(g: WeightedGraph) -> np.ndarray:
    d = np.full((g.n, g.n), _INF, dtype=np.int64)
    for v in range(g.n):
        for w, x in enumerate(shortest_paths(g, v).dist):
            if x != float("inf"):
                d[v, w] = int(x)
    return d


@dataclass
class DreyfusWagnerTable:
    """dp[S, v] = cheapest tree spanning terminals S plus vertex v."""

    terminals: tuple
    dp: np.ndarray
    via: np.ndarray
    split: np.ndarray
    paths: _PathCache

    def tree(self, mask: int, v: int) -> frozenset:
        if mask & (mask - 1) == 0:
            i = mask.bit_length() - 1
            return self.paths.path(self.terminals[i], v)
        u = int(self.via[mask, v])
        part = int(self.split[mask, u])
        return self.paths.path(u, v) | self.tree(part, u) | self.tree(mask ^ part, u)


def dreyfus_wagner(g: WeightedGraph, terminals: Sequence[int]) -> DreyfusWagnerTable:
    terminals = tuple(dict.fromkeys(terminals))
    q = len(terminals)
    if q > MAX_TREE_TERMINALS + 1:
        raise EnumerationCapError(f"{q} terminals exceed the Dreyfus-Wagner cap")
    dist = _distance_array(g)
    full = 1 << q
    dp = np.full((full, g.n), _INF, dtype=np.int64)
    via = np.zeros((full, g.n), dtype=np.int64)
    split = np.zeros((full, g.n), dtype=np.int64)
    for i, t in enumerate(terminals):
        dp[1 << i] = dist[t]
    cols = np.arange(g.n)
    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue
        low = mask & -mask
        rest = mask ^ low
        inner = np.full(g.n, _INF, dtype=np.int64)
        best_split = np.zeros(g.n, dtype=np.int64)
        # Enumerate parts containing the lowest terminal (each split once).
        sub = rest
        while True:
            part = sub | low
            if part != mask:
                cand = dp[part] + dp[mask ^ part]
                better = cand < inner
                inner = np.where(better, cand, inner)
                best_split = np.where(better, part, best_split)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        total = inner[:, None] + dist
        arg = np.argmin(total, axis=0)
        dp[mask] = total[arg, cols]
        via[mask] = arg
        split[mask] = best_split
    return DreyfusWagnerTable(terminals, dp, via, split, _PathCache(g))


@exact_cover_cost.register
def _(problem: SteinerTreeProblem, scenario: Iterable[int]) -> tuple[Fraction, frozenset]:
    vertices = problem.scenario_vertices(scenario)
    if len(vertices) <= 1:
        return Fraction(0), frozenset()
    table = dreyfus_wagner(problem.graph, vertices)
    full = (1 << len(vertices)) - 1
    value = int(table.dp[full, vertices[0]])
    edges = table.tree(full, vertices[0])
    if problem.graph.cost(edges) > value:
        raise AssertionError("Dreyfus-Wagner reconstruction is costlier than its value")
    return Fraction(problem.graph.cost(edges)), edges


def set_partitions(items: Sequence):
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[head]] + partition
        for i in range(len(partition)):
            yield partition[:i] + [[head] + partition[i]] + partition[i + 1 :]


@exact_cover_cost.register
def _(problem: SteinerForestProblem, scenario: Iterable[int]) -> tuple[Fraction, frozenset]:
    chosen = sorted(set(scenario))
    if len(chosen) > MAX_FOREST_PAIRS:
        raise EnumerationCapError(f"{len(chosen)} pairs exceed the forest cap {MAX_FOREST_PAIRS}")
    if not chosen:
        return Fraction(0), frozenset()
    endpoints = sorted({v for i in chosen for v in problem.pairs[i]})
    table = dreyfus_wagner(problem.graph, endpoints)
    bit = {v: 1 << j for j, v in enumerate(endpoints)}

    def block_mask(block) -> int:
        return sum({bit[v] for i in block for v in problem.pairs[i]})

    best = None
    for partition in set_partitions(chosen):
        masks = [block_mask(b) for b in partition]
        value = 0
        for m in masks:
            v0 = endpoints[(m & -m).bit_length() - 1]
            value += int(table.dp[m, v0])
        if best is None or value < best[0]:
            best = (value, masks)
    value, masks = best
    edges = frozenset().union(
        *(table.tree(m, endpoints[(m & -m).bit_length() - 1]) for m in masks)
    )
    if problem.graph.cost(edges) > value:
        raise AssertionError("forest reconstruction is costlier than its value")
    return Fraction(problem.graph.cost(edges)), edges


@exact_cover_cost.register
def _(problem: MinCutProblem, scenario: Iterable[int]) -> tuple[Fraction, frozenset]:
    sources = {problem.terminals[i] for i in scenario}
    if not sources:
        return Fraction(0), frozenset()
    value, cut = max_flow_min_cut(problem.graph, sources, problem.root)
    return Fraction(value), cut.edges


@exact_cover_cost.register
def _(problem: MulticutProblem, scenario: Iterable[int]) -> tuple[Fraction, frozenset]:
    chosen = sorted(set(scenario))
    if not chosen:
        return Fraction(0), frozenset()
    if problem.graph.m <= MAX_ENGINE_GROUND - 4:
        cost, edges = SubsetEngine(problem).cheapest(chosen)
        return Fraction(cost), edges
    if len(chosen) > MAX_LABELING_PAIRS:
        raise EnumerationCapError("multicut oracle needs at most 16 edges or at most 4 pairs")
    return _labeling_multicut(problem, [problem.pairs[i] for i in chosen])


def _labeling_multicut(problem: MulticutProblem, pairs: list) -> tuple[Fraction, frozenset]:
    """Assign each vertex one of len(pairs)+1 labels so each pair differs; cut label boundaries.

    Merging components whose terminals share no pair never hurts, so a proper
    coloring of the demand graph (at most p+1 colors) covers every optimum.
    """
    g = problem.graph
    labels_available = len(pairs) + 1
    adj = g.adjacency
    partners = {v: [] for v in range(g.n)}
    for s, t in pairs:
        partners[s].append(t)
        partners[t].append(s)
    label = [-1] * g.n
    best = [None, None]

    def search(v: int, used: int, spent: int):
        if best[0] is not None and spent >= best[0]:
            return
        if v == g.n:
            best[0], best[1] = spent, list(label)
            return
        for lab in range(min(used + 1, labels_available)):
            if any(label[w] == lab for w in partners[v]):
                continue
            extra = sum(g.edges[e][2] for w, e in adj[v] if w < v and label[w] != lab)
            label[v] = lab
            search(v + 1, max(used, lab + 1), spent + extra)
            label[v] = -1

    search(0, 0, 0)
    final = best[1]
    edges = frozenset(e for e, (u, v, _) in enumerate(g.edges) if final[u] != final[v])
    return Fraction(best[0]), edges

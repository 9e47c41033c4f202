"""Robust Steiner tree (rooted and unrooted) and robust Steiner forest.

Includes the primal-dual forest subroutine and the max-min witness extractors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .framework import (
    CoveringProblem,
    DiscriminatingOutput,
    ThresholdAlgorithm,
    Witness,
    high_precision,
    integral_scale,
    rational_above,
)
from .graph_core import UnionFind, WeightedGraph, minimum_spanning_tree, shortest_paths


def _scaled_graph(g: WeightedGraph) -> tuple[WeightedGraph, Fraction]:
    costs, scale = integral_scale(c for (_, _, c) in g.edges)
    return g.with_costs(costs), scale


class _GraphProblem(CoveringProblem):
    def _setup_graph(self, g: WeightedGraph):
        self.graph, self.scale = _scaled_graph(g)
        costs = tuple(c for (_, _, c) in self.graph.edges)
        self.first_cost = costs
        self.second_cost = costs

    @cached_property
    def distances(self) -> list[tuple]:
        return [shortest_paths(self.graph, v).dist for v in range(self.graph.n)]

    def path(self, a: int, b: int) -> frozenset:
        return frozenset(shortest_paths(self.graph, a).path_edges(b))


class SteinerTreeProblem(_GraphProblem):
    """Connect every scenario terminal to the root (or, unrooted, to each other).

    Unrooted instances use the first terminal as the root.
    """

    kind = "steiner_tree"
    offline_ratio = 2.0

    def __init__(self, graph: WeightedGraph, terminals: Sequence[int], root: int | None = None):
        if not terminals:
            raise ValueError("at least one terminal is required")
        self._setup_graph(graph)
        self.terminals = tuple(int(t) for t in terminals)
        self.rooted = root is not None
        self.root = int(root) if root is not None else self.terminals[0]
        for v in self.terminals + (self.root,):
            if not 0 <= v < graph.n:
                raise ValueError(f"vertex {v} is outside the graph")
        comp = self.graph.components()
        for t in self.terminals:
            if comp[t] != comp[self.root]:
                raise ValueError(f"terminal {t} is disconnected from the root {self.root}")

    @property
    def kind_label(self) -> str:
        return "steiner_tree" if self.rooted else "steiner_tree_unrooted"

    @property
    def n_requirements(self) -> int:
        return len(self.terminals)

    def scenario_vertices(self, scenario: Iterable[int]) -> list[int]:
        vertices = {self.terminals[i] for i in scenario}
        if self.rooted:
            vertices.add(self.root)
        return sorted(vertices)

    def satisfies(self, elements, scenario) -> bool:
        vertices = self.scenario_vertices(scenario)
        if len(vertices) <= 1:
            return True
        comp = self.graph.components(elements)
        return len({comp[v] for v in vertices}) == 1

    def singleton_solution(self, requirement: int) -> frozenset:
        return self.path(self.terminals[requirement], self.root)

    def offline_solution(self, scenario) -> frozenset:
        return minimum_spanning_tree(self.graph, self.scenario_vertices(scenario))[0]


class SteinerForestProblem(_GraphProblem):
    kind = "steiner_forest"
    offline_ratio = 2.0

    def __init__(self, graph: WeightedGraph, pairs: Sequence[tuple[int, int]]):
        if not pairs:
            raise ValueError("at least one pair is required")
        self._setup_graph(graph)
        self.pairs = tuple((int(s), int(t)) for s, t in pairs)
        comp = self.graph.components()
        for s, t in self.pairs:
            if not (0 <= s < graph.n and 0 <= t < graph.n):
                raise ValueError(f"pair ({s}, {t}) uses a vertex outside the graph")
            if comp[s] != comp[t]:
                raise ValueError(f"pair ({s}, {t}) lies in different components")

    @property
    def n_requirements(self) -> int:
        return len(self.pairs)

    def satisfies(self, elements, scenario) -> bool:
        comp = self.graph.components(elements)
        return all(comp[self.pairs[i][0]] == comp[self.pairs[i][1]] for i in scenario)

    def singleton_solution(self, requirement: int) -> frozenset:
        s, t = self.pairs[requirement]
        return self.path(s, t)

    def offline_solution(self, scenario) -> frozenset:
        return gw_steiner_forest(self.graph, [self.pairs[i] for i in scenario]).edges


# ---------------------------------------------------------------- primal-dual forest


@dataclass(frozen=True)
class GWForest:
    edges: frozenset
    cost: object
    dual: Fraction


def gw_steiner_forest(g: WeightedGraph, pairs: Sequence[tuple[int, int]]) -> GWForest:
    """Moat-growing 2-approximation with reverse-delete pruning.

    Every component separating some pair grows its moat at unit rate; an edge
    joins the forest when the moats on its two sides pay for it. ``dual`` is
    the total moat value, a lower bound on the optimal forest.
    """
    pairs = [(s, t) for s, t in pairs if s != t]
    uf = UnionFind(range(g.n))
    load = [Fraction(0)] * g.n
    dual = Fraction(0)
    added: list[int] = []

    def active_roots() -> set[int]:
        roots = set()
        for s, t in pairs:
            rs, rt = uf.find(s), uf.find(t)
            if rs != rt:
                roots.update((rs, rt))
        return roots

    active = active_roots()
    while active:
        best = None
        for e, (u, v, c) in enumerate(g.edges):
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue
            rate = (ru in active) + (rv in active)
            if rate == 0:
                continue
            wait = (c - load[u] - load[v]) / rate
            if best is None or wait < best[0]:
                best = (wait, e)
        if best is None:
            raise ValueError("some pair is disconnected")
        wait, e = best
        for x in range(g.n):
            if uf.find(x) in active:
                load[x] += wait
        dual += wait * len(active)
        u, v, _ = g.edges[e]
        uf.union(u, v)
        added.append(e)
        active = active_roots()
    kept = list(added)
    for e in reversed(added):
        trial = [f for f in kept if f != e]
        comp = g.components(trial)
        if all(comp[s] == comp[t] for s, t in pairs):
            kept = trial
    edges = frozenset(kept)
    return GWForest(edges, g.cost(edges), dual)


# ---------------------------------------------------------------- Steiner tree


def steiner_tree_beta(lam) -> Fraction:
    """2 - 1/lambda + sqrt(4 + 1/lambda^2), rounded up to a rational."""
    lam = Fraction(lam)

    def value() -> Decimal:
        inv = Decimal(lam.denominator) / Decimal(lam.numerator)
        return 2 - inv + (4 + inv * inv).sqrt()

    return rational_above(high_precision(value))


@dataclass(frozen=True)
class TerminalNet:
    vertices: tuple[int, ...]
    threshold: Fraction


def build_terminal_net(problem: SteinerTreeProblem, k: int, T, beta: Fraction) -> TerminalNet:
    """Scan terminals in input order, keeping those farther than beta*T/k from the net."""
    threshold = beta * Fraction(T) / k
    d = problem.distances
    net = [problem.root]
    nearest = list(d[problem.root])
    for t in problem.terminals:
        if nearest[t] > threshold:
            net.append(t)
            nearest = [min(a, b) for a, b in zip(nearest, d[t])]
    return TerminalNet(tuple(net), threshold)


def discriminating_steiner_tree(problem: SteinerTreeProblem, k: int, T, lam) -> DiscriminatingOutput:
    """Buy an MST over a net of far-apart terminals; connect the rest to the net."""
    T = Fraction(T)
    beta = steiner_tree_beta(lam)
    net = build_terminal_net(problem, k, T, beta)
    first, _ = minimum_spanning_tree(problem.graph, net.vertices)
    to_net = shortest_paths(problem.graph, net.vertices)
    augment = tuple(frozenset(to_net.path_edges(t)) for t in problem.terminals)
    return DiscriminatingOutput(
        T, first, augment, 2 * beta / (beta - 2), Fraction(2), beta, info={"net": net}
    )


class SteinerTreeAlgorithm(ThresholdAlgorithm):
    name = "threshold-steiner-tree"

    def __init__(self, problem: SteinerTreeProblem, k: int, lam=1):
        super().__init__(problem, k, lam)
        self.beta = steiner_tree_beta(self.lam)
        self.alpha1 = 2 * self.beta / (self.beta - 2)
        self.alpha2 = Fraction(2)

    def _run(self, T):
        return discriminating_steiner_tree(self.problem, self.k, T, self.lam)

    def witness(self, T, output, rng=None):
        return maxmin_steiner_witness(self.problem, self.k, T, output)


# ---------------------------------------------------------------- Steiner forest


def forest_parameters(lam) -> tuple[Fraction, Fraction]:
    """(gamma, beta) with gamma = 2 + 2(1 - 1/lambda) and beta = 2 gamma.

    At lambda = 1 that gamma is 2 and the first-stage factor 4g/(g-2) is
    undefined; gamma = 3 is used there, as in the max-min setting.
    """
    lam = Fraction(lam)
    gamma = Fraction(3) if lam == 1 else 2 + 2 * (1 - 1 / lam)
    return gamma, 2 * gamma


class AuxiliaryForestError(AssertionError):
    pass


@dataclass
class PairClassification:
    real: list[int] = field(default_factory=list)
    fake: list[tuple[int, int]] = field(default_factory=list)
    witnesses: list[int] = field(default_factory=list)
    kinds: dict[int, str] = field(default_factory=dict)
    blockers: dict[int, dict[int, int]] = field(default_factory=dict)
    aux_edges: list[tuple[int, int]] = field(default_factory=list)
    gamma: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    T: Fraction = Fraction(0)
    k: int = 1

    def contracted_pairs(self, pairs: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
        return [pairs[i] for i in self.real] + list(self.fake)

    def count(self, kind: str) -> int:
        return sum(1 for v in self.kinds.values() if v == kind)


def steiner_forest_select(
    problem: SteinerForestProblem, k: int, T, beta: Fraction, gamma: Fraction
) -> PairClassification:
    """Admit far pairs as real pairs; endpoints near earlier witnesses become fake pairs.

    A pair is admitted when its distance in G with all real and fake pairs
    contracted exceeds beta*T/k. Each endpoint either becomes a witness or,
    if some witness is strictly closer than gamma*T/k in G, is tied to the
    nearest such witness by a fake pair. The auxiliary forest on witnesses is
    kept and checked for cycles after every insertion.
    """
    T = Fraction(T)
    if gamma > beta / 2:
        raise ValueError("gamma must be at most beta/2")
    g, d, pairs = problem.graph, problem.distances, problem.pairs
    out = PairClassification(gamma=gamma, beta=beta, T=T, k=k)
    far, near = beta * T / k, gamma * T / k
    aux = UnionFind()
    for i, (s, t) in enumerate(pairs):
        if s == t:
            continue
        if shortest_paths(g, s, out.contracted_pairs(pairs)).dist[t] <= far:
            continue
        out.real.append(i)
        blocked: dict[int, int] = {}
        for x in (s, t):
            close = [w for w in out.witnesses if d[x][w] < near]
            if close:
                w = min(close, key=lambda w: (d[x][w], w))
                out.fake.append((x, w))
                blocked[x] = w
            else:
                out.witnesses.append(x)
                aux.find(x)
        out.blockers[i] = blocked
        if not blocked:
            out.kinds[i], edge = "g", (s, t)
        elif len(blocked) == 1:
            free = t if s in blocked else s
            out.kinds[i], edge = "o", (free, next(iter(blocked.values())))
        else:
            out.kinds[i], edge = "b", (blocked[s], blocked[t])
        if not aux.union(*edge):
            raise AuxiliaryForestError(f"auxiliary edge {edge} closes a cycle")
        out.aux_edges.append(edge)
    return out


def discriminating_steiner_forest(problem: SteinerForestProblem, k: int, T, lam) -> DiscriminatingOutput:
    """Primal-dual forest on the real pairs plus paths for the fake ones."""
    T = Fraction(T)
    gamma, beta = forest_parameters(lam)
    chosen = steiner_forest_select(problem, k, T, beta, gamma)
    g = problem.graph
    real_pairs = [problem.pairs[i] for i in chosen.real]
    forest = gw_steiner_forest(g, real_pairs)
    first = set(forest.edges)
    for a, b in chosen.fake:
        first.update(problem.path(a, b))
    contracted = chosen.contracted_pairs(problem.pairs)
    augment = []
    for s, t in problem.pairs:
        augment.append(frozenset(shortest_paths(g, s, contracted).path_edges(t)))
    ratio = 4 * gamma / (gamma - 2)
    return DiscriminatingOutput(
        T, frozenset(first), tuple(augment), ratio, ratio, beta,
        info={"classification": chosen, "gw": forest},
    )


class SteinerForestAlgorithm(ThresholdAlgorithm):
    name = "threshold-steiner-forest"

    def __init__(self, problem: SteinerForestProblem, k: int, lam=1):
        super().__init__(problem, k, lam)
        self.gamma, self.beta = forest_parameters(self.lam)
        self.alpha1 = self.alpha2 = 4 * self.gamma / (self.gamma - 2)

    def _run(self, T):
        return discriminating_steiner_forest(self.problem, self.k, T, self.lam)

    def witness(self, T, output, rng=None):
        return maxmin_steiner_witness(self.problem, self.k, T, output)


# ---------------------------------------------------------------- max-min witnesses


def maxmin_steiner_witness(problem, k: int, T, output: DiscriminatingOutput) -> Witness:
    """Requirement set with a dual lower bound on its optimal connection cost."""
    T = Fraction(T)
    if isinstance(problem, SteinerTreeProblem):
        return _tree_witness(problem, k, T, output)
    if isinstance(problem, SteinerForestProblem):
        return _forest_witness(problem, k, T, output)
    raise TypeError(f"no Steiner witness for {type(problem).__name__}")


def _tree_witness(problem: SteinerTreeProblem, k: int, T: Fraction, output: DiscriminatingOutput) -> Witness:
    net: TerminalNet = output.info["net"]
    index = {}
    for i, t in enumerate(problem.terminals):
        index.setdefault(t, i)
    # Unrooted instances must connect their own root terminal, so it joins Q.
    members = [index[v] for v in (net.vertices[1:] if problem.rooted else net.vertices)]
    if len(members) <= k:
        # Half the MST on the net bounds the Steiner tree on the net below.
        _, mst = minimum_spanning_tree(problem.graph, net.vertices)
        return Witness(tuple(sorted(members)), Fraction(mst) / 2, info={"case": "small-net"})
    chosen = sorted(members)[:k]
    # Disjoint balls of radius (beta/2)T/k around k net terminals, each
    # separating its centre from the root (or from the other centres).
    if not problem.rooted and k < 2:
        return Witness(tuple(chosen), Fraction(0), rounded=False, info={"case": "single-terminal"})
    return Witness(tuple(chosen), output.beta / 2 * T, info={"case": "ball-packing"})


def _forest_witness(problem: SteinerForestProblem, k: int, T: Fraction, output: DiscriminatingOutput) -> Witness:
    chosen: PairClassification = output.info["classification"]
    if len(chosen.real) <= k:
        gw: GWForest = output.info["gw"]
        return Witness(tuple(sorted(chosen.real)), gw.dual, info={"case": "few-real-pairs"})
    witnesses = set(chosen.witnesses)

    def hits(i: int) -> int:
        s, t = problem.pairs[i]
        return (s in witnesses) + (t in witnesses)

    ranked = sorted((i for i in chosen.real if hits(i)), key=lambda i: (-hits(i), i))
    picked, covered = [], 0
    for i in ranked:
        if len(picked) >= k or covered >= k:
            break
        picked.append(i)
        covered += hits(i)
    certificate = covered * chosen.gamma / 2 * T / k
    return Witness(tuple(sorted(picked)), certificate, info={"case": "ball-packing", "balls": covered})

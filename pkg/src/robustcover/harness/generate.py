"""Seeded random instances. A seed fully determines the output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cuts import MinCutProblem, MulticutProblem
from ..framework import DEFAULT_EPSILON, RobustInstance
from ..graph_core import WeightedGraph
from ..setcover import SetSystem
from ..steiner import SteinerForestProblem, SteinerTreeProblem

KINDS = ("setcover", "setcover_nonuniform", "steiner_tree", "steiner_tree_unrooted", "steiner_forest", "mincut", "multicut")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int = 6
    m: int = 5
    density: float = 0.4
    max_cost: int = 10
    terminals: int = 3
    pairs: int = 3
    max_edges: int | None = None
    k: int = 1
    lam: object = 1
    epsilon: object = DEFAULT_EPSILON


def random_set_system(rng: np.random.Generator, n: int, m: int, density: float, max_cost: int, nonuniform: bool = False) -> SetSystem:
    """Each element joins one uniformly random set, then every other set independently."""
    if n < 1 or m < 1:
        raise ValueError("set systems need n >= 1 and m >= 1")
    members = [set() for _ in range(m)]
    for e in range(n):
        members[int(rng.integers(m))].add(e)
        for j in range(m):
            if rng.random() < density:
                members[j].add(e)
    first = [int(c) for c in rng.integers(1, max_cost + 1, size=m)]
    if not nonuniform:
        return SetSystem(n, members, first)
    second = [b + int(rng.integers(0, max_cost + 1)) for b in first]
    return SetSystem(n, members, first, second)


def random_connected_graph(rng: np.random.Generator, n: int, density: float, max_cost: int, max_edges: int | None = None, attempts: int = 10_000) -> WeightedGraph:
    """Erdos-Renyi G(n, p) resampled until connected (and within ``max_edges``)."""
    if n < 2:
        raise ValueError("graphs need at least 2 vertices")
    if max_edges is not None and max_edges < n - 1:
        raise ValueError(f"a connected graph on {n} vertices needs at least {n - 1} edges")
    if density <= 0:
        raise ValueError("edge density must be positive")
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    for _ in range(attempts):
        keep = rng.random(len(pairs)) < density
        chosen = [pr for pr, flag in zip(pairs, keep) if flag]
        if max_edges is not None and len(chosen) > max_edges:
            continue
        costs = rng.integers(1, max_cost + 1, size=len(chosen))
        g = WeightedGraph(n, [(u, v, int(c)) for (u, v), c in zip(chosen, costs)])
        if len(set(g.components())) == 1:
            return g
    raise ValueError("could not sample a connected graph with these parameters")


def _distinct_pairs(rng, n: int, count: int):
    all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if count > len(all_pairs):
        raise ValueError(f"cannot draw {count} distinct pairs on {n} vertices")
    picks = rng.choice(len(all_pairs), size=count, replace=False)
    return [all_pairs[int(i)] for i in picks]


def generate_instance(spec: GeneratorSpec, seed: int) -> RobustInstance:
    rng = np.random.default_rng(seed)
    kind = spec.kind
    if kind not in KINDS:
        raise ValueError(f"unknown problem kind {kind!r}")
    if kind.startswith("setcover"):
        problem = random_set_system(rng, spec.n, spec.m, spec.density, spec.max_cost, kind == "setcover_nonuniform")
    else:
        g = random_connected_graph(rng, spec.n, spec.density, spec.max_cost, spec.max_edges)
        if kind in ("steiner_forest", "multicut"):
            pairs = _distinct_pairs(rng, spec.n, spec.pairs)
            problem = SteinerForestProblem(g, pairs) if kind == "steiner_forest" else MulticutProblem(g, pairs)
        else:
            rooted = kind != "steiner_tree_unrooted"
            need = spec.terminals + (1 if rooted else 0)
            if need > spec.n:
                raise ValueError(f"{need} distinct terminal vertices requested on {spec.n} vertices")
            picks = [int(v) for v in rng.choice(spec.n, size=need, replace=False)]
            if kind == "mincut":
                problem = MinCutProblem(g, picks[0], picks[1:])
            elif rooted:
                problem = SteinerTreeProblem(g, picks[1:], picks[0])
            else:
                problem = SteinerTreeProblem(g, picks)
    k = min(spec.k, problem.n_requirements)
    return RobustInstance(problem, k, spec.lam, spec.epsilon)

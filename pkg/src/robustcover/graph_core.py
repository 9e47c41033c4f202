"""Undirected weighted graph primitives.

Edges are identified by their index in ``WeightedGraph.edges``; every routine
that returns edges returns these indices so callers can price them with either
first- or second-stage costs.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence


class UnionFind:
    def __init__(self, items: Iterable[int] = ()):
        self.parent: dict[int, int] = {}
        for x in items:
            self.parent[x] = x

    def find(self, x: int) -> int:
        parent = self.parent
        if x not in parent:
            parent[x] = x
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def same(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


class WeightedGraph:
    """Undirected graph with nonnegative edge costs.

    Parallel edges are merged into one edge whose cost is the sum; the merged
    edge keeps the position of its first occurrence.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int, object]], labels: Sequence[str] | None = None):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        merged: dict[tuple[int, int], object] = {}
        for u, v, cost in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) uses a vertex outside 0..{n - 1}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if cost < 0:
                raise ValueError(f"edge ({u}, {v}) has negative cost {cost}")
            key = (u, v) if u < v else (v, u)
            merged[key] = merged[key] + cost if key in merged else cost
        self.n = n
        self.edges: tuple[tuple[int, int, object], ...] = tuple((u, v, c) for (u, v), c in merged.items())
        self.labels = tuple(labels) if labels is not None else None
        self._index = {(u, v): i for i, (u, v, _) in enumerate(self.edges)}

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for idx, (u, v, _) in enumerate(self.edges):
            adj[u].append((v, idx))
            adj[v].append((u, idx))
        return tuple(tuple(a) for a in adj)

    def edge_id(self, u: int, v: int) -> int:
        return self._index[(u, v) if u < v else (v, u)]

    def cost(self, edge_ids: Iterable[int]):
        return sum((self.edges[e][2] for e in edge_ids), 0)

    def with_costs(self, costs: Sequence) -> "WeightedGraph":
        if len(costs) != self.m:
            raise ValueError("cost vector length does not match edge count")
        return WeightedGraph(self.n, ((u, v, c) for (u, v, _), c in zip(self.edges, costs)), self.labels)

    def components(self, edge_ids: Iterable[int] | None = None) -> list[int]:
        """Component representative per vertex, using all edges or a subset."""
        uf = UnionFind(range(self.n))
        ids = range(self.m) if edge_ids is None else edge_ids
        for e in ids:
            u, v, _ = self.edges[e]
            uf.union(u, v)
        return [uf.find(v) for v in range(self.n)]

    def connected(self, a: int, b: int, edge_ids: Iterable[int] | None = None, removed: Iterable[int] = ()) -> bool:
        blocked = set(removed)
        ids = [e for e in (range(self.m) if edge_ids is None else edge_ids) if e not in blocked]
        comp = self.components(ids)
        return comp[a] == comp[b]


@dataclass(frozen=True)
class ShortestPathTree:
    """Distances from a source set, with predecessor edges for path extraction.

    ``pred_edge[v]`` is the graph edge entering ``v`` on its shortest path, or
    ``None`` when ``v`` is reached through a contracted (zero-cost) hop or is a
    source. Contracted hops are recorded in ``pred_vertex``.
    """

    dist: tuple
    pred_vertex: tuple
    pred_edge: tuple

    def path_edges(self, target: int) -> list[int]:
        if self.dist[target] == math.inf:
            raise ValueError(f"vertex {target} is unreachable")
        edges = []
        v = target
        while self.pred_vertex[v] is not None:
            if self.pred_edge[v] is not None:
                edges.append(self.pred_edge[v])
            v = self.pred_vertex[v]
        edges.reverse()
        return edges

    def origin(self, target: int) -> int:
        """Source vertex at which the shortest path to ``target`` starts."""
        v = target
        while self.pred_vertex[v] is not None:
            v = self.pred_vertex[v]
        return v


def shortest_paths(
    g: WeightedGraph,
    source: int | Iterable[int],
    contracted: Iterable[tuple[int, int]] = (),
    removed: Iterable[int] = (),
) -> ShortestPathTree:
    """Dijkstra in the quotient graph ``G/contracted`` with ``removed`` edges deleted.

    ``source`` may be a single vertex or a set (distance to the nearest one).
    Contracted pairs behave as zero-cost virtual edges, so distances are those of
    the graph with each pair identified, and extracted paths contain only real
    edges. Ties prefer the lower vertex index, then the lower edge index.
    """
    sources = [source] if isinstance(source, int) else sorted(set(source))
    blocked = set(removed)
    virtual: dict[int, list[int]] = {}
    for a, b in contracted:
        if a != b:
            virtual.setdefault(a, []).append(b)
            virtual.setdefault(b, []).append(a)
    dist: list = [math.inf] * g.n
    pred_v: list = [None] * g.n
    pred_e: list = [None] * g.n
    heap: list = []
    for s in sources:
        dist[s] = 0
        heap.append((0, s))
    heapq.heapify(heap)
    done = [False] * g.n
    adj = g.adjacency
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for w in virtual.get(u, ()):
            if not done[w] and d < dist[w]:
                dist[w], pred_v[w], pred_e[w] = d, u, None
                heapq.heappush(heap, (d, w))
        for w, e in adj[u]:
            if done[w] or e in blocked:
                continue
            nd = d + g.edges[e][2]
            if nd < dist[w]:
                dist[w], pred_v[w], pred_e[w] = nd, u, e
                heapq.heappush(heap, (nd, w))
    return ShortestPathTree(tuple(dist), tuple(pred_v), tuple(pred_e))


def distance_matrix(g: WeightedGraph, contracted: Iterable[tuple[int, int]] = ()) -> list[tuple]:
    pairs = list(contracted)
    return [shortest_paths(g, v, pairs).dist for v in range(g.n)]


@dataclass(frozen=True)
class CutSet:
    edges: frozenset
    cost: object
    side: frozenset


def cut_of_side(g: WeightedGraph, side: Iterable[int], removed: Iterable[int] = ()) -> CutSet:
    inside = frozenset(side)
    blocked = set(removed)
    edges = frozenset(
        e for e, (u, v, _) in enumerate(g.edges) if e not in blocked and ((u in inside) != (v in inside))
    )
    return CutSet(edges, g.cost(edges), inside)


def max_flow_min_cut(
    g: WeightedGraph,
    source: int | Iterable[int],
    sink: int | Iterable[int],
    removed: Iterable[int] = (),
) -> tuple[object, CutSet]:
    """Maximum flow between two vertex sets and a minimum cut certifying it.

    Edmonds-Karp: BFS augmenting paths on the residual graph, with every source
    (sink) vertex treated as one contracted super-vertex. The returned cut side is
    the set reachable from the sources in the final residual graph, i.e. the
    source-minimal minimum cut. Edges in ``removed`` are treated as absent.
    """
    sources = {source} if isinstance(source, int) else set(source)
    sinks = {sink} if isinstance(sink, int) else set(sink)
    if sources & sinks:
        raise ValueError("source and sink sets intersect")
    if not sources or not sinks:
        return 0, CutSet(frozenset(), 0, frozenset(sources))
    blocked = set(removed)
    residual: list[dict[int, object]] = [dict() for _ in range(g.n)]
    for e, (u, v, c) in enumerate(g.edges):
        if e in blocked:
            continue
        residual[u][v] = residual[u].get(v, 0) + c
        residual[v][u] = residual[v].get(u, 0) + c
    flow = 0
    while True:
        parent: dict[int, int | None] = {s: None for s in sources}
        queue = deque(sorted(sources))
        hit = None
        while queue and hit is None:
            u = queue.popleft()
            for w in sorted(residual[u]):
                if w not in parent and residual[u][w] > 0:
                    parent[w] = u
                    if w in sinks:
                        hit = w
                        break
                    queue.append(w)
        if hit is None:
            break
        path = []
        w = hit
        while parent[w] is not None:
            path.append((parent[w], w))
            w = parent[w]
        bottleneck = min(residual[a][b] for a, b in path)
        for a, b in path:
            residual[a][b] -= bottleneck
            residual[b][a] = residual[b].get(a, 0) + bottleneck
        flow += bottleneck
    cut = cut_of_side(g, parent.keys(), blocked)
    if cut.cost != flow:
        raise AssertionError(f"max-flow {flow} does not match cut cost {cut.cost}")
    return flow, cut


@dataclass(frozen=True)
class GomoryHuTree:
    n: int
    parent: tuple
    weight: tuple

    @property
    def tree_edges(self) -> list[tuple[int, int, object]]:
        return [(v, self.parent[v], self.weight[v]) for v in range(1, self.n)]

    def min_cut(self, u: int, v: int):
        """Minimum edge weight on the tree path between ``u`` and ``v``."""
        if u == v:
            return math.inf
        adj: dict[int, list[tuple[int, object]]] = {i: [] for i in range(self.n)}
        for a, b, w in self.tree_edges:
            adj[a].append((b, w))
            adj[b].append((a, w))
        best: dict[int, object] = {u: math.inf}
        stack = [u]
        while stack:
            x = stack.pop()
            for y, w in adj[x]:
                if y not in best:
                    best[y] = min(best[x], w)
                    stack.append(y)
        return best[v]


def gomory_hu_tree(g: WeightedGraph) -> GomoryHuTree:
    """Gusfield's construction: n-1 max-flow calls on the original graph."""
    n = g.n
    parent = [0] * n
    weight: list = [0] * n
    for s in range(1, n):
        t = parent[s]
        value, cut = max_flow_min_cut(g, s, t)
        side = cut.side
        weight[s] = value
        for i in range(n):
            if i != s and i in side and parent[i] == t:
                parent[i] = s
        if parent[t] in side:
            parent[s] = parent[t]
            parent[t] = s
            weight[s] = weight[t]
            weight[t] = value
    return GomoryHuTree(n, tuple(parent), tuple(weight))


def minimum_spanning_tree(g: WeightedGraph, on: Iterable[int] | None = None) -> tuple[frozenset, object]:
    """MST of ``g`` itself, or of the metric closure of ``on`` when given.

    With ``on``, closure edges are realized by shortest paths and the union of
    their graph edges is returned; its cost is at most the closure MST weight.
    """
    if on is None:
        uf = UnionFind(range(g.n))
        chosen = []
        for e in sorted(range(g.m), key=lambda e: (g.edges[e][2], e)):
            u, v, _ = g.edges[e]
            if uf.union(u, v):
                chosen.append(e)
        edges = frozenset(chosen)
        return edges, g.cost(edges)
    nodes = sorted(set(on))
    if len(nodes) <= 1:
        return frozenset(), 0
    trees = {v: shortest_paths(g, v) for v in nodes}
    in_tree = {nodes[0]}
    best = {v: (trees[nodes[0]].dist[v], nodes[0]) for v in nodes[1:]}
    chosen: set[int] = set()
    while best:
        v = min(best, key=lambda x: (best[x][0], x))
        d, u = best.pop(v)
        if d == math.inf:
            raise ValueError(f"vertices {u} and {v} are disconnected")
        chosen.update(trees[u].path_edges(v))
        in_tree.add(v)
        for w in best:
            dw = trees[v].dist[w]
            if dw < best[w][0]:
                best[w] = (dw, v)
    edges = frozenset(chosen)
    return edges, g.cost(edges)

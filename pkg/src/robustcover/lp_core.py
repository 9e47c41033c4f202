"""Fractional solvers: exact covering LPs, fractional multicut, region growing."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .graph_core import WeightedGraph

# Each ball's boundary is charged against GVY_BALL_FACTOR * ln(n+1) times its
# volume; summed over all balls this gives GVY_CONSTANT = 4.
GVY_BALL_FACTOR = 2
GVY_CONSTANT = 2 * GVY_BALL_FACTOR
GVY_RADIUS = 0.5


class InfeasibleLPError(ValueError):
    def __init__(self, rows: Sequence[int]):
        self.rows = tuple(rows)
        super().__init__(f"rows {list(self.rows)} are covered by no column")


@dataclass(frozen=True)
class CoveringLP:
    """min c.x  s.t.  sum_{columns j covering row r} x_j >= 1,  x >= 0."""

    n_rows: int
    columns: tuple[frozenset, ...]
    costs: tuple

    def __post_init__(self):
        if len(self.columns) != len(self.costs):
            raise ValueError("one cost per column required")
        if any(c < 0 for c in self.costs):
            raise ValueError("column costs must be nonnegative")
        covered = set().union(*self.columns) if self.columns else set()
        if any(r < 0 or r >= self.n_rows for r in covered):
            raise ValueError("column refers to a row outside the LP")
        missing = [r for r in range(self.n_rows) if r not in covered]
        if missing:
            raise InfeasibleLPError(missing)


@dataclass(frozen=True)
class LPSolution:
    primal: tuple
    dual: tuple
    objective: Fraction


def solve_covering_lp(lp: CoveringLP) -> LPSolution:
    """Exact optimum of a 0/1 covering LP and its packing dual.

    Runs primal simplex with Bland's rule on the dual packing problem
    ``max 1.y  s.t.  sum_{r in column j} y_r <= c_j``, whose slack basis is
    feasible because costs are nonnegative. The covering solution is read off
    the final objective row under the slack columns.
    """
    rows, cols = lp.n_rows, len(lp.columns)
    width = rows + cols + 1
    # Tableau rows are the packing constraints (one per column of the covering LP).
    tab = []
    for j, col in enumerate(lp.columns):
        line = [Fraction(0)] * width
        for r in col:
            line[r] = Fraction(1)
        line[rows + j] = Fraction(1)
        line[-1] = Fraction(lp.costs[j])
        tab.append(line)
    z = [Fraction(-1)] * rows + [Fraction(0)] * (cols + 1)
    basis = [rows + j for j in range(cols)]
    while True:
        entering = next((c for c in range(rows + cols) if z[c] < 0), None)
        if entering is None:
            break
        leaving, best = None, None
        for i in range(cols):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    leaving, best = i, ratio
        if leaving is None:
            raise AssertionError("packing LP unbounded although every row is covered")
        pivot = tab[leaving][entering]
        prow = [x / pivot for x in tab[leaving]]
        tab[leaving] = prow
        for i in range(cols):
            if i != leaving and tab[i][entering] != 0:
                f = tab[i][entering]
                tab[i] = [a - f * b for a, b in zip(tab[i], prow)]
        if z[entering] != 0:
            f = z[entering]
            z = [a - f * b for a, b in zip(z, prow)]
        basis[leaving] = entering
    y = [Fraction(0)] * rows
    for i, b in enumerate(basis):
        if b < rows:
            y[b] = tab[i][-1]
    x = tuple(z[rows + j] for j in range(cols))
    objective = z[-1]
    _check_covering_certificate(lp, x, y, objective)
    return LPSolution(x, tuple(y), objective)


def _check_covering_certificate(lp: CoveringLP, x, y, objective) -> None:
    for r in range(lp.n_rows):
        if sum(x[j] for j, col in enumerate(lp.columns) if r in col) < 1:
            raise AssertionError(f"covering row {r} violated")
    for j, col in enumerate(lp.columns):
        if sum(y[r] for r in col) > lp.costs[j]:
            raise AssertionError(f"packing column {j} violated")
    if sum(c * xj for c, xj in zip(lp.costs, x)) != objective or sum(y) != objective:
        raise AssertionError("primal and dual objectives differ")


@dataclass(frozen=True)
class FractionalMulticut:
    lengths: tuple[float, ...]
    cost: float
    flow_value: float
    pairs: tuple[tuple[int, int], ...]

    @property
    def gap(self) -> float:
        if self.cost == 0:
            return 1.0
        return self.cost / self.flow_value if self.flow_value > 0 else math.inf


def _dijkstra_float(n, adj, lengths, source):
    dist = [math.inf] * n
    pred = [None] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, e in adj[u]:
            nd = d + lengths[e]
            if nd < dist[w]:
                dist[w], pred[w] = nd, (u, e)
                heapq.heappush(heap, (nd, w))
    return dist, pred


def fractional_multicut(
    g: WeightedGraph,
    pairs: Sequence[tuple[int, int]],
    tolerance: float = 0.05,
    max_phases: int = 200_000,
) -> FractionalMulticut:
    """Approximate minimum fractional multicut via Garg-Koenemann.

    The multiplicative-weights flow routine yields, at every step, a feasible
    integral flow (after congestion scaling) and a length function (after
    dividing by the shortest pair distance). The run stops as soon as the best
    length function costs at most ``(1 + tolerance)`` times the best flow, which
    certifies that ratio against the LP optimum on both sides.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    pairs = tuple((int(s), int(t)) for s, t in pairs)
    caps = [float(c) for (_, _, c) in g.edges]
    m = g.m
    for s, t in pairs:
        if s == t:
            raise ValueError(f"pair ({s}, {t}) has identical endpoints")
        if not g.connected(s, t):
            raise ValueError(f"pair ({s}, {t}) is disconnected")
    # Zero-capacity edges carry no flow and are cut for free.
    live = [e for e in range(m) if caps[e] > 0]
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
    for e in live:
        u, v, _ = g.edges[e]
        adj[u].append((v, e))
        adj[v].append((u, e))
    final = [1.0 if caps[e] == 0 else 0.0 for e in range(m)]
    active = [(s, t) for s, t in pairs if g.connected(s, t, edge_ids=live)]
    if not active:
        return FractionalMulticut(tuple(final), 0.0, 0.0, pairs)

    eps = tolerance / 3
    m_live = len(live)
    log_delta = -(1 / eps) * math.log((1 + eps) * m_live) + math.log(1 + eps)
    base = math.exp(log_delta)
    lengths = [0.0] * m
    for e in live:
        lengths[e] = base / caps[e]
    flow_on = [0.0] * m
    total_flow = 0.0
    best_cut, best_lengths = math.inf, None
    best_flow = 0.0

    for _ in range(max_phases):
        best_path, alpha = None, math.inf
        for s, t in active:
            dist, pred = _dijkstra_float(g.n, adj, lengths, s)
            if dist[t] < alpha:
                alpha = dist[t]
                path = []
                v = t
                while pred[v] is not None:
                    u, e = pred[v]
                    path.append(e)
                    v = u
                best_path = path
        volume = sum(caps[e] * lengths[e] for e in live)
        if alpha > 0 and volume / alpha < best_cut:
            best_cut = volume / alpha
            best_lengths = [lengths[e] / alpha for e in range(m)]
        if best_flow > 0 and best_cut <= (1 + tolerance) * best_flow:
            break
        if alpha >= 1:
            break
        bottleneck = min(caps[e] for e in best_path)
        for e in best_path:
            flow_on[e] += bottleneck
            lengths[e] *= 1 + eps * bottleneck / caps[e]
        total_flow += bottleneck
        congestion = max(flow_on[e] / caps[e] for e in live)
        best_flow = max(best_flow, total_flow / congestion)

    for e in live:
        final[e] = best_lengths[e]
    cost = sum(caps[e] * final[e] for e in live)
    return FractionalMulticut(tuple(final), cost, best_flow, pairs)


def gvy_region_growing(g: WeightedGraph, pairs: Sequence[tuple[int, int]], frac: FractionalMulticut) -> frozenset:
    """Round a fractional multicut by growing balls of radius below 1/2.

    Each ball around an unseparated source is grown until its boundary cost is
    at most ``GVY_BALL_FACTOR * ln(n+1)`` times its volume (seeded with
    ``total/n``); the boundary is cut and the ball removed. The total is at
    most ``GVY_CONSTANT * ln(n+1)`` times the fractional cost.
    """
    n = g.n
    lengths = frac.lengths
    caps = [c for (_, _, c) in g.edges]
    total = sum(float(c) * l for c, l in zip(caps, lengths))
    seed = total / n if n else 0.0
    factor = GVY_BALL_FACTOR * math.log(n + 1)
    alive = [True] * n
    cut: set[int] = set()
    for s, t in pairs:
        if not alive[s] or not alive[t]:
            continue
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e, (u, v, _) in enumerate(g.edges):
            if alive[u] and alive[v]:
                adj[u].append((v, e))
                adj[v].append((u, e))
        dist, _ = _dijkstra_float(n, adj, lengths, s)
        if dist[t] == math.inf:
            continue
        order = sorted((v for v in range(n) if alive[v] and dist[v] < GVY_RADIUS), key=lambda v: (dist[v], v))
        chosen, fallback = None, None
        for j in range(len(order)):
            ball = set(order[: j + 1])
            upper = min(dist[order[j + 1]], GVY_RADIUS) if j + 1 < len(order) else GVY_RADIUS
            boundary, volume = [], seed
            for u in ball:
                for w, e in adj[u]:
                    if w in ball:
                        if u < w:
                            volume += float(caps[e]) * lengths[e]
                    else:
                        boundary.append(e)
                        volume += float(caps[e]) * max(0.0, min(lengths[e], upper - dist[u]))
            boundary_cost = sum(float(caps[e]) for e in boundary)
            ratio = boundary_cost / volume if volume > 0 else (0.0 if boundary_cost == 0 else math.inf)
            if fallback is None or ratio < fallback[0]:
                fallback = (ratio, ball, boundary)
            if boundary_cost <= factor * volume * (1 + 1e-12) + 1e-12:
                chosen = (ball, boundary)
                break
        if chosen is None:
            chosen = fallback[1], fallback[2]
        ball, boundary = chosen
        cut.update(boundary)
        for v in ball:
            alive[v] = False
    result = frozenset(cut)
    for s, t in pairs:
        if g.connected(s, t, removed=result):
            raise AssertionError(f"region growing left pair ({s}, {t}) connected")
    return result

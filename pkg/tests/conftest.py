import itertools

import networkx as nx
import pytest
from hypothesis import HealthCheck, settings

from robustcover.graph_core import WeightedGraph
from robustcover.harness.generate import GeneratorSpec, generate_instance

settings.register_profile(
    "robustcover",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("robustcover")


def to_networkx(g: WeightedGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    for u, v, c in g.edges:
        h.add_edge(u, v, capacity=c, weight=c)
    return h


def small_graph_spec(kind, **overrides):
    base = dict(n=7, density=0.5, max_edges=12, max_cost=9, terminals=4, pairs=3, k=2, lam=2)
    base.update(overrides)
    return GeneratorSpec(kind, **base)


def instances(spec, seeds):
    for seed in seeds:
        yield seed, generate_instance(spec, seed)


def all_ksets(n, k):
    return list(itertools.combinations(range(n), k))


@pytest.fixture
def triangle():
    return WeightedGraph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])

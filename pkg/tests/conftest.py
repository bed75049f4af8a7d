import os
import random

import networkx as nx
import pytest
from hypothesis import HealthCheck, settings

from supportsim.graphcore import Graph, SupportedInstance

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi graph with ids 1..n (networkx is used only as a generator/oracle)."""
    nxg = nx.gnp_random_graph(n, p, seed=seed)
    return Graph.from_edges(range(1, n + 1), ((u + 1, v + 1) for u, v in nxg.edges()))


def to_nx(g: Graph) -> nx.Graph:
    out = nx.Graph()
    out.add_nodes_from(g.nodes)
    out.add_edges_from(g.edges())
    return out


def random_instance(n: int, p: float, drop: float, seed: int, mode="supported") -> SupportedInstance:
    h = gnp(n, p, seed)
    rng = random.Random(seed + 1)
    edges = [e for e in h.edges() if rng.random() >= drop]
    return SupportedInstance(h, edges, mode)


@pytest.fixture
def rng():
    return random.Random(12345)


def bounded_degree(n: int, p: float, dmax: int, seed: int) -> Graph:
    """G(n, p) with edges dropped greedily so no degree exceeds ``dmax``."""
    deg = dict.fromkeys(range(1, n + 1), 0)
    keep = []
    for u, v in gnp(n, p, seed).edges():
        if deg[u] < dmax and deg[v] < dmax:
            deg[u] += 1
            deg[v] += 1
            keep.append((u, v))
    return Graph.from_edges(range(1, n + 1), keep)

"""Running a passive-support algorithm in plain LOCAL via an agreed virtual support."""
from __future__ import annotations

from dataclasses import dataclass

from ..graphcore import Graph, GraphError, Mode, SupportedInstance
from .slocal import SlocalAlgorithm, SlocalResult, simulate_slocal_passive, slocal_greedy_mis

__all__ = ["virtual_support", "passive_local_simulation", "PassiveLocalResult"]


def virtual_support(n: int, k: int) -> Graph:
    """Support on ``n**k`` nodes that every real node can build from ``n`` alone.

    Real nodes ``1..n`` form a clique; virtual nodes ``n+1..n**k`` form a
    path, and real node ``i`` hangs off virtual node ``n+i``. Real nodes
    then have degree exactly ``n`` (for ``k >= 2``).
    """
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    total = n**k
    if k >= 2 and total < 2 * n:
        raise ValueError(f"n**k = {total} leaves too few virtual nodes for n = {n}")
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    edges += [(x, x + 1) for x in range(n + 1, total)]
    if total > n:
        edges += [(i, n + i) for i in range(1, n + 1)]
    return Graph.from_edges(range(1, total + 1), edges)


@dataclass
class PassiveLocalResult:
    outputs: dict
    support: Graph
    inner: SlocalResult


def passive_local_simulation(g: Graph, k: int = 2, alg: SlocalAlgorithm | None = None) -> PassiveLocalResult:
    """Solve on ``G`` by pretending it is the surviving part of :func:`virtual_support`.

    Every real-virtual edge and every clique edge missing from ``G`` counts
    as failed, so the passive algorithm only ever talks over ``G``. Outputs
    of virtual nodes are discarded.
    """
    n = g.n
    if sorted(g.nodes) != list(range(1, n + 1)):
        raise GraphError("node identifiers must be exactly 1..n")
    h = virtual_support(n, k)
    inst = SupportedInstance(h, g.edges(), Mode.PASSIVE)
    res = simulate_slocal_passive(inst, alg or slocal_greedy_mis())
    return PassiveLocalResult({v: res.outputs[v] for v in g.nodes}, h, res)

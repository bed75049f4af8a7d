"""Centralised sinkless orientation, used as a reference and for the lower-bound programs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..graphcore import Graph, connected_components

__all__ = ["OrientationResult", "global_sinkless_orientation"]


@dataclass
class OrientationResult:
    """``arcs`` holds one ``(tail, head)`` per edge when ``feasible``.

    Otherwise ``infeasible`` lists the components (sorted node lists) that
    admit no valid orientation.
    """

    feasible: bool
    arcs: set = field(default_factory=set)
    infeasible: list = field(default_factory=list)

    def out_neighbors(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = {}
        for u, v in self.arcs:
            out.setdefault(u, set()).add(v)
        return out


def _find_cycle(g: Graph, comp: list[int]) -> list[int] | None:
    """Some cycle of the component as a node sequence, or ``None`` for a tree."""
    parent = {comp[0]: None}
    depth = {comp[0]: 0}
    stack = [(comp[0], iter(g.adj[comp[0]]))]
    while stack:
        v, it = stack[-1]
        for u in it:
            if u == parent[v]:
                continue
            if u in depth:
                if depth[u] < depth[v]:
                    cyc = [v]
                    while cyc[-1] != u:
                        cyc.append(parent[cyc[-1]])
                    return cyc[::-1]
                continue
            parent[u] = v
            depth[u] = depth[v] + 1
            stack.append((u, iter(g.adj[u])))
            break
        else:
            stack.pop()
    return None


def _toward(g: Graph, roots: list[int], comp_nodes: set[int], arcs: set) -> set[tuple[int, int]]:
    """Orient BFS-tree edges from every non-root node toward ``roots``."""
    seen = set(roots)
    queue = deque(sorted(roots))
    used = set()
    while queue:
        x = queue.popleft()
        for y in g.adj[x]:
            if y not in seen and y in comp_nodes:
                seen.add(y)
                arcs.add((y, x))
                used.add((min(x, y), max(x, y)))
                queue.append(y)
    return used


def global_sinkless_orientation(g: Graph, min_degree: int = 2) -> OrientationResult:
    """Orient every edge so that no node of degree >= ``min_degree`` is a sink.

    A component with a cycle: orient the cycle consistently and pull every
    other node toward it along BFS edges, so each non-cycle node has its
    parent edge as an out-edge. A tree component: root it at a leaf, which
    is always possible for ``min_degree >= 2`` because only the root lacks
    a parent edge and a leaf is exempt. With ``min_degree <= 1`` a tree with
    an edge is infeasible (it has fewer edges than nodes).
    """
    arcs: set[tuple[int, int]] = set()
    bad = []
    for comp in connected_components(g):
        nodes = set(comp)
        if len(comp) == 1:
            if g.degree(comp[0]) >= min_degree:  # cannot happen for simple graphs, kept for min_degree <= 0
                bad.append(comp)
            continue
        cycle = _find_cycle(g, comp)
        if cycle is not None:
            tree_edges = set()
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                arcs.add((a, b))
                tree_edges.add((min(a, b), max(a, b)))
            tree_edges |= _toward(g, cycle, nodes, arcs)
        else:
            if min_degree <= 1:
                bad.append(comp)
                continue
            root = min(v for v in comp if g.degree(v) == 1)
            tree_edges = _toward(g, [root], nodes, arcs)
        for u in comp:
            for v in g.adj[u]:
                if u < v and (u, v) not in tree_edges:
                    arcs.add((u, v))
    if bad:
        return OrientationResult(False, set(), bad)
    return OrientationResult(True, arcs)

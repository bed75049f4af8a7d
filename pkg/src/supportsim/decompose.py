"""Preprocessing structures computed centrally from the support graph.

Everything here is a pure function of a :class:`Graph`; the results are
stored in node memory before the input graph is revealed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

from .engine import ExecutionTrace, GlobalPreprocessor, NodeProgram, run
from .graphcore import Graph, SupportedInstance, bfs_distances, graph_power

__all__ = [
    "DistanceColoring",
    "BallClustering",
    "Cluster",
    "NetworkDecomposition",
    "greedy_distance_coloring",
    "is_distance_coloring",
    "ball_growing",
    "network_decomposition",
    "degeneracy",
    "degeneracy_coloring",
    "is_proper_coloring",
    "pseudoforest_color_reduce",
    "reduce_to_three",
    "PseudoforestReduction",
    "distance_coloring_preprocessor",
    "ball_clustering_preprocessor",
    "decomposition_preprocessor",
    "coloring_to_json",
    "clustering_to_json",
]

_EPS = 1e-9


# ---------------------------------------------------------------------------
# distance colorings


@dataclass(frozen=True)
class DistanceColoring:
    k: int
    color: Mapping[int, int]

    @property
    def palette_size(self) -> int:
        return max(self.color.values(), default=0)


def greedy_distance_coloring(g: Graph, k: int) -> DistanceColoring:
    """Greedy colouring of the ``k``-th power of ``g`` in ascending id order."""
    if k < 1:
        raise ValueError("distance parameter must be >= 1")
    color: dict[int, int] = {}
    for v in sorted(g.nodes):
        taken = {color[u] for u in bfs_distances(g, v, k) if u in color}
        c = 1
        while c in taken:
            c += 1
        color[v] = c
    return DistanceColoring(k, color)


def is_distance_coloring(g: Graph, color: Mapping[int, int], k: int) -> bool:
    for v in g.nodes:
        for u, d in bfs_distances(g, v, k).items():
            if u != v and color[u] == color[v]:
                return False
    return True


# ---------------------------------------------------------------------------
# ball growing


@dataclass(frozen=True)
class Cluster:
    center: int
    radius: int
    members: frozenset
    inner: frozenset
    boundary: frozenset


@dataclass(frozen=True)
class BallClustering:
    eps: float
    clusters: tuple[Cluster, ...]
    n: int

    def cluster_of(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.clusters) for v in c.members}

    @property
    def max_radius(self) -> int:
        return max((c.radius for c in self.clusters), default=0)

    @property
    def inner_total(self) -> int:
        return sum(len(c.inner) for c in self.clusters)


def _residual_ball_sizes(g: Graph, alive: set[int], v: int, eps: float):
    """Grow BFS layers from ``v`` inside ``alive`` until the growth rule stops."""
    dist = {v: 0}
    layers = [[v]]
    while True:
        frontier = []
        for x in layers[-1]:
            for y in g.adj[x]:
                if y in alive and y not in dist:
                    dist[y] = len(layers)
                    frontier.append(y)
        r = len(layers) - 1
        inside = sum(len(L) for L in layers)
        if inside + len(frontier) < (1 + eps) * inside:
            return r, [x for L in layers for x in L], frontier
        layers.append(frontier)


def ball_growing(g: Graph, eps: float, nodes=None) -> BallClustering:
    """Partition ``g`` into balls with small boundary.

    Repeatedly take the lowest-id unclustered node ``v``, find the smallest
    ``r`` with ``|B_{r+1}(v)| < (1+eps)|B_r(v)|`` in the residual graph,
    and carve ``B_{r+1}(v)`` out as a cluster whose inner part is
    ``B_r(v)``. ``nodes`` restricts the run to a subset of ``g``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    alive = set(g.nodes if nodes is None else nodes)
    clusters = []
    n = len(alive)
    while alive:
        v = min(alive)
        r, inner, boundary = _residual_ball_sizes(g, alive, v, eps)
        members = frozenset(inner) | frozenset(boundary)
        clusters.append(Cluster(v, r, members, frozenset(inner), frozenset(boundary)))
        alive -= members
    return BallClustering(eps, tuple(clusters), n)


def check_ball_clustering(g: Graph, bc: BallClustering) -> list[str]:
    """Invariant violations of a ball clustering (empty list when valid)."""
    problems = []
    seen: set[int] = set()
    eps_p = bc.eps / (1 + bc.eps)
    bound = math.log(bc.n) / math.log1p(bc.eps) if bc.n > 1 else 0.0
    for i, c in enumerate(bc.clusters):
        if seen & c.members:
            problems.append(f"cluster {i} overlaps earlier clusters")
        seen |= c.members
        if c.radius > bound + _EPS:
            problems.append(f"cluster {i} radius {c.radius} > log_(1+eps) n = {bound:.3f}")
        if len(c.boundary) > eps_p * len(c.members) + _EPS:
            problems.append(f"cluster {i} boundary {len(c.boundary)}/{len(c.members)} > {eps_p:.3f}")
    if seen != set(g.nodes):
        problems.append("clusters do not cover V")
    if bc.inner_total < (1 - eps_p) * bc.n - _EPS:
        problems.append(f"inner total {bc.inner_total} < (1-eps')n")
    return problems


# ---------------------------------------------------------------------------
# network decomposition


@dataclass(frozen=True)
class NetworkDecomposition:
    """Clusters grouped into colour classes ``1..num_colors``.

    ``weak_diameter[i]`` is measured in ``graph`` (for a decomposition of a
    graph power this is the power graph's hop metric).
    """

    clusters: tuple[frozenset, ...]
    color: tuple[int, ...]
    leader: tuple[int, ...]
    weak_diameter: tuple[int, ...]

    @property
    def num_colors(self) -> int:
        return max(self.color, default=0)

    @property
    def max_weak_diameter(self) -> int:
        return max(self.weak_diameter, default=0)

    def cluster_of(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.clusters) for v in c}


def _weak_diameter(g: Graph, members) -> int:
    members = set(members)
    best = 0
    for v in members:
        dist = bfs_distances(g, v)
        best = max(best, max(dist[u] for u in members))
    return best


def network_decomposition(g: Graph) -> NetworkDecomposition:
    """Iterated ball carving with ``eps = 1``.

    In carving round ``j`` the inner balls become colour-``j`` clusters;
    boundary nodes stay in the residual graph for round ``j + 1``.
    """
    residual = set(g.nodes)
    clusters, colors, leaders, diams = [], [], [], []
    j = 0
    while residual:
        j += 1
        bc = ball_growing(g, 1.0, residual)
        for c in bc.clusters:
            if not c.inner:
                continue
            clusters.append(c.inner)
            colors.append(j)
            leaders.append(min(c.inner))
            diams.append(_weak_diameter(g, c.inner))
            residual -= c.inner
    return NetworkDecomposition(tuple(clusters), tuple(colors), tuple(leaders), tuple(diams))


def check_network_decomposition(g: Graph, nd: NetworkDecomposition) -> list[str]:
    problems = []
    owner = {}
    for i, c in enumerate(nd.clusters):
        for v in c:
            if v in owner:
                problems.append(f"node {v} in two clusters")
            owner[v] = i
    if set(owner) != set(g.nodes):
        problems.append("clusters do not cover V")
    for u, v in g.edges():
        a, b = owner.get(u), owner.get(v)
        if a is not None and b is not None and a != b and nd.color[a] == nd.color[b]:
            problems.append(f"same-colour clusters {a},{b} joined by edge ({u},{v})")
    for i, c in enumerate(nd.clusters):
        if _weak_diameter(g, c) != nd.weak_diameter[i]:
            problems.append(f"cluster {i} weak diameter misreported")
    return problems


# ---------------------------------------------------------------------------
# degeneracy colouring


def _smallest_last_order(g: Graph) -> tuple[list[int], int]:
    deg = {v: len(g.adj[v]) for v in g.nodes}
    removed: set[int] = set()
    order = []
    k = 0
    buckets: dict[int, set[int]] = {}
    for v, d in deg.items():
        buckets.setdefault(d, set()).add(v)
    for _ in range(g.n):
        d = min(b for b, s in buckets.items() if s)
        v = min(buckets[d])
        buckets[d].discard(v)
        k = max(k, d)
        removed.add(v)
        order.append(v)
        for u in g.adj[v]:
            if u not in removed:
                buckets[deg[u]].discard(u)
                deg[u] -= 1
                buckets.setdefault(deg[u], set()).add(u)
    return order, k


def degeneracy(g: Graph) -> int:
    return _smallest_last_order(g)[1]


def degeneracy_coloring(g: Graph) -> dict[int, int]:
    """Proper colouring with at most ``degeneracy(g) + 1`` colours."""
    order, _ = _smallest_last_order(g)
    color: dict[int, int] = {}
    for v in reversed(order):
        taken = {color[u] for u in g.adj[v] if u in color}
        c = 1
        while c in taken:
            c += 1
        color[v] = c
    return color


def is_proper_coloring(g: Graph, color: Mapping[int, int]) -> bool:
    return all(color[u] != color[v] for u, v in g.edges())


# ---------------------------------------------------------------------------
# pseudoforest colour reduction


def _check_pseudoforest(g: Graph, out: Mapping[int, int | None]):
    for v in g.nodes:
        p = out.get(v)
        if p is not None and not g.has_edge(v, p):
            raise ValueError(f"out-neighbour {p} of {v} is not adjacent")
    for u, v in g.edges():
        if out.get(u) != v and out.get(v) != u:
            raise ValueError(f"edge ({u},{v}) is not oriented by the pseudoforest")


class PseudoforestReduction(NodeProgram):
    """Two rounds per step: shift down, then recolour the top colour.

    Round 1 of a step: every node sends its colour; a node with an
    out-neighbour adopts the out-neighbour's colour, a node without one
    picks the smallest colour in ``{1,2,3}`` different from its own.
    Afterwards all in-neighbours of a node share one colour, so each node
    sees at most two colours. Round 2: every node sends its new colour and
    nodes holding colour ``x`` move to a free colour in ``{1,2,3}``.
    """

    def __init__(self, x: int, steps: int = 1):
        self.x = x
        self.steps = steps

    def initialize(self, ctx):
        self.color = ctx.input
        self.parent = ctx.memory["out"]
        return {u: self.color for u in ctx.g_neighbors}

    def step(self, ctx, r, inbox):
        k = (r - 1) // 2  # reduction step index
        top = self.x - k
        if r % 2 == 1:
            if self.parent is not None:
                self.color = inbox[self.parent]
            else:
                self.color = 1 if self.color != 1 else 2
        else:
            if self.color == top:
                used = set(inbox.values())
                self.color = min(c for c in (1, 2, 3) if c not in used)
            if k + 1 == self.steps:
                ctx.halt(self.color)
                return None
        return {u: self.color for u in ctx.g_neighbors}


def pseudoforest_color_reduce(
    g: Graph, out: Mapping[int, int | None], coloring: Mapping[int, int], x: int
) -> tuple[dict[int, int], ExecutionTrace]:
    """Reduce a proper ``x``-colouring of an oriented pseudoforest to ``x - 1`` colours.

    ``out`` gives each node's out-neighbour (or ``None``); every edge of
    ``g`` must be some node's out-edge. The reduction runs on the engine
    and always takes exactly two rounds.
    """
    if x <= 3:
        raise ValueError("pseudoforest colour reduction needs x >= 4")
    _check_pseudoforest(g, out)
    if not is_proper_coloring(g, coloring):
        raise ValueError("input colouring is not proper")
    if any(not 1 <= c <= x for c in coloring.values()):
        raise ValueError(f"input colouring uses colours outside 1..{x}")
    inst = SupportedInstance.local(g)
    memory = {v: {"out": out.get(v)} for v in g.nodes}
    trace = run(inst, lambda: PseudoforestReduction(x, 1), memory, inputs=dict(coloring), max_rounds=2)
    if not trace.halted:
        raise RuntimeError("pseudoforest reduction did not finish in two rounds")
    return dict(trace.outputs), trace


def reduce_to_three(g, out, coloring, x):
    """Apply reduction steps ``x -> x-1 -> ... -> 3``; returns colouring and per-step rounds."""
    rounds = []
    col = dict(coloring)
    while x > 3:
        col, trace = pseudoforest_color_reduce(g, out, col, x)
        rounds.append(trace.rounds_used)
        x -= 1
    return col, rounds


# ---------------------------------------------------------------------------
# preprocessors and export


def distance_coloring_preprocessor(k: int) -> GlobalPreprocessor:
    def fn(h):
        dc = greedy_distance_coloring(h, k)
        palette = dc.palette_size
        return {v: {"color": c, "k": k, "palette": palette} for v, c in dc.color.items()}

    return GlobalPreprocessor(fn, f"distance_coloring(k={k})")


def ball_clustering_preprocessor(eps: float) -> GlobalPreprocessor:
    def fn(h):
        bc = ball_growing(h, eps)
        mem = {}
        diam = []
        for c in bc.clusters:
            diam.append(_weak_diameter(h.induced(c.members), c.members))
        max_diam = max(diam, default=0)
        max_size = max((len(c.members) for c in bc.clusters), default=1)
        for i, c in enumerate(bc.clusters):
            members = tuple(sorted(c.members))
            for v in members:
                mem[v] = {
                    "cluster": i,
                    "members": members,
                    "role": "inner" if v in c.inner else "boundary",
                    "diameter": diam[i],
                    "max_diameter": max_diam,
                    "max_cluster_size": max_size,
                    "eps": eps,
                }
        return mem

    return GlobalPreprocessor(fn, f"ball_clustering(eps={eps})")


def decomposition_preprocessor(t: int = 1) -> GlobalPreprocessor:
    """Network decomposition of ``H^t`` plus the per-phase gather length ``t*(D+1)``."""

    def fn(h):
        nd = network_decomposition(graph_power(h, t))
        phase = t * (nd.max_weak_diameter + 1)
        mem = {}
        for i, c in enumerate(nd.clusters):
            members = tuple(sorted(c))
            for v in members:
                mem[v] = {
                    "nd_color": nd.color[i],
                    "cluster": i,
                    "leader": nd.leader[i],
                    "members": members,
                    "num_colors": nd.num_colors,
                    "phase_length": phase,
                    "locality": t,
                }
        return mem

    return GlobalPreprocessor(fn, f"network_decomposition(t={t})")


def coloring_to_json(color: Mapping[int, int]) -> str:
    return json.dumps({str(v): c for v, c in sorted(color.items())}, sort_keys=True, indent=1)


def clustering_to_json(bc: BallClustering) -> str:
    rows = {}
    for i, c in enumerate(bc.clusters):
        for v in c.members:
            rows[str(v)] = {"cluster": i, "role": "inner" if v in c.inner else "boundary"}
    return json.dumps(dict(sorted(rows.items(), key=lambda kv: int(kv[0]))), indent=1)

"""Independent-set algorithms: exact oracle, cluster-optimal approximation, random priorities."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from ..decompose import ball_clustering_preprocessor
from ..engine import ExecutionTrace, NodeProgram, preprocess, run
from ..graphcore import CapacityError, Graph, Mode, SupportedInstance

__all__ = [
    "MIS_CAP",
    "brute_force_mis",
    "independence_number",
    "cluster_optimal_mis",
    "random_priority_mis",
    "MisResult",
]

MIS_CAP = 24


def _masks(g: Graph):
    order = sorted(g.nodes)
    index = {v: i for i, v in enumerate(order)}
    nbr = [0] * len(order)
    for v in order:
        for u in g.adj[v]:
            nbr[index[v]] |= 1 << index[u]
    return order, nbr


def _alpha_solver(nbr):
    memo: dict[int, int] = {}

    def alpha(mask: int) -> int:
        if mask == 0:
            return 0
        hit = memo.get(mask)
        if hit is not None:
            return hit
        # a vertex of degree <= 1 is always in some maximum independent set
        best_v, best_d, min_v, min_d = -1, -1, -1, 1 << 30
        m = mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            d = (nbr[i] & mask).bit_count()
            if d > best_d:
                best_v, best_d = i, d
            if d < min_d:
                min_v, min_d = i, d
            m ^= low
        if min_d <= 1:
            res = 1 + alpha(mask & ~(nbr[min_v] | (1 << min_v)))
        else:
            v = best_v
            res = max(alpha(mask & ~(1 << v)), 1 + alpha(mask & ~(nbr[v] | (1 << v))))
        memo[mask] = res
        return res

    return alpha


def independence_number(g: Graph, cap: int = MIS_CAP) -> int:
    if g.n > cap:
        raise CapacityError(f"exact MIS on {g.n} nodes exceeds cap {cap}")
    _, nbr = _masks(g)
    return _alpha_solver(nbr)((1 << g.n) - 1)


def brute_force_mis(g: Graph, cap: int = MIS_CAP) -> frozenset:
    """Lexicographically smallest maximum independent set (as a sorted id sequence)."""
    if g.n > cap:
        raise CapacityError(f"exact MIS on {g.n} nodes exceeds cap {cap}")
    order, nbr = _masks(g)
    alpha = _alpha_solver(nbr)
    remaining = (1 << len(order)) - 1
    target = alpha(remaining)
    chosen = []
    for i in range(len(order)):
        bit = 1 << i
        if not remaining & bit:
            continue
        with_i = remaining & ~(nbr[i] | bit)
        if 1 + alpha(with_i) == target:
            chosen.append(order[i])
            remaining = with_i
            target -= 1
        else:
            remaining &= ~bit
    return frozenset(chosen)


@dataclass
class MisResult:
    members: frozenset
    trace: ExecutionTrace
    removed: frozenset = frozenset()

    @property
    def outputs(self) -> dict:
        return dict(self.trace.outputs)


@lru_cache(maxsize=256)
def _solve_part(nodes: tuple, edges: tuple, cap: int) -> frozenset:
    # every member of a cluster solves the same instance; solve it once
    return brute_force_mis(Graph.from_edges(nodes, edges), cap)


class _ClusterOptimal(NodeProgram):
    """Gather ``G`` inside the cluster, solve it exactly, then repair across clusters."""

    def __init__(self, passive: bool, cap: int):
        self.passive = passive
        self.cap = cap

    def initialize(self, ctx):
        mem = ctx.memory
        self.members = frozenset(mem["members"])
        self.gather = mem["max_cluster_size"] - 1 if self.passive else mem["max_diameter"]
        self.nbrs = {ctx.node_id: ctx.g_neighbors}
        self.selected = None
        if self.gather == 0:
            self._solve(ctx)
            return self._announce(ctx)
        return self._flood(ctx, self.nbrs)

    def _flood(self, ctx, new):
        targets = [u for u in ctx.neighbors if u in self.members and (ctx.in_g[u] or not self.passive)]
        return {u: new for u in targets} if new else None

    def _solve(self, ctx):
        if self.passive:
            # only the G-component inside the cluster is reachable
            comp = {ctx.node_id}
            stack = [ctx.node_id]
            while stack:
                x = stack.pop()
                for y in self.nbrs.get(x, ()):
                    if y in self.members and y not in comp:
                        comp.add(y)
                        stack.append(y)
            part = comp
        else:
            part = self.members
        missing = [x for x in part if x not in self.nbrs]
        if missing:
            raise RuntimeError(f"node {ctx.node_id}: cluster gather incomplete, missing {sorted(missing)[:5]}")
        edges = tuple(sorted((x, y) for x in part for y in self.nbrs[x] if y in part and x < y))
        self.selected = ctx.node_id in _solve_part(tuple(sorted(part)), edges, self.cap)

    def _announce(self, ctx):
        return {u: True for u in ctx.g_neighbors} if self.selected else None

    def step(self, ctx, r, inbox):
        if r <= self.gather:
            new = {}
            for _, known in sorted(inbox.items()):
                for x, lst in known.items():
                    if x not in self.nbrs:
                        self.nbrs[x] = lst
                        new[x] = lst
            if r == self.gather:
                self._solve(ctx)
                return self._announce(ctx)
            return self._flood(ctx, new)
        if r == self.gather + 1:
            keep = self.selected and not any(u < ctx.node_id for u in inbox)
            ctx.halt((int(bool(keep)), bool(self.selected and not keep)))
            return None
        return None


def cluster_optimal_mis(
    inst: SupportedInstance,
    eps: float,
    memory: Mapping | None = None,
    cap: int = 24,
) -> MisResult:
    """Independent set of size at least ``|I*| - eps/(1+eps) * n``.

    Uses a ball-growing clustering of ``H`` from preprocessing. In
    SUPPORTED/LOCAL mode cluster members gather ``G[C]`` over support edges
    inside the cluster for ``max cluster diameter`` rounds; in PASSIVE mode
    they can only use input edges and gather for ``max cluster size - 1``
    rounds. One more round removes every selected node that has a selected
    input-graph neighbour with a smaller identifier.
    """
    if memory is None:
        memory = preprocess(inst.support, ball_clustering_preprocessor(eps))
    for v, m in memory.items():
        if not isinstance(m, Mapping) or "members" not in m:
            raise RuntimeError(f"node {v} lacks ball-clustering memory")
        if len(m["members"]) > cap:
            raise CapacityError(f"cluster of size {len(m['members'])} exceeds exact-MIS cap {cap}")
    passive = inst.mode is Mode.PASSIVE
    trace = run(inst, lambda: _ClusterOptimal(passive, cap), memory)
    if not trace.halted:
        raise RuntimeError("cluster-optimal MIS did not halt")
    members = frozenset(v for v, (inside, _) in trace.outputs.items() if inside)
    removed = frozenset(v for v, (_, rem) in trace.outputs.items() if rem)
    trace.outputs = {v: o[0] for v, o in trace.outputs.items()}
    return MisResult(members, trace, removed)


class _RandomPriority(NodeProgram):
    """Parallel randomized greedy, cut off after ``depth`` rounds.

    A node joins once every higher-priority neighbour has dropped out and
    drops out once a neighbour has joined; this reproduces sequential
    greedy in decreasing priority order for every node decided in time.
    Undecided nodes at the cut-off stay out, so the set is independent but
    possibly not maximal.
    """

    UNDECIDED, IN, OUT = 0, 1, 2

    def __init__(self, depth: int):
        self.depth = depth

    def initialize(self, ctx):
        self.key = (float(ctx.rng.random()), ctx.node_id)
        self.state = self.UNDECIDED
        if not ctx.g_neighbors:
            ctx.halt(1)
            return None
        if self.depth == 0:
            ctx.halt(0)
            return None
        return self._send(ctx)

    def _send(self, ctx):
        msg = (self.key, self.state)
        return {u: msg for u in ctx.g_neighbors}

    def step(self, ctx, r, inbox):
        if self.state == self.UNDECIDED:
            states = list(inbox.values())
            if any(s == self.IN for _, s in states):
                self.state = self.OUT
            elif all(s == self.OUT or k < self.key for k, s in states):
                self.state = self.IN
        if r >= self.depth:
            ctx.halt(1 if self.state == self.IN else 0)
            return None
        return self._send(ctx)


def random_priority_mis(target, seed: int, depth: int = 5) -> MisResult:
    """Random-priority independent set on a graph (LOCAL) or an instance's input graph."""
    inst = target if isinstance(target, SupportedInstance) else SupportedInstance.local(target)
    trace = run(inst, lambda: _RandomPriority(depth), seed=seed, max_rounds=max(depth, 0))
    members = frozenset(v for v, o in trace.outputs.items() if o == 1)
    return MisResult(members, trace)

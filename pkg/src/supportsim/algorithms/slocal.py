"""SLOCAL algorithms, their sequential executor, and two distributed simulations.

An SLOCAL algorithm with locality ``t`` processes nodes one at a time; the
node being processed sees the radius-``t`` ball of the input graph ``G``
around it, including outputs already written inside that ball.

Both simulations realise the order ``(phase, cluster, node id)`` and return
it, so a caller can replay it through :func:`slocal_run_sequential` and
compare outputs exactly.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from ..decompose import decomposition_preprocessor, distance_coloring_preprocessor
from ..engine import ExecutionTrace, NodeProgram, preprocess, run
from ..graphcore import Graph, Mode, SupportedInstance

__all__ = [
    "SlocalView",
    "SlocalAlgorithm",
    "LocalityViolation",
    "MissingPreprocessing",
    "slocal_run_sequential",
    "slocal_greedy_mis",
    "slocal_greedy_coloring",
    "simulate_slocal_supported",
    "simulate_slocal_passive",
    "SlocalResult",
]

_UNSET = object()


class LocalityViolation(RuntimeError):
    """An SLOCAL algorithm looked outside its radius-t ball."""


class MissingPreprocessing(RuntimeError):
    """A simulation was started without the memory it depends on."""


class SlocalView:
    """Radius-``t`` ball of ``G`` around ``center`` with outputs written so far."""

    __slots__ = ("center", "radius", "dist", "_adj", "_outputs")

    def __init__(self, center, radius, dist, adj, outputs):
        self.center = center
        self.radius = radius
        self.dist = dist
        self._adj = adj
        self._outputs = outputs

    def _check(self, u):
        if u not in self.dist:
            raise LocalityViolation(f"node {u} is outside the radius-{self.radius} ball of {self.center}")

    def neighbors(self, u) -> tuple[int, ...]:
        self._check(u)
        return self._adj[u]

    def output(self, u, default=None):
        self._check(u)
        return self._outputs.get(u, default)

    def is_processed(self, u) -> bool:
        self._check(u)
        return u in self._outputs

    @property
    def nodes(self):
        return sorted(self.dist)


@dataclass(frozen=True)
class SlocalAlgorithm:
    locality: int
    process: Callable[[int, SlocalView], Any]
    name: str = "slocal"


def _make_view(adj_of: Callable[[int], tuple[int, ...]], outputs: Mapping, v: int, t: int) -> SlocalView:
    dist = {v: 0}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if dist[x] == t:
            continue
        for y in adj_of(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    adj = {x: tuple(y for y in adj_of(x) if y in dist) for x in dist}
    outs = {x: outputs[x] for x in dist if x in outputs}
    return SlocalView(v, t, dist, adj, outs)


def slocal_run_sequential(g: Graph, alg: SlocalAlgorithm, order) -> dict[int, Any]:
    """Reference executor: process ``order`` one node at a time."""
    order = list(order)
    if sorted(order) != sorted(g.nodes):
        raise ValueError("order must be a permutation of the nodes")
    outputs: dict[int, Any] = {}
    for v in order:
        outputs[v] = alg.process(v, _make_view(g.neighbors, outputs, v, alg.locality))
    return outputs


def _greedy_mis(v, view):
    return int(not any(view.output(u) == 1 for u in view.neighbors(v)))


def _greedy_coloring(v, view):
    taken = {view.output(u) for u in view.neighbors(v)}
    c = 1
    while c in taken:
        c += 1
    return c


def slocal_greedy_mis() -> SlocalAlgorithm:
    """Join (output 1) iff no already-processed neighbour has joined."""
    return SlocalAlgorithm(1, _greedy_mis, "greedy_mis")


def slocal_greedy_coloring() -> SlocalAlgorithm:
    """Take the least colour not used by already-coloured neighbours."""
    return SlocalAlgorithm(1, _greedy_coloring, "greedy_coloring")


# ---------------------------------------------------------------------------
# shared gather machinery


class _Gatherer(NodeProgram):
    """Floods knowledge ``{node: [G-neighbours, output]}`` and computes on schedule.

    Only new facts are forwarded, which is equivalent to forwarding the full
    knowledge every round. A node computes at the end of its phase and
    keeps relaying until the last phase ends.
    """

    def __init__(self, alg: SlocalAlgorithm, compute_round: Callable, total_rounds: Callable, members: Callable):
        self.alg = alg
        self._compute_round = compute_round
        self._total_rounds = total_rounds
        self._members = members

    def initialize(self, ctx):
        self.nbrs = {ctx.node_id: ctx.g_neighbors}
        self.outs: dict[int, Any] = {}
        self.when = self._compute_round(ctx.memory)
        self.end = self._total_rounds(ctx.memory)
        self.output = _UNSET
        return self._send(ctx, {ctx.node_id: ctx.g_neighbors}, {})

    def _send(self, ctx, new_nbrs, new_outs):
        if not new_nbrs and not new_outs:
            return None
        msg = (new_nbrs, new_outs)
        return {u: msg for u in ctx.neighbors}

    def step(self, ctx, r, inbox):
        new_nbrs, new_outs = {}, {}
        for _, (nb, outs) in sorted(inbox.items()):
            for x, lst in nb.items():
                if x not in self.nbrs:
                    self.nbrs[x] = lst
                    new_nbrs[x] = lst
            for x, o in outs.items():
                if x not in self.outs:
                    self.outs[x] = o
                    new_outs[x] = o
        if r == self.when:
            mine = self._compute(ctx)
            self.output = mine
            self.outs[ctx.node_id] = mine
            new_outs[ctx.node_id] = mine
        if r >= self.end:
            ctx.halt(self.output)
            return None
        return self._send(ctx, new_nbrs, new_outs)

    def _adj(self, x):
        try:
            return self.nbrs[x]
        except KeyError:
            raise RuntimeError(
                f"gather incomplete: adjacency of node {x} unknown at compute time"
            ) from None

    def _compute(self, ctx):
        local = dict(self.outs)
        members = self._members(ctx)
        for u in members:
            view = _make_view(self._adj, local, u, self.alg.locality)
            # every ball node's own adjacency must be known for the induced view
            for x in view.dist:
                self._adj(x)
            local[u] = self.alg.process(u, view)
        return local[ctx.node_id]


@dataclass
class SlocalResult:
    outputs: dict
    trace: ExecutionTrace
    order: list


def _require(memory, keys, what):
    if not memory:
        raise MissingPreprocessing(f"{what} requires preprocessed memory")
    for v, mem in memory.items():
        if not isinstance(mem, Mapping) or any(k not in mem for k in keys):
            raise MissingPreprocessing(f"{what}: node {v} lacks memory keys {keys}")


def simulate_slocal_supported(
    inst: SupportedInstance,
    alg: SlocalAlgorithm,
    memory: Mapping[int, Any] | None = None,
    max_rounds: int = 1_000_000,
) -> SlocalResult:
    """Run ``alg`` in SUPPORTED mode using a network decomposition of ``H^t``.

    Colour classes run one after another, each for ``t*(D+1)`` rounds where
    ``D`` is the largest weak diameter. During a phase knowledge floods
    over all support edges; at the phase end every member of an active
    cluster replays the cluster's sequential execution (ascending ids)
    against the outputs it has gathered and keeps its own result. Members
    of a cluster are within ``t*D`` support hops of each other, so they all
    see identical data and agree without a dissemination step.
    """
    if inst.mode is Mode.PASSIVE:
        raise ValueError("use simulate_slocal_passive for PASSIVE instances")
    if memory is None:
        memory = preprocess(inst.support, decomposition_preprocessor(alg.locality))
    _require(memory, ("nd_color", "cluster", "members", "num_colors", "phase_length", "locality"), "SUPPORTED simulation")
    if any(m["locality"] < alg.locality for m in memory.values()):
        raise MissingPreprocessing("decomposition was computed for a smaller locality")

    prog = lambda: _Gatherer(  # noqa: E731
        alg,
        compute_round=lambda m: m["nd_color"] * m["phase_length"],
        total_rounds=lambda m: m["num_colors"] * m["phase_length"],
        members=lambda ctx: ctx.memory["members"],
    )
    trace = run(inst, prog, memory, max_rounds=max_rounds)
    if not trace.halted:
        raise RuntimeError("SUPPORTED simulation exceeded max_rounds")
    any_mem = next(iter(memory.values()))
    trace.extra.update(num_colors=any_mem["num_colors"], phase_length=any_mem["phase_length"])
    order = sorted(inst.support.nodes, key=lambda v: (memory[v]["nd_color"], memory[v]["cluster"], v))
    return SlocalResult(dict(trace.outputs), trace, order)


def simulate_slocal_passive(
    inst: SupportedInstance,
    alg: SlocalAlgorithm,
    memory: Mapping[int, Any] | None = None,
    max_rounds: int = 1_000_000,
) -> SlocalResult:
    """Run ``alg`` using only input edges, scheduled by a distance-(2t+1) colouring of ``H``.

    Colour ``c`` nodes compute at round ``c*t``: the previous ``t`` rounds
    of flooding over ``G`` bring them the adjacency and outputs of their
    radius-``t`` ball. Nodes within ``2t+1`` hops never share a colour, so
    no two simultaneous computations can see each other.
    """
    t = alg.locality
    if memory is None:
        memory = preprocess(inst.support, distance_coloring_preprocessor(2 * t + 1))
    _require(memory, ("color", "k", "palette"), "passive simulation")
    if any(m["k"] < 2 * t + 1 for m in memory.values()):
        raise MissingPreprocessing(f"passive simulation needs a distance-{2 * t + 1} colouring")
    palette = max(m["palette"] for m in memory.values())
    passive = inst if inst.mode is not Mode.SUPPORTED else inst.with_mode(Mode.PASSIVE)

    prog = lambda: _Gatherer(  # noqa: E731
        alg,
        compute_round=lambda m: m["color"] * t,
        total_rounds=lambda m: palette * t,
        members=lambda ctx: (ctx.node_id,),
    )
    trace = run(passive, prog, memory, max_rounds=max_rounds)
    if not trace.halted:
        raise RuntimeError("passive simulation exceeded max_rounds")
    trace.extra.update(palette=palette)
    order = sorted(inst.support.nodes, key=lambda v: (memory[v]["color"], v))
    return SlocalResult(dict(trace.outputs), trace, order)

"""Synchronous round-based execution of node programs.

A run has two phases. Preprocessing sees only the support graph ``H`` and
stores one value per node. Solving then proceeds in lockstep rounds on a
:class:`~supportsim.graphcore.SupportedInstance`:

* ``initialize`` is called once per node and returns the outbox for round 1;
  halting here means the node used zero rounds.
* In round ``r`` every pending outbox is delivered simultaneously, then
  each still-active node's ``step(r, inbox)`` runs and returns the outbox
  for round ``r + 1``.

Communication edges are ``E(H)`` in SUPPORTED mode and ``E(G)`` in PASSIVE
and LOCAL mode. Sending across any other pair raises
:class:`ProtocolViolation`.

Per-node randomness comes from ``numpy.random.SeedSequence(seed,
spawn_key=(node_id,))``, so each node's stream depends only on the
experiment seed and its own id, never on scheduling order.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .graphcore import Graph, Mode, SupportedInstance, connected_components

log = logging.getLogger(__name__)

__all__ = [
    "NodeContext",
    "NodeProgram",
    "ExecutionTrace",
    "ProtocolViolation",
    "PreprocessingError",
    "node_rng",
    "preprocess",
    "run",
    "to_jsonable",
    "GlobalPreprocessor",
]


class ProtocolViolation(RuntimeError):
    """A node tried to send on a pair that is not a communication edge."""


class PreprocessingError(RuntimeError):
    def __init__(self, node, cause):
        super().__init__(f"preprocessor failed at node {node}: {cause!r}")
        self.node = node
        self.cause = cause


def node_rng(seed: int, node_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(node_id),)))


class NodeContext:
    """Everything a node may look at: never the global graph."""

    __slots__ = ("node_id", "neighbors", "in_g", "memory", "input", "_seed", "_rng", "_halted", "_output")

    def __init__(self, node_id, neighbors, in_g, memory, input_label, seed):
        self.node_id = node_id
        self.neighbors: tuple[int, ...] = neighbors
        self.in_g: Mapping[int, bool] = in_g
        self.memory = memory
        self.input = input_label
        self._seed = seed
        self._rng = None
        self._halted = False
        self._output = None

    @property
    def g_neighbors(self) -> tuple[int, ...]:
        return tuple(u for u in self.neighbors if self.in_g[u])

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = node_rng(self._seed, self.node_id)
        return self._rng

    @property
    def halted(self) -> bool:
        return self._halted

    def halt(self, output=None) -> None:
        if self._halted:
            raise RuntimeError(f"node {self.node_id} halted twice")
        self._halted = True
        self._output = output


class NodeProgram:
    """Base class for per-node state machines.

    One instance is created per node. Subclasses keep their state on
    ``self``; ``step`` must be a deterministic function of that state, the
    inbox and ``ctx.rng``.
    """

    def initialize(self, ctx: NodeContext) -> dict | None:
        return None

    def step(self, ctx: NodeContext, round_no: int, inbox: dict) -> dict | None:
        raise NotImplementedError


@dataclass
class ExecutionTrace:
    rounds_used: int
    outputs: dict
    halted: bool
    message_count: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "rounds": self.rounds_used,
            "halted": self.halted,
            "outputs": {str(k): to_jsonable(v) for k, v in sorted(self.outputs.items())},
            "messages": self.message_count,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def to_jsonable(value):
    if isinstance(value, (frozenset, set)):
        return sorted(to_jsonable(v) for v in value)
    if isinstance(value, (tuple, list)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in sorted(value.items())}
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class GlobalPreprocessor:
    """Adapts ``fn(H) -> {node: value}`` to the per-node preprocessor protocol.

    The global structure is computed once per support graph and then read
    out node by node.
    """

    def __init__(self, fn: Callable[[Graph], Mapping[int, Any]], name: str | None = None):
        self.fn = fn
        self.name = name or getattr(fn, "__name__", "preprocessor")
        self._cache: tuple[Graph, Mapping[int, Any]] | None = None

    def __call__(self, h: Graph, v: int):
        if self._cache is None or self._cache[0] is not h:
            self._cache = (h, self.fn(h))
        return self._cache[1][v]

    def __repr__(self):
        return f"GlobalPreprocessor({self.name})"


def preprocess(h: Graph, preprocessor: Callable[[Graph, int], Any]) -> dict[int, Any]:
    """Run ``preprocessor(H, v)`` for every node of the support graph.

    The preprocessor receives ``H`` only; input edges do not exist yet.
    """
    if h.n and len(connected_components(h)) > 1:
        log.warning("support graph is disconnected (%d components)", len(connected_components(h)))
    memory = {}
    for v in h.nodes:
        try:
            memory[v] = preprocessor(h, v)
        except Exception as exc:
            raise PreprocessingError(v, exc) from exc
    return memory


def _comm_neighbors(inst: SupportedInstance) -> dict[int, tuple[int, ...]]:
    h = inst.support
    if inst.mode is Mode.SUPPORTED:
        return dict(h.adj)
    return {v: tuple(u for u in h.adj[v] if inst.in_input(u, v)) for v in h.nodes}


def run(
    inst: SupportedInstance,
    program: Callable[[], NodeProgram],
    memory: Mapping[int, Any] | None = None,
    max_rounds: int = 10_000,
    seed: int = 0,
    inputs: Mapping[int, Any] | None = None,
) -> ExecutionTrace:
    """Execute ``program`` (a zero-argument factory) on every node in lockstep."""
    memory = memory or {}
    inputs = inputs or {}
    comm = _comm_neighbors(inst)
    comm_sets = {v: frozenset(nb) for v, nb in comm.items()}
    nodes = sorted(inst.support.nodes)
    contexts: dict[int, NodeContext] = {}
    programs: dict[int, NodeProgram] = {}
    pending: dict[int, dict] = {}
    halt_round: dict[int, int] = {}
    messages = 0

    def check_outbox(v, outbox):
        if not outbox:
            return {}
        allowed = comm_sets[v]
        for u in outbox:
            if u not in allowed:
                raise ProtocolViolation(
                    f"node {v} sent to {u} which is not a communication neighbour in {inst.mode.value} mode"
                )
        return outbox

    for v in nodes:
        nbrs = comm[v]
        in_g = {u: inst.in_input(u, v) for u in nbrs}
        ctx = NodeContext(v, nbrs, in_g, memory.get(v), inputs.get(v), seed)
        contexts[v] = ctx
        prog = program()
        programs[v] = prog
        out = prog.initialize(ctx)
        if ctx.halted:
            halt_round[v] = 0
        else:
            pending[v] = check_outbox(v, out)

    r = 0
    while len(halt_round) < len(nodes):
        if r >= max_rounds:
            break
        r += 1
        inboxes: dict[int, dict] = {}
        for v in sorted(pending):
            for u, msg in pending[v].items():
                inboxes.setdefault(u, {})[v] = msg
                messages += 1
        pending = {}
        for v in nodes:
            if v in halt_round:
                continue
            ctx = contexts[v]
            out = programs[v].step(ctx, r, inboxes.get(v, {}))
            if ctx.halted:
                halt_round[v] = r
            else:
                pending[v] = check_outbox(v, out)

    halted = len(halt_round) == len(nodes)
    rounds_used = max(halt_round.values(), default=0) if halted else r
    outputs = {v: contexts[v]._output for v in nodes if v in halt_round}
    return ExecutionTrace(rounds_used, outputs, halted, messages)

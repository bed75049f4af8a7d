"""Locally checkable labellings and their checkers.

A problem is a finite input alphabet, a finite output alphabet, a check
radius ``r`` and a predicate evaluated at every node on the radius-``r``
ball. The predicate gets a :class:`CheckView` and cannot see further.

Port numbers: port ``i`` of node ``v`` is the ``i``-th entry of ``v``'s
sorted neighbour list in the checked graph. Orientations and edge
colourings are written on nodes in terms of ports.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Container, Mapping

from .graphcore import Graph, bfs_distances

__all__ = [
    "CheckView",
    "LclProblem",
    "CheckReport",
    "LabelFormatError",
    "check_labeling",
    "approx_ratio",
    "maximal_independent_set",
    "independent_set",
    "maximal_matching",
    "vertex_coloring",
    "delta_plus_one_coloring",
    "edge_coloring",
    "sinkless_orientation",
    "dominating_set",
    "PROBLEMS",
    "problem_by_key",
    "arcs_to_ports",
    "ports_to_arcs",
    "is_independent",
    "is_maximal_independent",
]


class LabelFormatError(ValueError):
    """A label lies outside the problem's alphabet."""


class CheckView:
    """Radius-``r`` ball of the checked graph around ``center``.

    Every node in the ball comes with its full neighbour list (so ports are
    well defined) and its ``(input, output)`` label.
    """

    __slots__ = ("center", "radius", "dist", "_adj", "_labels")

    def __init__(self, center, radius, dist, adj, labels):
        self.center = center
        self.radius = radius
        self.dist = dist
        self._adj = adj
        self._labels = labels

    def _check(self, u):
        if u not in self.dist:
            raise KeyError(f"node {u} is outside the radius-{self.radius} check view of {self.center}")

    def neighbors(self, u) -> tuple[int, ...]:
        self._check(u)
        return self._adj[u]

    def port(self, u, w) -> int:
        return self.neighbors(u).index(w)

    def output(self, u):
        self._check(u)
        return self._labels[u][1]

    def input(self, u):
        self._check(u)
        return self._labels[u][0]


class _Anything:
    def __contains__(self, item):
        return True

    def __repr__(self):
        return "ANY"


ANY = _Anything()


@dataclass(frozen=True)
class LclProblem:
    """``predicate(view)`` returns ``None`` when the centre is happy, else a reason."""

    name: str
    radius: int
    predicate: Callable[[CheckView], str | None]
    inputs: Container = ANY
    outputs: Callable[[Graph, int], Container] | Container = ANY

    def output_alphabet(self, g: Graph, v: int) -> Container:
        return self.outputs(g, v) if callable(self.outputs) else self.outputs


@dataclass
class CheckReport:
    accepted: bool
    violations: list = field(default_factory=list)
    quality: Any = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.accepted != (not self.violations):
            raise ValueError("accepted must hold exactly when there are no violations")

    @classmethod
    def from_violations(cls, violations, quality=None, **details):
        return cls(not violations, list(violations), quality, details)

    def to_json(self) -> str:
        q = self.quality
        if isinstance(q, Fraction):
            q = float(q)
        elif isinstance(q, float) and math.isinf(q):
            q = "inf"
        payload = {
            "accepted": self.accepted,
            "violations": [[v, reason] for v, reason in self.violations],
            "quality": q,
        }
        if self.details:
            payload["details"] = self.details
        return json.dumps(payload, sort_keys=True, indent=1, default=str)


def _view(g: Graph, labels, v: int, r: int) -> CheckView:
    dist = bfs_distances(g, v, r)
    return CheckView(v, r, dist, {x: g.adj[x] for x in dist}, {x: labels[x] for x in dist})


def check_labeling(g: Graph, problem: LclProblem, labels: Mapping[int, Any], outputs_only: bool = False) -> CheckReport:
    """Evaluate ``problem`` at every node.

    ``labels`` maps node -> ``(input, output)``; with ``outputs_only`` it
    maps node -> output and every input is ``None``.
    """
    if outputs_only:
        labels = {v: (None, o) for v, o in labels.items()}
    missing = [v for v in g.nodes if v not in labels]
    if missing:
        raise LabelFormatError(f"labels missing for nodes {missing[:5]}")
    for v in g.nodes:
        i, o = labels[v]
        if i not in problem.inputs:
            raise LabelFormatError(f"input label {i!r} at node {v} outside alphabet")
        if o not in problem.output_alphabet(g, v):
            raise LabelFormatError(f"output label {o!r} at node {v} outside alphabet of {problem.name}")
    violations = []
    for v in g.nodes:
        reason = problem.predicate(_view(g, labels, v, problem.radius))
        if reason is not None:
            violations.append((v, reason))
    return CheckReport.from_violations(violations)


def approx_ratio(solution_size: int, optimum: int) -> Fraction | float:
    """``optimum / solution_size`` for a maximisation problem."""
    if optimum < 1:
        raise ValueError("optimum must be at least 1")
    if solution_size <= 0:
        return math.inf
    return Fraction(optimum, solution_size)


# ---------------------------------------------------------------------------
# built-in problems


def _mis_pred(maximal: bool):
    def pred(view: CheckView):
        v = view.center
        mine = view.output(v)
        nbr_in = [u for u in view.neighbors(v) if view.output(u) == 1]
        if mine == 1 and nbr_in:
            return f"adjacent to set member {nbr_in[0]}"
        if maximal and mine == 0 and not nbr_in:
            return "not dominated (set is not maximal)"
        return None

    return pred


def maximal_independent_set() -> LclProblem:
    return LclProblem("mis", 1, _mis_pred(True), outputs={0, 1})


def independent_set() -> LclProblem:
    return LclProblem("independent_set", 1, _mis_pred(False), outputs={0, 1})


def dominating_set() -> LclProblem:
    def pred(view):
        v = view.center
        if view.output(v) == 1 or any(view.output(u) == 1 for u in view.neighbors(v)):
            return None
        return "not dominated"

    return LclProblem("dominating_set", 1, pred, outputs={0, 1})


def _ports(g: Graph, v: int):
    return range(g.degree(v))


def maximal_matching() -> LclProblem:
    """Output is the port of the matched neighbour, or ``None``."""

    def pred(view):
        v = view.center
        nb = view.neighbors(v)
        p = view.output(v)
        if p is not None:
            u = nb[p]
            q = view.output(u)
            if q is None or view.neighbors(u)[q] != v:
                return f"matched to {u} which does not reciprocate"
            return None
        for u in nb:
            if view.output(u) is None:
                return f"unmatched neighbour {u}: matching not maximal"
        return None

    def alphabet(g, v):
        return set(_ports(g, v)) | {None}

    return LclProblem("maximal_matching", 1, pred, outputs=alphabet)


def vertex_coloring(num_colors: int) -> LclProblem:
    palette = frozenset(range(1, num_colors + 1))

    def pred(view):
        v = view.center
        c = view.output(v)
        for u in view.neighbors(v):
            if view.output(u) == c:
                return f"same colour {c} as neighbour {u}"
        return None

    return LclProblem(f"{num_colors}-coloring", 1, pred, outputs=palette)


def delta_plus_one_coloring(delta: int) -> LclProblem:
    p = vertex_coloring(delta + 1)
    return LclProblem(f"(delta+1)-coloring[delta={delta}]", 1, p.predicate, outputs=p.outputs)


def edge_coloring(delta: int) -> LclProblem:
    """(2Δ-1)-edge colouring; a node's output lists one colour per port."""
    palette = set(range(1, 2 * delta))

    def pred(view):
        v = view.center
        cols = view.output(v)
        nb = view.neighbors(v)
        if len(set(cols)) != len(cols):
            return "two incident edges share a colour"
        for i, u in enumerate(nb):
            theirs = view.output(u)[view.port(u, v)]
            if theirs != cols[i]:
                return f"edge to {u} coloured {cols[i]} here but {theirs} there"
        return None

    class _Alpha:
        def __init__(self, deg):
            self.deg = deg

        def __contains__(self, item):
            return isinstance(item, tuple) and len(item) == self.deg and all(c in palette for c in item)

    return LclProblem(f"edge-coloring[{2 * delta - 1}]", 1, pred, outputs=lambda g, v: _Alpha(g.degree(v)))


def sinkless_orientation(min_degree: int = 2) -> LclProblem:
    """Output: frozenset of out-ports. Nodes of degree >= ``min_degree`` must not be sinks."""

    def pred(view):
        v = view.center
        out = view.output(v)
        nb = view.neighbors(v)
        for i, u in enumerate(nb):
            mine = i in out
            theirs = view.port(u, v) in view.output(u)
            if mine == theirs:
                return f"edge to {u} is {'oriented both ways' if mine else 'unoriented'}"
        if len(nb) >= min_degree and not out:
            return f"sink of degree {len(nb)}"
        return None

    class _Alpha:
        def __init__(self, deg):
            self.deg = deg

        def __contains__(self, item):
            return isinstance(item, frozenset) and all(isinstance(p, int) and 0 <= p < self.deg for p in item)

    return LclProblem("sinkless_orientation", 1, pred, outputs=lambda g, v: _Alpha(g.degree(v)))


def arcs_to_ports(g: Graph, arcs) -> dict[int, frozenset]:
    out: dict[int, set] = {v: set() for v in g.nodes}
    for u, v in arcs:
        out[u].add(g.adj[u].index(v))
    return {v: frozenset(p) for v, p in out.items()}


def ports_to_arcs(g: Graph, ports: Mapping[int, frozenset]) -> set[tuple[int, int]]:
    return {(v, g.adj[v][p]) for v, ps in ports.items() for p in ps}


def is_independent(g: Graph, members) -> bool:
    s = set(members)
    return not any(u in s and v in s for u, v in g.edges())


def is_maximal_independent(g: Graph, members) -> bool:
    s = set(members)
    return is_independent(g, s) and all(v in s or any(u in s for u in g.adj[v]) for v in g.nodes)


PROBLEMS: dict[str, Callable[..., LclProblem]] = {
    "mis": maximal_independent_set,
    "independent_set": independent_set,
    "maximal_matching": maximal_matching,
    "coloring": delta_plus_one_coloring,
    "edge_coloring": edge_coloring,
    "sinkless_orientation": sinkless_orientation,
    "dominating_set": dominating_set,
}


def problem_by_key(key: str, g: Graph | None = None) -> LclProblem:
    """Build a registered problem; Δ-dependent ones take Δ from ``g``."""
    if key not in PROBLEMS:
        raise KeyError(f"unknown problem {key!r}; choose from {sorted(PROBLEMS)}")
    if key in ("coloring", "edge_coloring"):
        if g is None:
            raise ValueError(f"problem {key!r} needs a graph to fix delta")
        return PROBLEMS[key](max(g.max_degree, 1))
    return PROBLEMS[key]()

"""Graphs, supported instances, generators and local views.

Node identifiers are positive integers. Every generator numbers its nodes
``1..n`` so that identifier order is also the natural processing order.
"""
from __future__ import annotations

import enum
import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

__all__ = [
    "Graph",
    "Mode",
    "SupportedInstance",
    "LocalView",
    "GraphError",
    "CapacityError",
    "generate",
    "ball",
    "bfs_distances",
    "girth",
    "graph_power",
    "subgraph",
    "extract_view",
    "views_isomorphic",
    "graphs_isomorphic",
    "canonical_view",
    "connected_components",
    "read_edge_list",
    "write_edge_list",
    "read_mask",
    "write_mask",
]

ISO_CAP = 32


class GraphError(ValueError):
    """Invalid graph parameters or inconsistent graph data."""


class CapacityError(RuntimeError):
    """An exact (exponential) routine was asked to handle too large an input."""


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    ``adj`` maps each node id to the sorted tuple of its neighbours.
    """

    adj: Mapping[int, tuple[int, ...]]

    def __post_init__(self):
        for v, nbrs in self.adj.items():
            if v in nbrs:
                raise GraphError(f"self-loop at node {v}")
            if len(set(nbrs)) != len(nbrs):
                raise GraphError(f"parallel edge at node {v}")
            for u in nbrs:
                if u not in self.adj or v not in self.adj[u]:
                    raise GraphError(f"asymmetric adjacency {v}->{u}")

    @classmethod
    def from_edges(cls, nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> "Graph":
        nbrs: dict[int, set[int]] = {int(v): set() for v in nodes}
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if u not in nbrs or v not in nbrs:
                raise GraphError(f"edge ({u}, {v}) references unknown node")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls({v: tuple(sorted(nbrs[v])) for v in sorted(nbrs)})

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(self.adj)

    @property
    def n(self) -> int:
        return len(self.adj)

    def neighbors(self, v: int) -> tuple[int, ...]:
        try:
            return self.adj[v]
        except KeyError:
            raise KeyError(f"unknown node {v}") from None

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    @property
    def max_degree(self) -> int:
        return max((len(nb) for nb in self.adj.values()), default=0)

    def edges(self) -> list[tuple[int, int]]:
        """Sorted list of edges as ``(u, v)`` with ``u < v``."""
        return sorted((u, v) for u, nb in self.adj.items() for v in nb if u < v)

    @property
    def m(self) -> int:
        return sum(len(nb) for nb in self.adj.values()) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return u in self.adj and v in self.adj[u]

    def induced(self, nodes: Iterable[int]) -> "Graph":
        keep = set(nodes)
        return Graph({v: tuple(u for u in self.adj[v] if u in keep) for v in sorted(keep)})

    def relabel(self, mapping: Mapping[int, int]) -> "Graph":
        return Graph.from_edges(
            (mapping[v] for v in self.adj), ((mapping[u], mapping[v]) for u, v in self.edges())
        )

    def __eq__(self, other):
        return isinstance(other, Graph) and dict(self.adj) == dict(other.adj)

    def __hash__(self):
        return hash(tuple(self.edges())) ^ hash(self.nodes)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


class Mode(str, enum.Enum):
    LOCAL = "local"
    SUPPORTED = "supported"
    PASSIVE = "passive"


@dataclass(frozen=True)
class SupportedInstance:
    """A support graph ``H`` together with the input edges of ``G``."""

    support: Graph
    input_edges: frozenset = field(default=None)  # type: ignore[assignment]
    mode: Mode = Mode.SUPPORTED

    def __post_init__(self):
        mode = Mode(self.mode)
        object.__setattr__(self, "mode", mode)
        if self.input_edges is None:
            edges = frozenset(self.support.edges())
        else:
            edges = frozenset(_norm(int(u), int(v)) for u, v in self.input_edges)
        for u, v in edges:
            if not self.support.has_edge(u, v):
                raise GraphError(f"input edge ({u}, {v}) is not a support edge")
        if mode is Mode.LOCAL and len(edges) != self.support.m:
            raise GraphError("LOCAL mode requires input_edges == E(H)")
        object.__setattr__(self, "input_edges", edges)

    @classmethod
    def local(cls, g: Graph) -> "SupportedInstance":
        return cls(g, None, Mode.LOCAL)

    def in_input(self, u: int, v: int) -> bool:
        return _norm(u, v) in self.input_edges

    @property
    def input_graph(self) -> Graph:
        return subgraph(self)

    def with_mode(self, mode: Mode | str) -> "SupportedInstance":
        return SupportedInstance(self.support, self.input_edges, Mode(mode))


def subgraph(inst: SupportedInstance) -> Graph:
    """The input graph ``G``: all support nodes, only the input edges."""
    return Graph.from_edges(inst.support.nodes, inst.input_edges)


# ---------------------------------------------------------------------------
# generators


def _cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return Graph.from_edges(range(1, n + 1), ((i, i % n + 1) for i in range(1, n + 1)))


def _path(n: int) -> Graph:
    if n < 1:
        raise GraphError("path needs n >= 1")
    return Graph.from_edges(range(1, n + 1), ((i, i + 1) for i in range(1, n)))


def _clique(n: int) -> Graph:
    if n < 1:
        raise GraphError("clique needs n >= 1")
    return Graph.from_edges(range(1, n + 1), itertools.combinations(range(1, n + 1), 2))


def _grid(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1:
        raise GraphError("grid dimensions must be positive")
    idx = lambda r, c: r * cols + c + 1  # noqa: E731
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((idx(r, c), idx(r, c + 1)))
            if r + 1 < rows:
                edges.append((idx(r, c), idx(r + 1, c)))
    return Graph.from_edges(range(1, rows * cols + 1), edges)


def _petersen() -> Graph:
    outer = [(i, i % 5 + 1) for i in range(1, 6)]
    spokes = [(i, i + 5) for i in range(1, 6)]
    inner = [(i + 5, (i + 1) % 5 + 6) for i in range(1, 6)]
    return Graph.from_edges(range(1, 11), outer + spokes + inner)


def _heawood() -> Graph:
    # LCF notation [5, -5]^7
    edges = [(i, i % 14 + 1) for i in range(1, 15)]
    for i in range(14):
        j = (i + (5 if i % 2 == 0 else -5)) % 14
        edges.append((i + 1, j + 1))
    return Graph.from_edges(range(1, 15), edges)


def _random_regular(n: int, d: int, seed: int, min_girth: int | None = None) -> Graph:
    if n < 1 or d < 0 or d >= n:
        raise GraphError("random_regular needs 0 <= d < n")
    if (n * d) % 2:
        raise GraphError("random_regular needs n*d even")
    rng = random.Random(seed)
    for _ in range(100_000):
        stubs = [v for v in range(1, n + 1) for _ in range(d)]
        rng.shuffle(stubs)
        edges = set()
        ok = True
        for a, b in zip(stubs[::2], stubs[1::2]):
            e = _norm(a, b)
            if a == b or e in edges:
                ok = False
                break
            edges.add(e)
        if not ok:
            continue
        g = Graph.from_edges(range(1, n + 1), edges)
        if min_girth is not None and girth(g) < min_girth:
            continue
        return g
    raise GraphError(f"random_regular({n}, {d}) rejection sampling did not converge")


def generate(family: str, **params) -> Graph:
    """Build a graph of the named family.

    Families and their parameters: ``cycle(n)``, ``path(n)``, ``clique(n)``,
    ``grid(rows, cols)``, ``random_regular(n, d, seed, min_girth=None)``,
    ``petersen()``, ``heawood()``, ``star(leaves)``, ``empty(n)``.
    """
    if family == "cycle":
        return _cycle(params["n"])
    if family == "path":
        return _path(params["n"])
    if family == "clique":
        return _clique(params["n"])
    if family == "grid":
        return _grid(params["rows"], params.get("cols", params["rows"]))
    if family == "random_regular":
        return _random_regular(params["n"], params["d"], params.get("seed", 0), params.get("min_girth"))
    if family == "petersen":
        return _petersen()
    if family == "heawood":
        return _heawood()
    if family == "star":
        k = params["leaves"]
        return Graph.from_edges(range(1, k + 2), ((1, i) for i in range(2, k + 2)))
    if family == "empty":
        return Graph.from_edges(range(1, params["n"] + 1), ())
    raise GraphError(f"unknown graph family {family!r}")


# ---------------------------------------------------------------------------
# distances


def bfs_distances(g: Graph, v: int, limit: float = math.inf) -> dict[int, int]:
    """Hop distances from ``v`` to every node within ``limit`` hops."""
    g.neighbors(v)
    dist = {v: 0}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if dist[x] >= limit:
            continue
        for y in g.adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def ball(g: Graph, v: int, t: int) -> set[int]:
    if t < 0:
        raise ValueError("radius must be non-negative")
    return set(bfs_distances(g, v, t))


def connected_components(g: Graph) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for v in g.nodes:
        if v in seen:
            continue
        comp = sorted(bfs_distances(g, v))
        seen.update(comp)
        comps.append(comp)
    return comps


def girth(g: Graph) -> float:
    """Length of a shortest cycle, ``math.inf`` for forests."""
    best = math.inf
    for s in g.nodes:
        dist = {s: 0}
        parent = {s: None}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in g.adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def graph_power(g: Graph, k: int) -> Graph:
    """Graph on the same nodes joining every pair at distance 1..k."""
    if k < 1:
        raise ValueError("power must be >= 1")
    if k == 1:
        return g
    edges = []
    for v in g.nodes:
        for u, d in bfs_distances(g, v, k).items():
            if u > v:
                edges.append((v, u))
    return Graph.from_edges(g.nodes, edges)


# ---------------------------------------------------------------------------
# local views


@dataclass(frozen=True)
class LocalView:
    """What a node can learn in ``radius`` rounds.

    ``dist`` holds every node within ``radius`` hops. ``edges`` maps each
    edge between two of those nodes to its in-G flag. ``stubs`` lists, for
    each node, the ``(neighbour id, in-G flag)`` pairs of edges leaving the
    ball: a node knows its own ports even when the far end is out of reach.
    """

    root: int
    radius: int
    dist: Mapping[int, int]
    edges: Mapping[tuple[int, int], bool]
    stubs: Mapping[int, tuple[tuple[int, bool], ...]]
    labels: Mapping[int, Any]

    @property
    def nodes(self) -> list[int]:
        return sorted(self.dist)

    def __len__(self):
        return len(self.dist)


def extract_view(
    inst: SupportedInstance,
    v: int,
    t: int,
    over: str = "support",
    labels: Mapping[int, Any] | None = None,
) -> LocalView:
    if t < 0:
        raise ValueError("radius must be non-negative")
    if over == "support":
        g = inst.support
        flag = inst.in_input
    elif over == "input":
        g = subgraph(inst)
        flag = lambda a, b: True  # noqa: E731
    else:
        raise ValueError(f"over must be 'support' or 'input', not {over!r}")
    dist = bfs_distances(g, v, t)
    edges = {}
    stubs = {}
    for x in dist:
        out = []
        for y in g.adj[x]:
            if y in dist:
                if x < y:
                    edges[(x, y)] = flag(x, y)
            else:
                out.append((y, flag(x, y)))
        stubs[x] = tuple(out)
    lab = {x: (labels[x] if labels is not None else None) for x in dist}
    return LocalView(v, t, dist, edges, stubs, lab)


_RESPECT = {"ids", "flags", "labels"}


def _view_signature(view: LocalView, x: int, respect: frozenset) -> tuple:
    stubs = view.stubs[x]
    if "ids" in respect:
        stub_part = tuple(sorted(stubs)) if "flags" in respect else tuple(sorted(y for y, _ in stubs))
    elif "flags" in respect:
        stub_part = tuple(sorted(f for _, f in stubs))
    else:
        stub_part = len(stubs)
    return (
        view.dist[x],
        x if "ids" in respect else None,
        repr(view.labels.get(x)) if "labels" in respect else None,
        stub_part,
    )


def _view_adj(view: LocalView, respect: frozenset) -> dict[int, dict[int, Any]]:
    adj: dict[int, dict[int, Any]] = {x: {} for x in view.dist}
    for (a, b), f in view.edges.items():
        lab = f if "flags" in respect else None
        adj[a][b] = lab
        adj[b][a] = lab
    return adj


def views_isomorphic(
    a: LocalView, b: LocalView, respect: Iterable[str] = ("flags",)
) -> tuple[bool, dict[int, int] | None]:
    """Decide whether two rooted views are isomorphic.

    The bijection must map root to root, preserve view edges, and match
    every annotation named in ``respect`` (any of ``ids``, ``flags``,
    ``labels``). Returns ``(True, mapping)`` or ``(False, None)``.
    """
    respect = frozenset(respect)
    if not respect <= _RESPECT:
        raise ValueError(f"unknown annotations {sorted(respect - _RESPECT)}")
    if a.radius != b.radius:
        raise ValueError("views must have equal radius")
    if len(a) != len(b) or len(a.edges) != len(b.edges):
        return False, None
    if len(a) > ISO_CAP:
        raise CapacityError(f"view with {len(a)} nodes exceeds isomorphism cap {ISO_CAP}")
    sig_a = {x: _view_signature(a, x, respect) for x in a.dist}
    sig_b = {x: _view_signature(b, x, respect) for x in b.dist}
    adj_a, adj_b = _view_adj(a, respect), _view_adj(b, respect)
    mapping = _match(adj_a, adj_b, sig_a, sig_b, fixed={a.root: b.root})
    return (mapping is not None), mapping


def _match(adj_a, adj_b, sig_a, sig_b, fixed=None):
    """Backtracking isomorphism search with refinement-based pruning."""
    if sorted(map(repr, sig_a.values())) != sorted(map(repr, sig_b.values())):
        return None
    nodes_a = list(adj_a)
    nodes_b = list(adj_b)
    # joint refinement keeps colour names comparable across both graphs
    union = {("a", x): {("a", y): lab for y, lab in adj_a[x].items()} for x in nodes_a}
    union.update({("b", x): {("b", y): lab for y, lab in adj_b[x].items()} for x in nodes_b})
    init = {("a", x): repr(sig_a[x]) for x in nodes_a}
    init.update({("b", x): repr(sig_b[x]) for x in nodes_b})
    if fixed:
        for x, y in fixed.items():
            init[("a", x)] = "fixed:" + repr(x)
            init[("b", y)] = "fixed:" + repr(x)
    colors = _stable_colors(union, init)
    cls_a = {x: colors[("a", x)] for x in nodes_a}
    cls_b = {x: colors[("b", x)] for x in nodes_b}
    if sorted(cls_a.values()) != sorted(cls_b.values()):
        return None
    by_class: dict[Any, list[int]] = {}
    for y in nodes_b:
        by_class.setdefault(cls_b[y], []).append(y)
    order = sorted(nodes_a, key=lambda x: (len(by_class[cls_a[x]]), cls_a[x]))
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(x, y):
        if len(adj_a[x]) != len(adj_b[y]):
            return False
        for x2, lab in adj_a[x].items():
            if x2 in mapping:
                y2 = mapping[x2]
                if y2 not in adj_b[y] or adj_b[y][y2] != lab:
                    return False
        return True

    def rec(i):
        if i == len(order):
            return True
        x = order[i]
        for y in by_class[cls_a[x]]:
            if y in used or not consistent(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if rec(i + 1):
                return True
            del mapping[x]
            used.discard(y)
        return False

    return dict(mapping) if rec(0) else None


def _stable_colors(adj, init):
    colors = dict(init)
    n_classes = len(set(colors.values()))
    while True:
        sig = {
            x: (colors[x], tuple(sorted((repr(lab), colors[y]) for y, lab in adj[x].items())))
            for x in adj
        }
        names = {s: i for i, s in enumerate(sorted(set(sig.values()), key=repr))}
        new = {x: names[sig[x]] for x in adj}
        k = len(names)
        colors = new
        if k == n_classes:
            return colors
        n_classes = k


def graphs_isomorphic(a: Graph, b: Graph, cap: int = ISO_CAP) -> tuple[bool, dict[int, int] | None]:
    """Exact isomorphism test for small graphs; returns a witness mapping a->b."""
    if max(a.n, b.n) > cap:
        raise CapacityError(f"graph with {max(a.n, b.n)} nodes exceeds isomorphism cap {cap}")
    if a.n != b.n or a.m != b.m:
        return False, None
    if sorted(len(x) for x in a.adj.values()) != sorted(len(x) for x in b.adj.values()):
        return False, None
    adj_a = {x: {y: None for y in nb} for x, nb in a.adj.items()}
    adj_b = {x: {y: None for y in nb} for x, nb in b.adj.items()}
    sig_a = {x: len(nb) for x, nb in a.adj.items()}
    sig_b = {x: len(nb) for x, nb in b.adj.items()}
    mapping = _match(adj_a, adj_b, sig_a, sig_b)
    return (mapping is not None), mapping


def canonical_view(view: LocalView, respect: Iterable[str] = ("flags",)) -> str:
    """Exact canonical string of a rooted view (refinement + minimal encoding).

    Two views have the same canonical string iff ``views_isomorphic`` holds
    for them under the same ``respect`` set.
    """
    respect = frozenset(respect)
    if len(view) > ISO_CAP:
        raise CapacityError(f"view with {len(view)} nodes exceeds isomorphism cap {ISO_CAP}")
    adj = _view_adj(view, respect)
    sig = {x: repr(_view_signature(view, x, respect)) for x in view.dist}
    sig[view.root] = "root:" + sig[view.root]
    best = [None]

    def encode(order):
        pos = {x: i for i, x in enumerate(order)}
        nodes = ";".join(sig[x] for x in order)
        edges = sorted(
            (min(pos[x], pos[y]), max(pos[x], pos[y]), repr(lab))
            for x in order
            for y, lab in adj[x].items()
            if pos[x] < pos[y]
        )
        return nodes + "|" + repr(edges)

    def search(colors):
        colors = _stable_colors(adj, colors)
        cells: dict[Any, list[int]] = {}
        for x, c in colors.items():
            cells.setdefault(c, []).append(x)
        # colour ids are ranks of canonical signatures, so sorting them is canonical
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = c
                break
        if target is None:
            order = sorted(colors, key=lambda x: colors[x])
            code = encode(order)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        for x in sorted(cells[target]):
            nxt = {y: (repr(colors[y]) if y != x else repr(colors[y]) + "*") for y in colors}
            search(nxt)

    search(sig)
    return best[0]


# ---------------------------------------------------------------------------
# edge-list files


def write_edge_list(g: Graph, path) -> None:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    isolated = [v for v in g.nodes if not g.adj[v]]
    # ids other than 1..n: isolated nodes would be lost, so list them in a comment
    if isolated and set(g.nodes) != set(range(1, g.n + 1)):
        lines.append("# isolated " + " ".join(map(str, isolated)))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    with open(path, encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    n, m = map(int, lines[0].split())
    edges = []
    nodes: set[int] = set()
    isolated: list[int] = []
    for ln in lines[1:]:
        if ln.startswith("#"):
            parts = ln[1:].split()
            if parts and parts[0] == "isolated":
                isolated = [int(x) for x in parts[1:]]
            continue
        u, v = map(int, ln.split())
        edges.append((u, v))
        nodes.update((u, v))
    if len(edges) != m:
        raise GraphError(f"header declares {m} edges, file has {len(edges)}")
    nodes.update(isolated)
    if len(nodes) != n:
        if not isolated and max(nodes, default=0) <= n:
            nodes = set(range(1, n + 1))
        else:
            raise GraphError(f"header declares {n} nodes, file has {len(nodes)}")
    return Graph.from_edges(sorted(nodes), edges)


def write_mask(edges: Iterable[tuple[int, int]], path) -> None:
    rows = sorted(_norm(u, v) for u, v in edges)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("".join(f"{u} {v}\n" for u, v in rows))


def read_mask(path) -> frozenset:
    with open(path, encoding="ascii") as fh:
        return frozenset(_norm(*map(int, ln.split())) for ln in fh if ln.strip())

"""Lower-bound instance families and indistinguishability experiments.

Two constructions:

* A six-path support on ``6n`` nodes with two input graphs ``G`` (two
  disjoint cycles) and ``G'`` (one long cycle). Nodes in the middle of
  paths 2 and 4 need ``ceil(n/2)`` rounds to tell them apart, yet a sinkless
  orientation must orient those paths differently in the two cases.
* Double covers of a regular base graph ``Q``. Every lift ``G(F)`` is a
  subgraph of the same support; random cuts make the two-copies lift and
  the bipartite lift look identical from any node up to radius ``T`` when
  ``girth(Q) > 2T + 1``.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .engine import NodeProgram, run
from .graphcore import (
    CapacityError,
    Graph,
    GraphError,
    Mode,
    SupportedInstance,
    bfs_distances,
    canonical_view,
    extract_view,
    generate,
    girth,
    graphs_isomorphic,
    subgraph,
    views_isomorphic,
)
from .verify import CheckReport, check_labeling, sinkless_orientation

__all__ = [
    "SinklessFamily",
    "build_sinkless_family",
    "sinkless_indistinguishability",
    "sinkless_probe_programs",
    "DoubleCoverFamily",
    "build_double_cover",
    "cut_edges",
    "random_cut",
    "random_cut_lift",
    "cover_isomorphism",
    "verify_cover_isomorphisms",
    "parity_bijection",
    "view_distribution_equality",
    "mis_gap_witness",
    "high_girth_catalog",
    "CUT_ENUM_CAP",
]

CUT_ENUM_CAP = 20


# ---------------------------------------------------------------------------
# six-path family


@dataclass(frozen=True)
class SinklessFamily:
    n: int
    support: Graph
    g: SupportedInstance
    g_prime: SupportedInstance

    def node(self, i: int, j: int) -> int:
        """Id of ``v_{i,j}`` (path ``i`` in 1..6, position ``j`` in 1..n)."""
        if not (1 <= i <= 6 and 1 <= j <= self.n):
            raise IndexError(f"no node v_{i},{j} for n={self.n}")
        return (i - 1) * self.n + j

    @property
    def probes(self) -> tuple[int, int]:
        c = math.ceil(self.n / 2)
        return self.node(2, c), self.node(4, c)


def build_sinkless_family(n: int) -> SinklessFamily:
    if n < 2:
        raise GraphError("path length n must be at least 2")

    def v(i, j):
        return (i - 1) * n + j

    def path(i):
        return [(v(i, j), v(i, j + 1)) for j in range(1, n)]

    bridges = [
        (v(1, 1), v(2, 1)), (v(1, 1), v(3, 1)), (v(1, n), v(4, 1)), (v(1, n), v(5, 1)),
        (v(6, 1), v(2, n)), (v(6, 1), v(3, n)), (v(6, n), v(4, n)), (v(6, n), v(5, n)),
    ]
    edges = [e for i in range(1, 7) for e in path(i)] + bridges
    h = Graph.from_edges(range(1, 6 * n + 1), edges)
    # two cycles: (v11, P2, v61, P3) and (v1n, P4, v6n, P5)
    g_edges = path(2) + path(3) + path(4) + path(5) + bridges
    # one cycle: (P2, P1, P4, P6)
    gp_edges = path(2) + path(1) + path(4) + path(6) + [
        (v(1, 1), v(2, 1)), (v(6, 1), v(2, n)), (v(6, n), v(4, n)), (v(1, n), v(4, 1)),
    ]
    return SinklessFamily(
        n,
        h,
        SupportedInstance(h, g_edges, Mode.SUPPORTED),
        SupportedInstance(h, gp_edges, Mode.SUPPORTED),
    )


class _TowardHigherId(NodeProgram):
    """0 rounds: every input edge points at its larger endpoint."""

    def initialize(self, ctx):
        ctx.halt(frozenset(p for p, u in enumerate(ctx.g_neighbors) if u > ctx.node_id))


class _AlongPaths(NodeProgram):
    """0 rounds: point at the neighbour with the larger path position ``j``; ties by id."""

    def __init__(self, n):
        self.n = n

    def initialize(self, ctx):
        pos = lambda x: ((x - 1) % self.n, x)  # noqa: E731
        ctx.halt(frozenset(p for p, u in enumerate(ctx.g_neighbors) if pos(u) > pos(ctx.node_id)))


class _BallMaximum(NodeProgram):
    """``T`` rounds over support edges: learn the largest id within ``T`` hops
    of each input neighbour and point at the neighbour whose value is larger
    (ties toward the larger id)."""

    def __init__(self, rounds):
        self.rounds = rounds

    def initialize(self, ctx):
        self.best = ctx.node_id
        self.mine = ctx.node_id
        self.heard = {}
        if self.rounds == 0:
            self._finish(ctx)
            return None
        return {u: self.best for u in ctx.neighbors}

    def _finish(self, ctx):
        # heard[u] and mine both cover radius rounds-1
        def key(x):
            return (self.heard.get(x, x), x)

        mine = (self.mine, ctx.node_id)
        ctx.halt(frozenset(p for p, u in enumerate(ctx.g_neighbors) if key(u) > mine))

    def step(self, ctx, r, inbox):
        self.heard.update(inbox)
        self.mine = self.best
        self.best = max([self.best, *inbox.values()])
        if r >= self.rounds:
            self._finish(ctx)
            return None
        return {u: self.best for u in ctx.neighbors}


def sinkless_probe_programs(fam: SinklessFamily, t: int) -> dict[str, tuple[Callable[[], NodeProgram], int]]:
    """Three deterministic programs, each with its round budget (at most ``t``)."""
    return {
        "toward_higher_id": (_TowardHigherId, 0),
        "along_paths": (lambda: _AlongPaths(fam.n), 0),
        "ball_maximum": (lambda: _BallMaximum(t), t),
    }


def _out_ids(inst: SupportedInstance, v: int, ports) -> frozenset:
    nb = subgraph(inst).adj[v]
    return frozenset(nb[p] for p in ports)


def sinkless_indistinguishability(
    fam: SinklessFamily,
    t: int,
    programs: Mapping[str, tuple[Callable[[], NodeProgram], int]] | None = None,
) -> CheckReport:
    """Check that the probes cannot tell ``G`` from ``G'`` within ``t`` rounds.

    Views (ids and input flags over the support) must coincide at both
    probes; each program must then give the probes the same out-neighbours
    in both runs. ``details`` records, per program, whether the orientation
    checker accepted each run.
    """
    half = math.ceil(fam.n / 2)
    if t >= half:
        raise ValueError(f"radius {t} >= ceil(n/2) = {half}: the probes can distinguish G from G'")
    if programs is None:
        programs = sinkless_probe_programs(fam, t)
    violations = []
    for p in fam.probes:
        ok, _ = views_isomorphic(
            extract_view(fam.g, p, t), extract_view(fam.g_prime, p, t), respect=("ids", "flags")
        )
        if not ok:
            violations.append((p, f"radius-{t} views differ"))
    problem = sinkless_orientation()
    details = {}
    for name, (factory, rounds) in programs.items():
        if rounds > t:
            raise ValueError(f"program {name} needs {rounds} > {t} rounds")
        runs = []
        for inst in (fam.g, fam.g_prime):
            trace = run(inst, factory, max_rounds=rounds)
            if not trace.halted:
                raise RuntimeError(f"program {name} did not halt within {rounds} rounds")
            runs.append((inst, trace))
        for p in fam.probes:
            a = _out_ids(runs[0][0], p, runs[0][1].outputs[p])
            b = _out_ids(runs[1][0], p, runs[1][1].outputs[p])
            if a != b:
                violations.append((p, f"program {name} answers differently: {sorted(a)} vs {sorted(b)}"))
        verdicts = [check_labeling(subgraph(inst), problem, tr.outputs, outputs_only=True).accepted for inst, tr in runs]
        details[name] = {"accepted_on_G": verdicts[0], "accepted_on_G_prime": verdicts[1]}
    return CheckReport.from_violations(violations, quality=t, **details)


# ---------------------------------------------------------------------------
# double covers


@dataclass(frozen=True)
class DoubleCoverFamily:
    """Copies of base node ``v`` are ``2v-1`` (copy 0) and ``2v`` (copy 1)."""

    q: Graph
    k: int
    support: Graph
    base_girth: float = field(default=math.inf)

    @staticmethod
    def copy(v: int, x: int) -> int:
        return 2 * v - 1 + x

    @staticmethod
    def base(w: int) -> tuple[int, int]:
        return (w + 1) // 2, (w + 1) % 2

    def lift(self, f) -> Graph:
        """``G(F)``: straight copies for edges outside ``F``, crossed copies for edges in ``F``."""
        fset = {(min(a, b), max(a, b)) for a, b in f}
        c = self.copy
        edges = []
        for u, v in self.q.edges():
            if (u, v) in fset:
                edges += [(c(u, 0), c(v, 1)), (c(u, 1), c(v, 0))]
            else:
                edges += [(c(u, 0), c(v, 0)), (c(u, 1), c(v, 1))]
        return Graph.from_edges(self.support.nodes, edges)

    def instance(self, f) -> SupportedInstance:
        return SupportedInstance(self.support, self.lift(f).edges(), Mode.SUPPORTED)


def build_double_cover(q: Graph) -> DoubleCoverFamily:
    degs = {q.degree(v) for v in q.nodes}
    if len(degs) != 1:
        raise GraphError(f"base graph must be regular, degrees seen: {sorted(degs)}")
    if sorted(q.nodes) != list(range(1, q.n + 1)):
        raise GraphError("base graph ids must be 1..n")
    c = DoubleCoverFamily.copy
    edges = [(c(u, x), c(v, y)) for u, v in q.edges() for x in (0, 1) for y in (0, 1)]
    h = Graph.from_edges(range(1, 2 * q.n + 1), edges)
    return DoubleCoverFamily(q, degs.pop(), h, girth(q))


def cut_edges(q: Graph, cut: Mapping[int, int]) -> frozenset:
    return frozenset((u, v) for u, v in q.edges() if cut[u] != cut[v])


def random_cut(q: Graph, seed: int) -> dict[int, int]:
    rng = random.Random(seed)
    return {v: rng.randrange(2) for v in q.nodes}


def _lift_selector(fam: DoubleCoverFamily, cut, which: str) -> frozenset:
    x = cut_edges(fam.q, cut)
    if which == "G1":
        return x
    if which == "G2":
        return frozenset(fam.q.edges()) - x
    raise ValueError(f"which must be 'G1' or 'G2', not {which!r}")


def random_cut_lift(fam: DoubleCoverFamily, which: str, seed: int | None = None, cut=None):
    """Return ``(cut, G(F))`` with ``F = X`` for G1 and ``F = E_Q \\ X`` for G2."""
    if cut is None:
        cut = random_cut(fam.q, seed if seed is not None else 0)
    return cut, fam.lift(_lift_selector(fam, cut, which))


def cover_isomorphism(fam: DoubleCoverFamily, cut) -> dict[int, int]:
    """Swap the two copies of every base node with cut label 1."""
    phi = {}
    for v in fam.q.nodes:
        for x in (0, 1):
            phi[fam.copy(v, x)] = fam.copy(v, x ^ cut[v])
    return phi


def verify_cover_isomorphisms(fam: DoubleCoverFamily, cut, which: str, cross_check: bool = True) -> CheckReport:
    """Check that the copy swap maps the random lift onto ``G(∅)`` (G1) or ``G(E_Q)`` (G2)."""
    _, lifted = random_cut_lift(fam, which, cut=cut)
    target = fam.lift(() if which == "G1" else fam.q.edges())
    phi = cover_isomorphism(fam, cut)
    mapped = {(min(phi[a], phi[b]), max(phi[a], phi[b])) for a, b in lifted.edges()}
    violations = []
    want = set(target.edges())
    for e in sorted(mapped - want):
        violations.append((e[0], f"image edge {e} missing from target"))
    for e in sorted(want - mapped):
        violations.append((e[0], f"target edge {e} not hit"))
    details = {"witness": {str(k): v for k, v in sorted(phi.items())}}
    if cross_check:
        ok, _ = graphs_isomorphic(lifted, target, cap=max(64, lifted.n))
        details["graphs_isomorphic"] = ok
        if not ok:
            violations.append((0, "independent isomorphism test disagrees"))
    if violations:
        raise AssertionError(f"cover witness failed: {violations[:3]}")
    return CheckReport.from_violations(violations, **details)


def parity_bijection(fam: DoubleCoverFamily, u: int, t: int, c1: Mapping[int, int]) -> dict[int, int]:
    """Flip ``c1`` by distance parity from ``u`` inside the radius-``t`` ball of ``Q``."""
    if not fam.base_girth > 2 * t + 1:
        raise ValueError(f"girth {fam.base_girth} must exceed 2T+1 = {2 * t + 1}")
    dist = bfs_distances(fam.q, u, t)
    return {v: (c1[v] + dist[v]) % 2 if v in dist else c1[v] for v in fam.q.nodes}


def view_distribution_equality(fam: DoubleCoverFamily, u0: int, t: int, check_girth: bool = True) -> CheckReport:
    """Compare the multisets of radius-``t`` support views of copy node ``u0``
    over every cut, between the G1-style and G2-style lifts.

    ``check_girth=False`` skips the girth precondition; the multisets then
    typically differ, which is how the comparison itself is exercised.
    """
    nq = fam.q.n
    if nq > CUT_ENUM_CAP:
        raise CapacityError(f"2^{nq} cuts exceeds the enumeration cap 2^{CUT_ENUM_CAP}")
    if check_girth and not fam.base_girth > 2 * t + 1:
        raise ValueError(f"girth {fam.base_girth} must exceed 2T+1 = {2 * t + 1}")
    counts = {"G1": Counter(), "G2": Counter()}
    nodes = fam.q.nodes
    for bits in itertools.product((0, 1), repeat=nq):
        cut = dict(zip(nodes, bits))
        for which in ("G1", "G2"):
            inst = fam.instance(_lift_selector(fam, cut, which))
            counts[which][canonical_view(extract_view(inst, u0, t), ("flags",))] += 1
    violations = []
    for key in sorted(set(counts["G1"]) | set(counts["G2"])):
        a, b = counts["G1"][key], counts["G2"][key]
        if a != b:
            violations.append((u0, f"view occurs {a} times in G1 lifts, {b} times in G2 lifts"))
    return CheckReport.from_violations(
        violations, quality=len(counts["G1"]), cuts=2**nq, distinct_views=len(counts["G1"])
    )


def mis_gap_witness(
    fam: DoubleCoverFamily,
    t: int,
    algorithm: Callable[[Graph, int], frozenset],
    trials: int,
    seed: int = 0,
) -> CheckReport:
    """Monte Carlo mean set size on random G1' and G2' lifts.

    ``algorithm(graph, seed)`` returns the chosen node set. Accepted when
    the two means agree within three standard errors of their difference.
    """
    if not fam.base_girth > 2 * t + 1:
        raise ValueError(f"girth {fam.base_girth} must exceed 2T+1 = {2 * t + 1}")
    sizes = {"G1": [], "G2": []}
    for i in range(trials):
        cut = random_cut(fam.q, seed * 1_000_003 + i)
        for which in ("G1", "G2"):
            _, g = random_cut_lift(fam, which, cut=cut)
            sizes[which].append(len(algorithm(g, seed * 1_000_003 + i)))

    def stats(xs):
        m = sum(xs) / len(xs)
        var = sum((x - m) ** 2 for x in xs) / max(len(xs) - 1, 1)
        return m, var

    m1, v1 = stats(sizes["G1"])
    m2, v2 = stats(sizes["G2"])
    se = math.sqrt(v1 / trials + v2 / trials)
    gap = abs(m1 - m2)
    violations = [] if gap <= 3 * se or gap == 0 else [(0, f"means differ by {gap:.4f} > 3 * {se:.4f}")]
    return CheckReport.from_violations(violations, quality=gap, mean_G1=m1, mean_G2=m2, stderr=se)


def high_girth_catalog(k: int, min_girth: int, max_nodes: int = 20, seed: int = 0, attempts: int = 200) -> list[Graph]:
    """Small ``k``-regular graphs with girth at least ``min_girth``."""
    out = []
    if k == 2:
        out = [generate("cycle", n=n) for n in range(max(min_girth, 3), max_nodes + 1)]
    elif k == 3:
        for name in ("petersen", "heawood"):
            g = generate(name)
            if g.n <= max_nodes and girth(g) >= min_girth:
                out.append(g)
    rng = random.Random(seed)
    for _ in range(attempts if k >= 3 else 0):
        n = rng.randrange(k + 1, max_nodes + 1)
        if (n * k) % 2:
            continue
        try:
            g = generate("random_regular", n=n, d=k, seed=rng.randrange(2**31))
        except GraphError:
            continue
        if girth(g) >= min_girth:
            out.append(g)
    return out

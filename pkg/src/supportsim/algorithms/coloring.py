"""Deterministic (Δ+1)-colouring from identifiers in O(log* N) rounds.

Schedule (all nodes follow it in lockstep, so the round count is a
function of ``N`` and ``Δ`` only):

1. Orient every edge toward the endpoint with the larger identifier. The
   ``i``-th larger neighbour of ``v`` is its parent in forest ``i``, which
   splits the graph into at most ``Δ`` rooted forests.
2. Cole-Vishkin bit reduction in every forest at once, one round per
   iteration, until each forest is 6-coloured.
3. Three shift-down/recolour pairs take each forest from 6 to 3 colours.
4. The forest colours combine into one of ``3^Δ`` colours; the colours
   above ``Δ`` are then eliminated one per round.
"""
from __future__ import annotations

from ..engine import NodeProgram

__all__ = [
    "cv_iterations",
    "cv_step",
    "IdColorReduction",
    "id_color_reduction",
    "DuplicateIdentifier",
]


class DuplicateIdentifier(RuntimeError):
    """Two nodes within distance 2 carry the same identifier."""


def cv_iterations(n_ids: int) -> int:
    """Cole-Vishkin iterations needed to go from colours ``< n_ids + 1`` to colours ``< 6``."""
    bound = n_ids + 1
    k = 0
    while bound > 6:
        bound = 2 * (bound - 1).bit_length()
        k += 1
    return k


def cv_step(c: int, parent_c: int | None) -> int:
    if parent_c is None:
        return c & 1
    diff = c ^ parent_c
    i = (diff & -diff).bit_length() - 1
    return 2 * i + ((c >> i) & 1)


class _Program(NodeProgram):
    def __init__(self, n_ids: int, delta: int, id_key):
        self.n_ids = n_ids
        self.delta = delta
        self.id_key = id_key
        self.k = cv_iterations(n_ids)
        self.total = IdColorReduction.rounds(n_ids, delta)

    def initialize(self, ctx):
        self.nbrs = ctx.g_neighbors
        self.my_id = ctx.node_id if self.id_key is None else ctx.memory[self.id_key]
        if not 1 <= self.my_id <= self.n_ids:
            raise ValueError(f"identifier {self.my_id} outside 1..{self.n_ids}")
        if not self.nbrs:
            ctx.halt(1)
            return None
        self.cv = [self.my_id] * self.delta
        self.parents: list = []
        self.children = [set() for _ in range(self.delta)]
        return {u: ("id", self.my_id, tuple(self.cv)) for u in self.nbrs}

    def _learn_ids(self, ctx, inbox):
        ids = {u: inbox[u][1] for u in self.nbrs}
        seen = set()
        for u, x in ids.items():
            if x == self.my_id or x in seen:
                raise DuplicateIdentifier(f"identifier {x} repeated within distance 2 of node {ctx.node_id}")
            seen.add(x)
        higher = sorted((u for u in self.nbrs if ids[u] > self.my_id), key=lambda u: ids[u])
        if len(higher) > self.delta:
            raise ValueError(f"node {ctx.node_id} has more than delta={self.delta} neighbours")
        self.parents = higher + [None] * (self.delta - len(higher))

    def step(self, ctx, r, inbox):
        if r == 1:
            self._learn_ids(ctx, inbox)
        if r == 2:
            for u in self.nbrs:
                for i in inbox[u][3]:
                    self.children[i].add(u)
        k = self.k
        if r <= k:
            self.cv = [cv_step(c, None if p is None else inbox[p][2][i]) for i, (c, p) in enumerate(zip(self.cv, self.parents))]
        elif r <= k + 6:
            j = r - k - 1
            top = 5 - j // 2
            if j % 2 == 0:  # shift down
                self.cv = [
                    (inbox[p][2][i] if p is not None else min(x for x in (0, 1, 2) if x != c))
                    for i, (c, p) in enumerate(zip(self.cv, self.parents))
                ]
            else:  # recolour the top colour inside each forest
                new = []
                for i, c in enumerate(self.cv):
                    if c == top:
                        p = self.parents[i]
                        used = {inbox[u][2][i] for u in self.children[i]}
                        if p is not None:
                            used.add(inbox[p][2][i])
                        c = min(x for x in (0, 1, 2) if x not in used)
                    new.append(c)
                self.cv = new
            if r == k + 6:
                self.color = sum(c * 3**i for i, c in enumerate(self.cv))
        else:
            top = 3**self.delta - 1 - (r - k - 7)
            if self.color == top:
                used = {inbox[u][4] for u in self.nbrs}
                self.color = min(x for x in range(self.delta + 1) if x not in used)
        if r >= self.total:
            ctx.halt(self.color + 1)
            return None
        out = {}
        for u in self.nbrs:
            flags = tuple(i for i, p in enumerate(self.parents) if p == u) if r == 1 else ()
            out[u] = ("st", self.my_id, tuple(self.cv), flags, getattr(self, "color", None))
        return out


class IdColorReduction:
    """Base LOCAL algorithm: proper (Δ+1)-colouring of ``G`` from unique ids.

    ``id_key`` selects where a node reads its identifier: ``None`` for the
    real node id, or a key into preprocessed memory (e.g. a distance
    colouring that is locally unique).
    """

    name = "id_color_reduction"

    @staticmethod
    def rounds(n_ids: int, delta: int) -> int:
        if delta <= 0:
            return 0
        k = cv_iterations(n_ids)
        return max(k + 6 + 3**delta - delta - 1, 1)

    def running_time(self, n_ids: int, delta: int) -> int:
        return self.rounds(n_ids, delta)

    def program(self, n_ids: int, delta: int, id_key=None):
        return lambda: _Program(n_ids, delta, id_key)


def id_color_reduction() -> IdColorReduction:
    return IdColorReduction()

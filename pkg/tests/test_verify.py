import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from supportsim.decompose import degeneracy_coloring
from supportsim.graphcore import Graph, ball, generate
from supportsim.verify import (
    CheckReport,
    LabelFormatError,
    approx_ratio,
    arcs_to_ports,
    check_labeling,
    delta_plus_one_coloring,
    dominating_set,
    edge_coloring,
    independent_set,
    is_maximal_independent,
    maximal_independent_set,
    maximal_matching,
    ports_to_arcs,
    problem_by_key,
    sinkless_orientation,
    vertex_coloring,
)

from conftest import gnp


def mis_labels(g, members):
    return {v: int(v in members) for v in g.nodes}


class TestMis:
    def test_path_accept(self):
        g = generate("path", n=3)
        assert check_labeling(g, maximal_independent_set(), mis_labels(g, {1, 3}), outputs_only=True).accepted

    def test_path_reject_adjacent(self):
        g = generate("path", n=3)
        rep = check_labeling(g, maximal_independent_set(), mis_labels(g, {1, 2}), outputs_only=True)
        assert not rep.accepted
        assert sorted(v for v, _ in rep.violations) == [1, 2]

    def test_not_maximal(self):
        g = generate("path", n=3)
        rep = check_labeling(g, maximal_independent_set(), mis_labels(g, {1}), outputs_only=True)
        assert [v for v, _ in rep.violations] == [3]
        assert check_labeling(g, independent_set(), mis_labels(g, {1}), outputs_only=True).accepted

    def test_format_error(self):
        g = generate("path", n=2)
        with pytest.raises(LabelFormatError):
            check_labeling(g, maximal_independent_set(), {1: 2, 2: 0}, outputs_only=True)
        with pytest.raises(LabelFormatError):
            check_labeling(g, maximal_independent_set(), {1: 1}, outputs_only=True)

    @given(st.integers(1, 30), st.floats(0.05, 0.5), st.integers(0, 1000))
    def test_agrees_with_direct_check(self, n, p, seed):
        g = gnp(n, p, seed)
        rng = random.Random(seed)
        members = {v for v in g.nodes if rng.random() < 0.4}
        rep = check_labeling(g, maximal_independent_set(), mis_labels(g, members), outputs_only=True)
        assert rep.accepted == is_maximal_independent(g, members)


class TestOrientation:
    def test_consistent_cycle_accepted(self):
        g = generate("cycle", n=6)
        arcs = [(v, v % 6 + 1) for v in g.nodes]
        assert check_labeling(g, sinkless_orientation(), arcs_to_ports(g, arcs), outputs_only=True).accepted

    def test_sink_rejected(self):
        g = generate("cycle", n=6)
        arcs = [(1, 2), (3, 2)] + [(v, v % 6 + 1) for v in range(3, 7)]
        rep = check_labeling(g, sinkless_orientation(), arcs_to_ports(g, arcs), outputs_only=True)
        assert 2 in [v for v, _ in rep.violations]

    def test_inconsistent_edge(self):
        g = generate("path", n=2)
        rep = check_labeling(g, sinkless_orientation(), {1: frozenset({0}), 2: frozenset({0})}, outputs_only=True)
        assert not rep.accepted

    def test_degree_one_may_be_sink(self):
        g = generate("path", n=2)
        assert check_labeling(g, sinkless_orientation(), arcs_to_ports(g, [(1, 2)]), outputs_only=True).accepted

    def test_port_conversion_roundtrip(self):
        g = generate("petersen")
        arcs = {(u, v) for u, v in g.edges()}
        assert ports_to_arcs(g, arcs_to_ports(g, arcs)) == arcs


class TestColoring:
    def test_palette(self):
        g = generate("cycle", n=4)
        prob = delta_plus_one_coloring(2)
        assert check_labeling(g, prob, {1: 1, 2: 2, 3: 1, 4: 3}, outputs_only=True).accepted
        with pytest.raises(LabelFormatError):
            check_labeling(g, prob, {1: 1, 2: 2, 3: 1, 4: 4}, outputs_only=True)

    @given(st.integers(2, 30), st.floats(0.1, 0.6), st.integers(0, 1000))
    def test_colouring_of_h_is_valid_on_every_subgraph(self, n, p, seed):
        h = gnp(n, p, seed)
        col = degeneracy_coloring(h)
        prob = vertex_coloring(max(col.values()))
        assert check_labeling(h, prob, col, outputs_only=True).accepted
        rng = random.Random(seed)
        g = Graph.from_edges(h.nodes, [e for e in h.edges() if rng.random() < 0.5])
        assert check_labeling(g, prob, col, outputs_only=True).accepted

    def test_edge_coloring(self):
        g = generate("path", n=3)
        prob = edge_coloring(2)
        assert check_labeling(g, prob, {1: (1,), 2: (1, 2), 3: (2,)}, outputs_only=True).accepted
        rep = check_labeling(g, prob, {1: (1,), 2: (2, 1), 3: (2,)}, outputs_only=True)
        assert not rep.accepted


class TestOthers:
    def test_matching(self):
        g = generate("path", n=4)
        prob = maximal_matching()
        assert check_labeling(g, prob, {1: 0, 2: 0, 3: 1, 4: 0}, outputs_only=True).accepted
        assert not check_labeling(g, prob, {1: None, 2: None, 3: 1, 4: 0}, outputs_only=True).accepted
        assert not check_labeling(g, prob, {1: 0, 2: 1, 3: 0, 4: None}, outputs_only=True).accepted

    def test_dominating(self):
        g = generate("star", leaves=3)
        assert check_labeling(g, dominating_set(), {1: 1, 2: 0, 3: 0, 4: 0}, outputs_only=True).accepted
        assert not check_labeling(g, dominating_set(), {1: 0, 2: 1, 3: 0, 4: 0}, outputs_only=True).accepted

    def test_problem_registry(self):
        g = generate("cycle", n=5)
        assert problem_by_key("coloring", g).name.startswith("(delta+1)")
        with pytest.raises(KeyError):
            problem_by_key("nope")
        with pytest.raises(ValueError):
            problem_by_key("coloring")


@given(st.integers(5, 30), st.integers(0, 1000))
def test_verdict_depends_only_on_radius_view(n, seed):
    """Scrambling labels outside B_r(v) never changes v's verdict."""
    g = gnp(n, 0.15, seed)
    rng = random.Random(seed)
    prob = maximal_independent_set()
    labels = {v: rng.randrange(2) for v in g.nodes}
    base = {v for v, _ in check_labeling(g, prob, labels, outputs_only=True).violations}
    v = rng.choice(g.nodes)
    near = ball(g, v, prob.radius)
    scrambled = {u: (labels[u] if u in near else rng.randrange(2)) for u in g.nodes}
    again = {u for u, _ in check_labeling(g, prob, scrambled, outputs_only=True).violations}
    assert (v in base) == (v in again)


class TestReport:
    def test_invariant(self):
        with pytest.raises(ValueError):
            CheckReport(True, [(1, "x")])
        with pytest.raises(ValueError):
            CheckReport(False, [])

    def test_json(self):
        rep = CheckReport.from_violations([(2, "bad")], quality=Fraction(3, 2))
        data = json.loads(rep.to_json())
        assert data == {"accepted": False, "violations": [[2, "bad"]], "quality": 1.5}
        assert json.loads(CheckReport(True, quality=math.inf).to_json())["quality"] == "inf"


class TestApproxRatio:
    def test_values(self):
        assert approx_ratio(2, 2) == 1
        assert approx_ratio(1, 2) == 2
        assert approx_ratio(0, 2) == math.inf

    def test_optimum_positive(self):
        with pytest.raises(ValueError):
            approx_ratio(1, 0)

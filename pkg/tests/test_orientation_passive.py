import pytest
from hypothesis import given
from hypothesis import strategies as st

from supportsim.algorithms.orientation import global_sinkless_orientation
from supportsim.algorithms.passive import passive_local_simulation, virtual_support
from supportsim.algorithms.slocal import slocal_greedy_coloring
from supportsim.decompose import is_proper_coloring
from supportsim.graphcore import Graph, GraphError, connected_components, generate
from supportsim.verify import arcs_to_ports, check_labeling, is_maximal_independent, sinkless_orientation

from conftest import gnp


def assert_valid(g, res, min_degree=2):
    assert res.feasible
    assert len(res.arcs) == g.m
    assert {(min(a, b), max(a, b)) for a, b in res.arcs} == set(g.edges())
    report = check_labeling(g, sinkless_orientation(min_degree), arcs_to_ports(g, res.arcs), outputs_only=True)
    assert report.accepted, report.violations[:3]


class TestSinkless:
    @pytest.mark.parametrize("g", [generate("cycle", n=9), generate("petersen"), generate("grid", rows=4, cols=5), generate("path", n=6)])
    def test_families(self, g):
        assert_valid(g, global_sinkless_orientation(g))

    def test_cycle_is_consistent(self):
        g = generate("cycle", n=7)
        out = global_sinkless_orientation(g).out_neighbors()
        assert all(len(out[v]) == 1 for v in g.nodes)

    def test_cycle6_out_degree_one(self):
        g = generate("cycle", n=6)
        res = global_sinkless_orientation(g)
        assert_valid(g, res)
        assert sorted(len(o) for o in res.out_neighbors().values()) == [1] * 6

    def test_single_edge(self):
        g = generate("path", n=2)
        assert_valid(g, global_sinkless_orientation(g))

    def test_path3_middle_not_sink(self):
        g = generate("path", n=3)
        res = global_sinkless_orientation(g)
        assert_valid(g, res)
        assert res.out_neighbors().get(2)

    def test_tree_infeasible_for_min_degree_one(self):
        g = generate("path", n=4)
        res = global_sinkless_orientation(g, min_degree=1)
        assert not res.feasible and res.infeasible == [[1, 2, 3, 4]]

    def test_isolated_nodes(self):
        g = generate("empty", n=3)
        res = global_sinkless_orientation(g, min_degree=1)
        assert res.feasible and res.arcs == set()

    @given(st.integers(1, 60), st.floats(0.0, 0.2), st.integers(0, 10_000))
    def test_random(self, n, p, seed):
        g = gnp(n, p, seed)
        assert_valid(g, global_sinkless_orientation(g))


class TestVirtualSupport:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_shape(self, n):
        h = virtual_support(n, 2)
        assert h.n == n * n
        assert all(h.degree(v) == n for v in range(1, n + 1))
        assert len(connected_components(h)) == 1

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            virtual_support(0, 2)
        with pytest.raises(ValueError):
            virtual_support(1, 2)


class TestPassiveLocal:
    @given(st.integers(2, 8), st.floats(0.0, 0.7), st.integers(0, 10_000))
    def test_mis(self, n, p, seed):
        g = gnp(n, p, seed)
        res = passive_local_simulation(g, k=2)
        assert set(res.outputs) == set(g.nodes)
        assert is_maximal_independent(g, {v for v, o in res.outputs.items() if o == 1})
        assert res.support.n == n * n

    @pytest.mark.parametrize("k", [2, 3])
    def test_edgeless_all_join(self, k):
        res = passive_local_simulation(generate("empty", n=4), k=k)
        assert res.outputs == dict.fromkeys(range(1, 5), 1)
        assert res.support.n == 4**k

    def test_coloring(self):
        g = generate("cycle", n=8)
        res = passive_local_simulation(g, alg=slocal_greedy_coloring())
        assert is_proper_coloring(g, res.outputs)

    def test_ids_must_be_contiguous(self):
        g = Graph.from_edges([1, 2, 5], [(1, 5)])
        with pytest.raises(GraphError):
            passive_local_simulation(g)

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supportsim.adversarial import (
    CUT_ENUM_CAP,
    build_double_cover,
    build_sinkless_family,
    cover_isomorphism,
    cut_edges,
    high_girth_catalog,
    mis_gap_witness,
    parity_bijection,
    random_cut,
    random_cut_lift,
    sinkless_indistinguishability,
    verify_cover_isomorphisms,
    view_distribution_equality,
)
from supportsim.algorithms.mis import independence_number, random_priority_mis
from supportsim.verify import is_independent
from supportsim.graphcore import (
    CapacityError,
    GraphError,
    connected_components,
    extract_view,
    generate,
    girth,
    graphs_isomorphic,
    subgraph,
    views_isomorphic,
)


class TestSinklessFamily:
    @pytest.mark.parametrize("n", [2, 5, 6])
    def test_shape(self, n):
        fam = build_sinkless_family(n)
        g, gp = subgraph(fam.g), subgraph(fam.g_prime)
        assert fam.support.n == 6 * n
        for inp, cycles in ((g, 2), (gp, 1)):
            comps = [c for c in connected_components(inp) if len(c) > 1]
            assert len(comps) == cycles
            assert all(inp.degree(v) == 2 for c in comps for v in c)
        assert set(g.edges()) <= set(fam.support.edges())
        assert set(gp.edges()) <= set(fam.support.edges())

    def test_counts_n2(self):
        fam = build_sinkless_family(2)
        assert fam.support.n == 12
        assert fam.support.m == 6 + 8

    def test_first_cycle_length(self):
        fam = build_sinkless_family(5)
        g = subgraph(fam.g)
        comp = next(c for c in connected_components(g) if fam.node(1, 1) in c)
        assert len(comp) == 12
        assert {fam.node(2, 3), fam.node(3, 3), fam.node(6, 1)} <= set(comp)

    @pytest.mark.parametrize("n", [2, 3, 7])
    def test_support_degrees(self, n):
        fam = build_sinkless_family(n)
        h = fam.support
        assert {h.degree(v) for v in h.nodes} <= {1, 2, 3}
        corners = {fam.node(1, 1), fam.node(1, n), fam.node(6, 1), fam.node(6, n)}
        assert {v for v in h.nodes if h.degree(v) == 3} == corners

    def test_ids(self):
        fam = build_sinkless_family(6)
        assert fam.node(1, 1) == 1 and fam.node(6, 6) == 36
        assert fam.probes == (fam.node(2, 3), fam.node(4, 3))
        with pytest.raises(IndexError):
            fam.node(7, 1)
        with pytest.raises(GraphError):
            build_sinkless_family(1)

    @pytest.mark.parametrize("n", [6, 10, 14])
    def test_indistinguishable_below_half(self, n):
        fam = build_sinkless_family(n)
        for t in range(math.ceil(n / 2)):
            rep = sinkless_indistinguishability(fam, t)
            assert rep.accepted, rep.violations[:3]
            for name, verdict in rep.details.items():
                assert not (verdict["accepted_on_G"] and verdict["accepted_on_G_prime"]), name

    @pytest.mark.parametrize("n", [6, 10, 14])
    def test_distinguishable_at_half(self, n):
        fam = build_sinkless_family(n)
        t = math.ceil(n / 2)
        with pytest.raises(ValueError):
            sinkless_indistinguishability(fam, t)
        differs = [
            not views_isomorphic(extract_view(fam.g, p, t), extract_view(fam.g_prime, p, t), respect=("ids", "flags"))[0]
            for p in fam.probes
        ]
        assert any(differs)


class TestDoubleCover:
    @pytest.mark.parametrize("q", [generate("cycle", n=7), generate("petersen")])
    def test_support_shape(self, q):
        fam = build_double_cover(q)
        assert fam.support.n == 2 * q.n
        assert fam.support.m == 4 * q.m
        for w in fam.support.nodes:
            v, x = fam.base(w)
            assert fam.copy(v, x) == w

    @pytest.mark.parametrize("q", [generate("cycle", n=7), generate("petersen")])
    def test_trivial_lifts(self, q):
        fam = build_double_cover(q)
        g1, g2 = fam.lift(()), fam.lift(q.edges())
        assert len(connected_components(g1)) == 2
        assert graphs_isomorphic(g1.induced([fam.copy(v, 0) for v in q.nodes]), q)[0]
        assert is_independent(g2, {fam.copy(v, 0) for v in q.nodes})
        zero = dict.fromkeys(q.nodes, 0)
        assert random_cut_lift(fam, "G1", cut=zero)[1].edges() == g1.edges()
        assert random_cut_lift(fam, "G2", cut=zero)[1].edges() == g2.edges()
        assert all(phi == w for w, phi in cover_isomorphism(fam, zero).items())

    @given(st.integers(0, 10**6))
    def test_every_lift_is_k_regular(self, seed):
        fam = build_double_cover(generate("petersen"))
        rng = random.Random(seed)
        f = [e for e in fam.q.edges() if rng.random() < 0.5]
        g = fam.lift(f)
        assert {g.degree(v) for v in g.nodes} == {3}
        assert set(g.edges()) <= set(fam.support.edges())
        assert {fam.support.degree(v) for v in fam.support.nodes} == {6}

    def test_random_cut_lift_deterministic(self):
        fam = build_double_cover(generate("petersen"))
        assert random_cut_lift(fam, "G2", seed=4) == random_cut_lift(fam, "G2", seed=4)

    def test_rejects_irregular(self):
        with pytest.raises(GraphError):
            build_double_cover(generate("path", n=4))

    @pytest.mark.parametrize("q", [generate("cycle", n=7), generate("petersen")])
    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=50)
    def test_isomorphisms(self, q, seed):
        fam = build_double_cover(q)
        cut = random_cut(q, seed)
        for which in ("G1", "G2"):
            rep = verify_cover_isomorphisms(fam, cut, which)
            assert rep.accepted and rep.details["graphs_isomorphic"]

    def test_phi_is_involution(self):
        fam = build_double_cover(generate("petersen"))
        cut = random_cut(fam.q, 3)
        phi = cover_isomorphism(fam, cut)
        assert all(phi[phi[w]] == w for w in phi)

    def test_lift_alpha_gap_on_cycle7(self):
        fam = build_double_cover(generate("cycle", n=7))
        for seed in range(20):
            cut = random_cut(fam.q, seed)
            _, g1 = random_cut_lift(fam, "G1", cut=cut)
            _, g2 = random_cut_lift(fam, "G2", cut=cut)
            assert independence_number(g1) == 6
            assert independence_number(g2) == 7

    def test_cut_edges(self):
        q = generate("cycle", n=4)
        assert cut_edges(q, {1: 0, 2: 1, 3: 1, 4: 0}) == {(1, 2), (3, 4)}

    def test_bad_selector(self):
        fam = build_double_cover(generate("cycle", n=5))
        with pytest.raises(ValueError):
            random_cut_lift(fam, "G3", seed=1)


class TestViews:
    @pytest.mark.parametrize("name,kw", [("cycle", {"n": 7}), ("petersen", {})])
    def test_exhaustive_t1(self, name, kw):
        fam = build_double_cover(generate(name, **kw))
        rep = view_distribution_equality(fam, 1, 1)
        assert rep.accepted
        assert rep.details["cuts"] == 2**fam.q.n

    def test_girth_enforced(self):
        fam = build_double_cover(generate("cycle", n=7))
        with pytest.raises(ValueError):
            view_distribution_equality(fam, 1, 3)

    @pytest.mark.parametrize("name,kw,t", [("cycle", {"n": 7}, 3), ("petersen", {}, 2)])
    def test_comparison_detects_difference(self, name, kw, t):
        # beyond the girth bound the two families genuinely differ
        fam = build_double_cover(generate(name, **kw))
        assert not view_distribution_equality(fam, 1, t, check_girth=False).accepted

    def test_cap(self):
        fam = build_double_cover(generate("cycle", n=CUT_ENUM_CAP + 1))
        with pytest.raises(CapacityError):
            view_distribution_equality(fam, 1, 1)

    @given(st.integers(0, 10**6), st.integers(1, 7))
    def test_parity_bijection_is_involution(self, seed, u):
        fam = build_double_cover(generate("cycle", n=7))
        c1 = random_cut(fam.q, seed)
        c2 = parity_bijection(fam, u, 2, c1)
        assert parity_bijection(fam, u, 2, c2) == c1

    def test_parity_examples(self):
        fam = build_double_cover(generate("cycle", n=7))
        zero = dict.fromkeys(fam.q.nodes, 0)
        c1 = random_cut(fam.q, 5)
        assert parity_bijection(fam, 3, 0, c1) == c1
        flipped = parity_bijection(fam, 3, 1, zero)
        assert {v for v, x in flipped.items() if x} == {2, 4}

    def test_parity_requires_girth(self):
        fam = build_double_cover(generate("cycle", n=5))
        with pytest.raises(ValueError):
            parity_bijection(fam, 1, 2, random_cut(fam.q, 0))


class TestMisGap:
    def test_one_round_random_priority(self):
        fam = build_double_cover(generate("cycle", n=7))
        rep = mis_gap_witness(fam, 1, lambda g, s: random_priority_mis(g, s, depth=1).members, trials=2000)
        assert rep.accepted, rep.violations
        assert rep.details["stderr"] > 0

    def test_zero_round_coin(self):
        fam = build_double_cover(generate("cycle", n=7))

        def coin(g, s):
            rng = random.Random(s)
            return frozenset(v for v in sorted(g.nodes) if rng.random() < 1 / 4)

        rep = mis_gap_witness(fam, 0, coin, trials=500)
        # the coin ignores the graph, so both sides draw identical sets
        assert rep.accepted and rep.details["mean_G1"] == rep.details["mean_G2"]

    def test_girth_enforced(self):
        fam = build_double_cover(generate("cycle", n=7))
        with pytest.raises(ValueError):
            mis_gap_witness(fam, 3, lambda g, s: frozenset(), trials=2)


@pytest.mark.parametrize("k,g_min", [(2, 5), (3, 5), (3, 6)])
def test_high_girth_catalog(k, g_min):
    cat = high_girth_catalog(k, g_min, max_nodes=16)
    assert cat
    for q in cat:
        assert girth(q) >= g_min and q.n <= 16
        assert {q.degree(v) for v in q.nodes} == {k}

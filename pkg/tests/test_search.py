import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flood_oracle import all_graphs, bfs_oracle, flood_oracle, ring_oracle
from sosim.graph import Graph, bfs_distances, build_overlay, is_connected, lattice, random_graph
from sosim.rng import generator
from sosim.protocols.search import (
    QueryConfig, SearchOutcome, WalkConfig, embed_overlay, expanding_ring_search,
    flood_with_ttl, k_random_walk,
)
from sosim.world import ConfigError, SimError, WorldConfig, create_world


class TestBuildOverlay:
    def test_lattice_5x5(self):
        g = lattice(5, 5)
        assert g.n == 25
        assert g.n_edges() == 40

    def test_lattice_1x1(self):
        g = lattice(1, 1)
        assert g.n == 1 and g.n_edges() == 0

    def test_random_p0_edgeless(self):
        g = random_graph(100, 0.0, seed=1)
        assert g.n == 100 and g.n_edges() == 0

    def test_random_deterministic(self):
        a = build_overlay("random", {"n": 50, "p": 0.1}, seed=9)
        b = build_overlay("random", {"n": 50, "p": 0.1}, seed=9)
        assert a.adj == b.adj

    def test_connected_retry_failure(self):
        with pytest.raises(ConfigError):
            random_graph(50, 0.001, seed=1, require_connected=True, max_retries=3)


class TestFloodWithTtl:
    def test_source_holds_resource(self):
        g = lattice(3, 3)
        out = flood_with_ttl(g, 4, {4}, 5)
        assert (out.found, out.messages, out.levels_expanded) == (True, 0, 0)

    def test_star_ttl1(self):
        g = Graph.from_edges(range(7), [(0, i) for i in range(1, 7)])
        out = flood_with_ttl(g, 0, {3}, 1)
        assert out.found and out.messages == 6 and out.levels_expanded == 1

    def test_lattice_corner_ttl7_frozen(self):
        # oracle-computed: BFS distance 8, so ttl=7 misses after 51 messages
        g = lattice(5, 5)
        out = flood_with_ttl(g, 0, {24}, 7)
        assert not out.found
        assert out.messages == 51
        assert out.levels_expanded == 7

    def test_matches_oracle_exhaustive_small(self):
        for n in range(1, 6):
            for adj in all_graphs(n):
                g = Graph(adj={v: sorted(ns) for v, ns in adj.items()})
                for ttl in (1, 2, 4):
                    got = flood_with_ttl(g, 0, {n - 1}, ttl)
                    found, msgs, levels = flood_oracle(adj, 0, {n - 1}, ttl)
                    assert (got.found, got.messages, got.levels_expanded) == \
                        (found, msgs, levels), (adj, ttl)

    def test_matches_oracle_random_instances(self):
        rng = generator(77)
        for trial in range(200):
            n = int(rng.integers(10, 40))
            p = float(rng.uniform(0.05, 0.3))
            g = random_graph(n, p, seed=int(rng.integers(0, 1 << 32)))
            src = int(rng.integers(0, n))
            tgt = int(rng.integers(0, n))
            ttl = int(rng.integers(1, 12))
            got = flood_with_ttl(g, src, {tgt}, ttl)
            found, msgs, levels = flood_oracle(g.adj, src, {tgt}, ttl)
            assert (got.found, got.messages, got.levels_expanded) == (found, msgs, levels)


class TestExpandingRing:
    def test_adjacent_target_ring1(self):
        g = lattice(2, 2)
        out = expanding_ring_search(g, QueryConfig(0, frozenset([1])))
        assert out.success and out.rings_used == 1 and out.hops_to_hit == 1

    def test_lattice_corner_to_corner_frozen(self):
        # oracle-computed over rings 1,3,5,7,9: 2+13+34+51+55 = 155 messages
        g = lattice(5, 5)
        out = expanding_ring_search(g, QueryConfig(0, frozenset([24])))
        assert out.success
        assert out.rings_used == 5
        assert out.hops_to_hit == 8
        assert out.messages == 155

    def test_disconnected_three_rings_frozen(self):
        # oracle-computed: three full floods of the 5x5 component cost 49
        adj = lattice(5, 5).adj
        adj[25] = []
        g = Graph(adj)
        out = expanding_ring_search(g, QueryConfig(0, frozenset([25]),
                                                   ttl_sequence=(1, 3, 5)))
        assert not out.success
        assert out.rings_used is None
        assert out.messages == 49

    def test_ring_ttl_is_smallest_odd_geq_bfs_distance(self):
        import math
        rng = generator(5)
        for _ in range(30):
            n = int(rng.integers(10, 60))
            p = min(1.0, 3.0 * math.log(n) / n)
            g = random_graph(n, p, seed=int(rng.integers(0, 1 << 32)),
                             require_connected=True)
            src = int(rng.integers(0, n))
            tgt = int(rng.integers(0, n))
            out = expanding_ring_search(g, QueryConfig(src, frozenset([tgt])))
            dist = bfs_distances(g, [src])[tgt]
            ttls = QueryConfig(src, frozenset([tgt])).ttls()
            expected_ring = next(i + 1 for i, t in enumerate(ttls) if t >= dist)
            assert out.success
            assert out.rings_used == expected_ring
            assert out.hops_to_hit == dist

    def test_source_in_targets(self):
        g = lattice(3, 3)
        out = expanding_ring_search(g, QueryConfig(4, frozenset([4])))
        assert out.success and out.messages == 0 and out.rings_used == 1
        assert out.hops_to_hit == 0


class TestKRandomWalk:
    def test_source_in_targets(self):
        g = lattice(3, 3)
        out = k_random_walk(g, 0, {0}, WalkConfig(), generator(1))
        assert out == SearchOutcome(True, 0, 0, 0, None, 0)

    def test_isolated_source_fails_gracefully(self):
        g = Graph({0: [], 1: []})
        out = k_random_walk(g, 0, {1}, WalkConfig(), generator(1))
        assert not out.success and out.messages == 0

    def test_check_accounting_single_walker(self):
        # a lone walker on a path with an unreachable target walks exactly
        # ttl_max hops; with check_interval=4 and ttl_max=10 that is 2 checks
        g = Graph.from_edges(range(3), [(0, 1), (1, 2)])
        out = k_random_walk(g, 0, {99} | set(), WalkConfig(k=1, check_interval=4, ttl_max=10),
                            generator(3))
        assert not out.success
        assert out.messages == 10
        assert out.check_messages == 2

    def test_deterministic_for_seed(self):
        g = random_graph(60, 0.1, seed=8, require_connected=True)
        a = k_random_walk(g, 0, {42}, WalkConfig(), generator(99))
        b = k_random_walk(g, 0, {42}, WalkConfig(), generator(99))
        assert a == b

    def test_liveness_and_budget(self):
        rng = generator(17)
        for _ in range(20):
            g = random_graph(40, 0.1, seed=int(rng.integers(0, 1 << 32)),
                             require_connected=True)
            w = WalkConfig(k=4, check_interval=3, ttl_max=50)
            out = k_random_walk(g, 0, {39}, w, generator(int(rng.integers(0, 1 << 32))))
            assert out.messages <= w.k * w.ttl_max
            assert out.ticks <= w.ttl_max

    @given(st.integers(1, 8), st.integers(1, 7), st.integers(1, 60), st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_check_accounting_property(self, k, c, ttl_max, seed):
        # every walker reports floor(hops/c) checks no matter how it retires
        from sosim.protocols.search import WalkRun
        g = random_graph(12, 0.3, seed=4, require_connected=True)
        run = WalkRun(g, 0, {7}, WalkConfig(k=k, check_interval=c, ttl_max=ttl_max),
                      generator(seed))
        while run.step():
            pass
        assert run.checks == sum(h // c for h in run.hops)
        assert all(h <= ttl_max for h in run.hops)


class TestEmbedOverlay:
    def test_grid_layout_integer_points(self):
        s = create_world(WorldConfig(seed=1))
        mapping = embed_overlay(s, lattice(5, 5), layout="grid")
        assert len(mapping) == 25
        for aid in mapping.values():
            a = s.agent(aid)
            assert a.x == int(a.x) and a.y == int(a.y)
        assert len(s.links()) == 40

    def test_empty_graph(self):
        s = create_world(WorldConfig(seed=1))
        assert embed_overlay(s, Graph({}), layout="grid") == {}
        assert s.n_alive() == 0

    def test_circle_spacing(self):
        s = create_world(WorldConfig(seed=1))
        mapping = embed_overlay(s, Graph({0: [], 1: [], 2: [], 3: []}), layout="circle")
        import math
        angles = sorted(math.atan2(s.agent(a).y, s.agent(a).x) % (2 * math.pi)
                        for a in mapping.values())
        gaps = [angles[i + 1] - angles[i] for i in range(3)]
        assert all(abs(g - math.pi / 2) < 1e-9 for g in gaps)

import numpy as np
import pytest

from flood_oracle import all_graphs
from sosim import colors
from sosim.graph import Graph, random_geometric
from sosim.protocols.clustering import (
    ClusterParams, ElectionRunner, cluster_election, cluster_setup, elect_lowest_id,
    sensing_graph,
)
from sosim.protocols.flocking import FlockingParams, flocking_setup, flocking_tick
from sosim.world import ConfigError, SimError, WorldConfig, create_world


def world(seed=1, **kw):
    return create_world(WorldConfig(seed=seed, **kw))


def greedy_oracle(adj):
    """Sequential lowest-ID clustering: walk ids upward, head unless an
    adjacent head exists, else join the lowest-id adjacent head."""
    heads = set()
    member_of = {}
    for v in sorted(adj):
        adjacent_heads = [u for u in adj[v] if u in heads]
        if adjacent_heads:
            member_of[v] = min(adjacent_heads)
        else:
            heads.add(v)
    return heads, member_of


class TestFlockingSetup:
    def test_counts_and_distinct_tower_colors(self):
        s = world(seed=6)
        flocking_setup(s, FlockingParams(n_nodes=100, n_towers=5))
        assert s.n_alive() == 105
        tower_colors = {s.agent(a).color for a in s.alive_ids("tower")}
        assert len(tower_colors) == 5

    def test_no_nodes_degenerate(self):
        s = world(seed=6)
        flocking_setup(s, FlockingParams(n_nodes=0, n_towers=2))
        assert s.n_alive("node") == 0
        assert s.globals["free_count"] == 0.0

    def test_same_seed_same_positions(self):
        def dig(seed):
            s = world(seed=seed)
            flocking_setup(s, FlockingParams())
            return s.digest()

        assert dig(42) == dig(42)

    def test_too_many_towers(self):
        with pytest.raises(ConfigError):
            flocking_setup(world(), FlockingParams(n_towers=len(colors.TOWER_PALETTE) + 1))

    def test_requires_empty_world(self):
        s = world()
        s.create_agents("node", 1)
        with pytest.raises(SimError):
            flocking_setup(s, FlockingParams())


def hand_world(tower_pos, node_pos, params):
    """World with towers and free nodes at explicit positions."""
    s = world(seed=3)
    tids = s.create_agents("tower", len(tower_pos))
    for aid, (x, y) in zip(tids, tower_pos):
        s.place(aid, x, y)
        s._color[aid] = colors.TOWER_PALETTE[aid]
        s._astate[aid] = 1
    nids = s.create_agents("node", len(node_pos))
    for aid, (x, y) in zip(nids, node_pos):
        s.place(aid, x, y)
        s._color[aid] = colors.NAMED["white"]
        s._astate[aid] = 0
    s.globals["free_count"] = float(len(nids))
    return s, tids, nids


class TestFlockingTick:
    def test_node_already_in_radius_locks_this_tick(self):
        params = FlockingParams(capture_radius=3.0, step=0.5)
        s, tids, nids = hand_world([(0.0, 0.0)], [(2.0, 0.0)], params)
        free = flocking_tick(s, params, s.rng_for("flocking"))
        node = s.agent(nids[0])
        assert free == 0
        assert node.state == "locked"
        assert node.color == s.agent(tids[0]).color
        assert node.position == (2.0, 0.0)

    def test_boundary_distance_exactly_r_captures(self):
        params = FlockingParams(capture_radius=3.0, step=0.5)
        s, tids, nids = hand_world([(0.0, 0.0)], [(3.0, 0.0)], params)
        assert flocking_tick(s, params, s.rng_for("flocking")) == 0
        assert s.agent(nids[0]).state == "locked"

    def test_equidistant_towers_take_lower_id_color(self):
        params = FlockingParams(capture_radius=3.0, step=0.5)
        s, tids, nids = hand_world([(-2.0, 0.0), (2.0, 0.0)], [(0.0, 0.0)], params)
        flocking_tick(s, params, s.rng_for("flocking"))
        assert s.agent(nids[0]).color == s.agent(tids[0]).color

    def test_free_count_monotone_and_locked_frozen(self):
        s = world(seed=9)
        params = FlockingParams(n_nodes=60, n_towers=3, capture_radius=3.0, step=0.3)
        flocking_setup(s, params)
        locked_pos = {}
        prev = 60
        for t in range(200):
            free = flocking_tick(s, params, s.rng_for(f"go{t}"))
            assert free <= prev
            prev = free
            for aid in s.alive_ids("node"):
                a = s.agent(int(aid))
                if a.state == "locked":
                    if a.id in locked_pos:
                        assert a.position == locked_pos[a.id]
                    locked_pos[a.id] = a.position

    def test_locked_nodes_within_radius_of_their_tower(self):
        s = world(seed=10)
        params = FlockingParams(n_nodes=80, n_towers=4, capture_radius=3.0, step=0.3)
        flocking_setup(s, params)
        for t in range(300):
            flocking_tick(s, params, s.rng_for(f"go{t}"))
        towers = {s.agent(int(a)).color: s.agent(int(a)).position
                  for a in s.alive_ids("tower")}
        for aid in s.alive_ids("node"):
            a = s.agent(int(aid))
            if a.state == "locked":
                assert s.toroidal_distance(a.position, towers[a.color]) <= params.capture_radius


class TestSensingGraph:
    def test_tiny_radius_edgeless(self):
        s = world(seed=4)
        cluster_setup(s, ClusterParams(n_nodes=20, sensing_radius=1.0))
        g = sensing_graph(s, 1e-6)
        assert g.n_edges() == 0

    def test_world_diameter_complete(self):
        s = world(seed=4)
        cluster_setup(s, ClusterParams(n_nodes=15, sensing_radius=1.0))
        g = sensing_graph(s, 60.0)
        assert g.n_edges() == 15 * 14 // 2

    def test_unit_grid_lattice_edges(self):
        # 5x5 unit grid with radius 1: exactly the 2*5*4 = 40 lattice edges
        s = world()
        ids = s.create_agents("node", 25)
        k = 0
        for i in range(5):
            for j in range(5):
                s.place(ids[k], float(j - 2), float(i - 2))
                k += 1
        g = sensing_graph(s, 1.0)
        assert g.n_edges() == 40

    def test_matches_bruteforce_oracle(self):
        s = world(seed=31)
        cluster_setup(s, ClusterParams(n_nodes=40, sensing_radius=4.0))
        g = sensing_graph(s, 4.0)
        ids = [int(a) for a in s.alive_ids("node")]
        expected = set()
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                pa = s.agent(a).position
                pb = s.agent(b).position
                if s.toroidal_distance(pa, pb) <= 4.0:
                    expected.add((a, b))
        assert set(g.edges()) == expected


class TestElection:
    def test_path_3_1_2(self):
        g = Graph.from_edges([1, 2, 3], [(3, 1), (1, 2)])
        result = elect_lowest_id(g)
        assert result.heads == frozenset({1})
        assert result.membership == {3: 1, 2: 1}
        assert result.rounds == 1

    def test_single_node(self):
        result = elect_lowest_id(Graph({0: []}))
        assert result.heads == frozenset({0})
        assert result.membership == {}
        assert result.rounds == 1

    def test_matches_greedy_oracle_exhaustive_small(self):
        for n in range(1, 6):
            for adj in all_graphs(n):
                g = Graph({v: sorted(ns) for v, ns in adj.items()})
                result = elect_lowest_id(g)
                heads, member_of = greedy_oracle(adj)
                assert result.heads == frozenset(heads), adj
                assert result.membership == member_of, adj

    def test_heads_independent_min_id_head_bounded_rounds(self):
        for seed in range(25):
            g = random_geometric(40, radius=2.5, box=12.0, seed=seed)
            result = elect_lowest_id(g)
            for h in result.heads:
                assert not any(u in result.heads for u in g.adj[h])
            assert min(g.nodes) in result.heads
            assert result.rounds <= g.n
            for v, h in result.membership.items():
                assert g.has_edge(v, h)

    def test_in_world_election_marks_agents(self):
        s = world(seed=12)
        params = ClusterParams(n_nodes=50, sensing_radius=4.0)
        cluster_setup(s, params)
        result = cluster_election(s, params)
        states = {int(a): s.agent(int(a)).state for a in s.alive_ids("node")}
        for h in result.heads:
            assert states[h] == "head"
        for v in result.membership:
            assert states[v] == "member"
        assert set(result.heads) | set(result.membership) == set(states)

    def test_isolated_node_becomes_singleton_head(self):
        g = Graph({0: [1], 1: [0], 7: []})
        result = elect_lowest_id(g)
        assert 7 in result.heads

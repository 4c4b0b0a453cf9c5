import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flood_oracle import all_graphs, bfs_oracle
from sosim.graph import Graph, diameter, random_geometric
from sosim.protocols.field import (
    INF, ConsensusState, GradientField, MobilityParams, consensus_mobility_tick,
    consensus_setup, consensus_step, gradient_run, gradient_step, max_safe_epsilon,
)
from sosim.rng import generator
from sosim.world import SimError, WorldConfig, create_world


def field_equals_bfs(field: GradientField, graph: Graph) -> bool:
    dist = bfs_oracle(graph.adj, sorted(field.sources))
    for v in graph.nodes:
        expected = dist.get(v, INF)
        if field.values[v] != expected:
            return False
    return True


class TestGradientStep:
    def test_path_converges_in_three_steps(self):
        g = Graph.from_edges(range(4), [(0, 1), (1, 2), (2, 3)])
        f = GradientField.initial(g, [0])
        for _ in range(3):
            f = gradient_step(f, g)
        assert [f.values[v] for v in range(4)] == [0.0, 1.0, 2.0, 3.0]

    def test_disconnected_stays_infinite(self):
        g = Graph({0: [1], 1: [0], 2: []})
        run = gradient_run(GradientField.initial(g, [0]), g, 10)
        assert run.field.values[2] == INF
        assert run.converged

    def test_all_sources_zero_in_one_step(self):
        g = Graph.from_edges(range(3), [(0, 1), (1, 2)])
        f = GradientField(dict.fromkeys(range(3), 5.0), frozenset(range(3)))
        f = gradient_step(f, g)
        assert all(v == 0.0 for v in f.values.values())


class TestGradientRun:
    def test_fixed_point_is_bfs_everywhere(self):
        for seed in range(30):
            g = random_geometric(30, radius=2.5, box=10.0, seed=seed)
            run = gradient_run(GradientField.initial(g, [0]), g, 200)
            assert run.converged
            assert field_equals_bfs(run.field, g)

    def test_exhaustive_small_graphs(self):
        for n in range(1, 6):
            for adj in all_graphs(n):
                g = Graph({v: sorted(ns) for v, ns in adj.items()})
                run = gradient_run(GradientField.initial(g, [0]), g, 50)
                assert run.converged and field_equals_bfs(run.field, g), adj

    def test_converges_within_eccentricity_plus_one(self):
        for seed in range(10):
            g = random_geometric(40, radius=3.0, box=10.0, seed=seed,
                                 require_connected=True)
            run = gradient_run(GradientField.initial(g, [0]), g, 500)
            ecc = max(bfs_oracle(g.adj, [0]).values())
            assert run.steps <= ecc + 1

    def test_empty_sources_immediate_fixed_point(self):
        g = Graph.from_edges(range(3), [(0, 1), (1, 2)])
        run = gradient_run(GradientField.initial(g, []), g, 5)
        assert run.converged and run.steps == 0
        assert all(v == INF for v in run.field.values.values())

    def test_self_healing_after_source_relocation(self):
        for seed in range(20):
            g = random_geometric(35, radius=3.0, box=10.0, seed=seed,
                                 require_connected=True)
            stale_run = gradient_run(GradientField.initial(g, [0]), g, 500)
            new_source = max(g.nodes)
            stale = GradientField(dict(stale_run.field.values), frozenset([new_source]))
            run = gradient_run(stale, g, 500)
            assert run.converged
            assert field_equals_bfs(run.field, g)
            new_dist = bfs_oracle(g.adj, [new_source])
            underestimate = max(new_dist[v] - stale_run.field.values[v]
                                for v in g.nodes)
            bound = max(0, int(underestimate)) + diameter(g) + 1
            assert run.steps <= bound

    def test_safety_at_fixed_point(self):
        g = random_geometric(40, radius=3.0, box=10.0, seed=3)
        run = gradient_run(GradientField.initial(g, [0, 5]), g, 500)
        for v, value in run.field.values.items():
            if v in run.field.sources or value == INF:
                continue
            assert any(run.field.values[u] == value - 1 for u in g.adj[v])


class TestConsensusStep:
    def test_symmetric_pair_averages(self):
        g = Graph.from_edges([0, 1], [(0, 1)])
        out = consensus_step(ConsensusState(np.array([0.0, 10.0]), 0.5), g)
        assert out.values.tolist() == [5.0, 5.0]

    def test_equal_values_fixed_point(self):
        g = Graph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
        out = consensus_step(ConsensusState(np.full(3, 4.2), max_safe_epsilon(g)), g)
        assert np.allclose(out.values, 4.2, atol=0)

    def test_epsilon_out_of_range(self):
        g = Graph.from_edges(range(3), [(0, 1), (1, 2)])
        with pytest.raises(SimError):
            consensus_step(ConsensusState(np.zeros(3), 0.9), g)
        with pytest.raises(SimError):
            consensus_step(ConsensusState(np.zeros(3), 0.0), g)

    @given(st.integers(0, 10_000), st.floats(0.01, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_mean_conserved_and_range_contracts(self, seed, eps_frac):
        rng = generator(seed)
        g = random_geometric(20, radius=3.0, box=8.0, seed=seed % 97)
        eps = eps_frac * max_safe_epsilon(g)
        if eps <= 0:
            return
        x = rng.uniform(-50, 50, size=g.n)
        out = consensus_step(ConsensusState(x.copy(), eps), g)
        assert abs(out.values.mean() - x.mean()) <= 1e-12 * max(1.0, abs(x.mean()))
        assert out.values.max() - out.values.min() <= (x.max() - x.min()) + 1e-12

    def test_static_connected_run_reaches_tolerance(self):
        g = random_geometric(100, radius=2.0, box=8.0, seed=11, require_connected=True)
        eps = max_safe_epsilon(g)
        rng = generator(4)
        cs = ConsensusState(rng.uniform(0, 100, size=g.n), eps)
        mean0 = cs.values.mean()
        for _ in range(200_000):
            cs = consensus_step(cs, g)
            if np.abs(cs.values - mean0).max() < 1e-3:
                break
        assert np.abs(cs.values - mean0).max() < 1e-3
        assert abs(cs.values.mean() - mean0) < 1e-9 * max(1.0, abs(mean0))


class TestConsensusMobility:
    def test_two_distant_nodes_unchanged(self):
        s = create_world(WorldConfig(seed=5))
        ids = s.create_agents("node", 2)
        s.place(ids[0], -10.0, -10.0)
        s.place(ids[1], 10.0, 10.0)
        s.var_array("value")[np.asarray(ids)] = [1.0, 9.0]
        params = MobilityParams(n_nodes=2, radius=1.0, step=0.0, turn_bound=0.0)
        consensus_mobility_tick(s, params, s.rng_for("go"))
        vals = s.var_array("value")[np.asarray(ids)]
        assert vals.tolist() == [1.0, 9.0]

    def test_full_radius_contracts_range(self):
        s = create_world(WorldConfig(seed=7))
        params = MobilityParams(n_nodes=50, radius=50.0, step=0.1)
        consensus_setup(s, params)
        ids = s.alive_ids("node")
        before = s.var_array("value")[ids]
        r0 = before.max() - before.min()
        mean0 = before.mean()
        rng_, var_ = consensus_mobility_tick(s, params, s.rng_for("go"))
        after = s.var_array("value")[ids]
        assert rng_ < r0
        assert np.all(after > before.min()) and np.all(after < before.max())
        assert abs(after.mean() - mean0) < 1e-9

    def test_mobility_run_mean_conserved_range_monotone(self):
        s = create_world(WorldConfig(seed=8))
        params = MobilityParams(n_nodes=100, radius=3.0, step=0.4)
        consensus_setup(s, params)
        ids = s.alive_ids("node")
        mean0 = s.var_array("value")[ids].mean()
        prev_range = math.inf
        for t in range(500):
            r, _ = consensus_mobility_tick(s, params, s.rng_for(f"go{t}"))
            assert r <= prev_range + 1e-12 or r < 1e-12
            prev_range = r
        assert abs(s.var_array("value")[ids].mean() - mean0) <= 1e-9 * max(1.0, abs(mean0))

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sosim import agentset
from sosim.world import SimError, WorldConfig, create_world


def world(seed=1, **kw):
    return create_world(WorldConfig(seed=seed, **kw))


def place_grid(state, side=5, breed="node"):
    """Unit-spaced side x side grid of agents centered on the origin."""
    ids = state.create_agents(breed, side * side)
    k = 0
    for i in range(side):
        for j in range(side):
            state.place(ids[k], float(j - side // 2), float(i - side // 2))
            k += 1
    return ids


class TestSelectWith:
    def test_power_threshold(self):
        s = world()
        ids = s.create_agents("node", 3)
        for aid, p in zip(ids, (0.3, 0.7, 0.4)):
            s.agent(aid).vars["power"] = p
        got = agentset.select_with(s, "node", lambda a: a.vars["power"] < 0.5)
        assert got.ids == (ids[0], ids[2])

    def test_empty_world(self):
        assert agentset.select_with(world(), None, lambda a: True).ids == ()

    def test_unknown_variable_named(self):
        s = world()
        s.create_agents("node", 1)
        with pytest.raises(SimError, match="unknown variable snr"):
            agentset.select_with(s, "node", lambda a: a.vars["snr"] > 0)

    def test_conjunction_equals_chained_selection(self):
        s = world(seed=8)
        ids = s.create_agents("node", 40)
        rng = s.rng_for("t")
        for aid in ids:
            s.agent(aid).vars["power"] = float(rng.uniform(0, 1))
        p1 = lambda a: a.vars["power"] < 0.6
        p2 = lambda a: a.vars["power"] > 0.2
        chained = agentset.select_with(
            s, "node", lambda a: a.id in set(agentset.select_with(s, "node", p1).ids) and p2(a))
        conj = agentset.select_with(s, "node", lambda a: p1(a) and p2(a))
        assert chained.ids == conj.ids


class TestInRadius:
    def test_radius_zero_only_center(self):
        s = world()
        ids = place_grid(s)
        center = s.agent(ids[12]).position
        assert agentset.in_radius(s, center, 0.0).ids == (ids[12],)

    def test_world_diagonal_catches_all(self):
        s = world(seed=2)
        ids = s.create_agents("node", 100)
        rng = s.rng_for("place")
        for aid in ids:
            s.place(aid, rng.uniform(-16.5, 16.5), rng.uniform(-16.5, 16.5))
        r = math.hypot(s.config.width, s.config.height)
        assert len(agentset.in_radius(s, (0, 0), r)) == 100

    def test_unit_grid_four_neighborhood(self):
        # hand-enumerated: of the 25 grid distances from the middle agent,
        # exactly 5 are <= 1 (itself plus the 4-neighborhood)
        s = world()
        ids = place_grid(s, side=5)
        center = s.agent(ids[12]).position
        got = agentset.in_radius(s, center, 1.0)
        assert len(got) == 5
        assert ids[12] in got

    def test_negative_radius(self):
        with pytest.raises(SimError):
            agentset.in_radius(world(), (0, 0), -1.0)

    @given(st.floats(0, 10), st.floats(0, 10))
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_radius(self, r1, r2):
        s = world(seed=13)
        place_grid(s, side=4)
        lo, hi = sorted((r1, r2))
        inner = set(agentset.in_radius(s, (0.3, -0.2), lo).ids)
        outer = set(agentset.in_radius(s, (0.3, -0.2), hi).ids)
        assert inner <= outer


class TestMinOneOf:
    def test_minimum_key(self):
        s = world()
        ids = s.create_agents("node", 3)
        for aid, v in zip(ids, (7.0, 3.0, 9.0)):
            s.agent(aid).vars["load"] = v
        assert agentset.min_one_of(s, agentset.breed_set(s, "node"),
                                   lambda a: a.vars["load"]) == ids[1]

    def test_tie_breaks_to_lowest_id(self):
        s = world()
        ids = s.create_agents("node", 5)
        assert agentset.min_one_of(s, agentset.breed_set(s, "node"), lambda a: 1.0) == ids[0]

    def test_key_who_is_min_id(self):
        s = world()
        s.create_agents("node", 9)
        aset = agentset.breed_set(s, "node")
        assert agentset.min_one_of(s, aset, lambda a: a.id) == min(aset.ids)

    def test_empty_set_errors(self):
        with pytest.raises(SimError):
            agentset.min_one_of(world(), agentset.AgentSet(()), lambda a: 0)

    def test_result_is_member_with_min_key(self):
        s = world(seed=21)
        ids = s.create_agents("node", 30)
        rng = s.rng_for("keys")
        for aid in ids:
            s.agent(aid).vars["k"] = float(rng.integers(0, 10))
        aset = agentset.breed_set(s, "node")
        best = agentset.min_one_of(s, aset, lambda a: a.vars["k"])
        assert best in aset
        kmin = s.agent(best).vars["k"]
        assert all(s.agent(a).vars["k"] >= kmin for a in aset.ids)


class TestLinkNeighbors:
    def test_isolated(self):
        s = world()
        a = s.create_agents("node", 1)[0]
        assert agentset.link_neighbors(s, a).ids == ()

    def test_triangle(self):
        s = world()
        a, b, c = s.create_agents("node", 3)
        s.create_link(a, b)
        s.create_link(b, c)
        s.create_link(a, c)
        assert agentset.link_neighbors(s, a).ids == (b, c)

    def test_path_degree(self):
        s = world()
        a, b, c = s.create_agents("node", 3)
        s.create_link(a, b)
        s.create_link(b, c)
        assert len(agentset.link_neighbors(s, b)) == 2


class TestAsk:
    def test_recolor_matching_nodes(self):
        s = world()
        ids = s.create_agents("node", 3)
        for aid, p in zip(ids, (0.3, 0.7, 0.4)):
            s.agent(aid).vars["power"] = p
        matching = agentset.select_with(s, "node", lambda a: a.vars["power"] < 0.5)

        def recolor(agent):
            agent.color = 55.0

        agentset.ask(s, matching, recolor)
        assert [s.agent(a).color for a in ids] == [55.0, 0.0, 55.0]

    def test_empty_ask_noop(self):
        s = world()
        before = s.digest()
        agentset.ask(s, agentset.AgentSet(()), lambda a: a.fd(1))
        assert s.digest() == before

    def test_noop_action_keeps_digest(self):
        s = world(seed=3)
        s.create_agents("node", 20)
        before = s.digest()
        agentset.ask(s, agentset.breed_set(s, "node"), lambda a: None)
        assert s.digest() == before

    def test_shuffle_differs_within_run_but_not_across(self):
        def orders(seed):
            s = world(seed=seed)
            s.create_agents("node", 30)
            aset = agentset.breed_set(s, "node")
            seen = []
            for _ in range(2):
                order = []
                agentset.ask(s, aset, lambda a: order.append(a.id))
                seen.append(tuple(order))
            return seen

        first = orders(42)
        assert first[0] != first[1]
        assert first == orders(42)

    def test_error_names_agent(self):
        s = world()
        ids = s.create_agents("node", 3)

        def explode(agent):
            raise ValueError("nope")

        with pytest.raises(SimError, match="agent"):
            agentset.ask(s, agentset.breed_set(s, "node"), explode)

    def test_dead_member_skipped(self):
        s = world()
        ids = s.create_agents("node", 3)
        aset = agentset.breed_set(s, "node")
        s.kill(ids[1])
        visited = []
        agentset.ask(s, aset, lambda a: visited.append(a.id))
        assert sorted(visited) == [ids[0], ids[2]]

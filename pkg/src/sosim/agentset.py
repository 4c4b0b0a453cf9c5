"""Agentset selection and `ask` execution semantics.

Agentsets are snapshots: membership is frozen when the set is built, so
mutation during an ask cannot change who gets asked (members that die before
their turn are skipped).
"""

from __future__ import annotations

from dataclasses import dataclass

from .world import Agent, AskError, SimError, SimState


@dataclass(frozen=True)
class AgentSet:
    ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __contains__(self, aid: int) -> bool:
        return aid in self.ids


def select_with(state: SimState, breed: str | None, pred) -> AgentSet:
    """Live agents of ``breed`` (None = all) satisfying ``pred``, in id order.

    ``pred`` takes an Agent handle; referencing a variable no agent has ever
    set raises an error naming the variable.
    """
    out = []
    for aid in state.alive_ids(breed):
        if pred(state.agent(aid)):
            out.append(int(aid))
    return AgentSet(tuple(out))


def breed_set(state: SimState, breed: str | None = None) -> AgentSet:
    """All live agents of a breed (None = every breed), in id order."""
    return AgentSet(tuple(int(a) for a in state.alive_ids(breed)))


def in_radius(state: SimState, center: tuple[float, float], r: float,
              breed: str | None = None) -> AgentSet:
    """Agents within toroidal distance ``r`` of ``center`` (boundary inclusive)."""
    if r < 0:
        raise SimError("radius must be >= 0")
    ids = state.alive_ids(breed)
    if len(ids) == 0:
        return AgentSet(())
    dist = state.distances_from(center, ids)
    return AgentSet(tuple(int(a) for a in ids[dist <= r]))


def min_one_of(state: SimState, aset: AgentSet, key) -> int:
    """The member minimizing ``key(agent)``; ties go to the lowest agent id."""
    if len(aset) == 0:
        raise SimError("min-one-of over an empty agentset")
    best_id = None
    best_key = None
    for aid in aset.ids:
        k = key(state.agent(aid))
        if best_key is None or k < best_key:
            best_key, best_id = k, aid
    return best_id


def link_neighbors(state: SimState, aid: int) -> AgentSet:
    """All agents sharing a link with ``aid``, in id order."""
    return AgentSet(tuple(state.neighbors_of(aid)))


def ask(state: SimState, aset: AgentSet, action, rng=None) -> None:
    """Run ``action(agent)`` once per member in a fresh RNG-shuffled order.

    Members that died before their turn are skipped; an action error aborts
    the remaining iteration and surfaces with the offending agent id.
    """
    if len(aset) == 0:
        return
    if rng is None:
        rng = state.rng_for("observer")
    order = rng.permutation(len(aset))
    for k in order:
        aid = aset.ids[int(k)]
        if not state.is_alive(aid):
            continue
        try:
            action(state.agent(aid))
        except Exception as exc:
            raise AskError(aid, exc) from exc

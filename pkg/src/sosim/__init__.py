"""Deterministic agent-based simulator for self-organizing communication networks."""

from .world import Agent, SimState, WorldConfig, create_world

__version__ = "0.1.0"
__all__ = ["Agent", "SimState", "WorldConfig", "create_world", "__version__"]

"""Seeded randomness: one root seed per run, named substreams derived from it.

Every random draw in a run is a pure function of ``(root_seed, stream name,
tick, sequence number)``.  Adding an extra consumer (a reporter, a console
query) therefore never perturbs the draws seen by protocol code, and a
recorded session can be replayed bit-exactly.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer; a bijection on 64-bit integers."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return (x ^ (x >> 31)) & MASK64


def fnv1a64(text: str) -> int:
    """FNV-1a hash of a stream name."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def derive_run_seed(base_seed: int, run_index: int) -> int:
    """Per-run seed for sweeps: mix64(base_seed XOR (run_index+1)*GOLDEN)."""
    return mix64(base_seed ^ (((run_index + 1) * GOLDEN) & MASK64))


def substream_seed(root_seed: int, name: str, tick: int = 0, seq: int = 0) -> int:
    """Seed for the ``seq``-th use of stream ``name`` at tick ``tick``."""
    material = mix64(root_seed ^ fnv1a64(name))
    material ^= ((tick + 1) * GOLDEN) & MASK64
    material ^= ((seq + 1) * 0xD1B54A32D192ED03) & MASK64
    return mix64(material)


def generator(seed: int) -> np.random.Generator:
    """A fresh PCG64 generator for a derived seed."""
    return np.random.Generator(np.random.PCG64(seed))

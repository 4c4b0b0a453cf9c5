"""Logo-style color scale: 14 hue families of ten shades over [0, 140).

Each family occupies a band of ten; the value ``10*f + 5`` is the family's
base shade, smaller values are darker, larger are lighter.  Console commands
and model code resolve color words through ``NAMED``.
"""

from __future__ import annotations

NAMED: dict[str, float] = {
    "black": 0.0,
    "gray": 5.0,
    "white": 9.9,
    "red": 15.0,
    "orange": 25.0,
    "brown": 35.0,
    "yellow": 45.0,
    "green": 55.0,
    "lime": 65.0,
    "turquoise": 75.0,
    "cyan": 85.0,
    "sky": 95.0,
    "blue": 105.0,
    "violet": 115.0,
    "magenta": 125.0,
    "pink": 135.0,
}

# Distinct base shades handed out to fixed transmission towers, strongest
# contrast first.  Election/cluster displays reuse the same cycle.
TOWER_PALETTE: tuple[float, ...] = (
    15.0, 105.0, 45.0, 125.0, 25.0, 85.0, 65.0, 135.0, 75.0, 115.0, 95.0, 35.0, 55.0, 5.0,
)


def resolve(name: str) -> float | None:
    """Color value for a color word, or None if the word is not a color."""
    return NAMED.get(name)


def wrap(value: float) -> float:
    """Map any real onto the color scale; every mutation lands in [0, 140)."""
    return float(value) % 140.0

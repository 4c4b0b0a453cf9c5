"""Per-tick metric series and canonical CSV export.

Reals are rendered with 17 significant digits so a 64-bit float round-trips
exactly and re-runs with the same seed produce byte-identical files.
"""

from __future__ import annotations

import io

from .world import SimError, SimState


def fmt_real(x) -> str:
    return "%.17g" % float(x)


def render_csv(state: SimState) -> str:
    """Header ``tick,<name1>,...`` in registration order, one row per tick."""
    names = [name for name, _ in state.reporters]
    out = io.StringIO()
    out.write(",".join(["tick"] + names) + "\n")
    for i, tick in enumerate(state.series_ticks):
        row = [str(tick)]
        for name in names:
            v = state.series[name][i]
            row.append("" if v is None else fmt_real(v))
        out.write(",".join(row) + "\n")
    return out.getvalue()


def export_csv(state: SimState, destination) -> None:
    """Write the series table; raises on an unwritable destination."""
    text = render_csv(state)
    try:
        with open(destination, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise SimError(f"cannot write metrics to {destination}: {exc}") from exc


def parse_csv(text: str) -> tuple[list[str], list[list[float | None]]]:
    """Inverse of render_csv for the numeric table."""
    lines = text.splitlines()
    if not lines:
        raise SimError("empty CSV")
    names = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append([None if c == "" else float(c) for c in cells])
    return names, rows

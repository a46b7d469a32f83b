"""CSV tables for odometers and odometer comparisons."""

from __future__ import annotations

import csv
import io
from typing import Mapping

from .geometry import Vertex


def odometer_to_csv(odometer: Mapping[Vertex, int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "u"])
    for (x, y), k in sorted(odometer.items()):
        if k:
            w.writerow([x, y, k])
    return buf.getvalue()


def odometer_from_csv(text: str) -> dict[Vertex, int]:
    return {(int(r["x"]), int(r["y"])): int(r["u"]) for r in csv.DictReader(io.StringIO(text))}


def odometer_diff(simulated: Mapping[Vertex, int], formula: Mapping[Vertex, int]) -> list[tuple[int, int, int, int]]:
    """Rows ``(x, y, simulated, formula)`` wherever the two disagree."""
    keys = sorted(set(simulated) | set(formula))
    return [
        (x, y, simulated.get((x, y), 0), formula.get((x, y), 0))
        for x, y in keys
        if simulated.get((x, y), 0) != formula.get((x, y), 0)
    ]


def diff_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "simulated", "formula"])
    w.writerows(rows)
    return buf.getvalue()

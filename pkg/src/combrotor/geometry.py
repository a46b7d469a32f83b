"""Geometry of the two-dimensional comb and of the half-line.

Vertices are plain ``(x, y)`` integer tuples under the standard embedding of
the comb into the square lattice: the backbone is the line ``y == 0`` and every
backbone vertex carries a vertical tooth.  Rotor directions cycle clockwise,
East -> South -> West -> North, skipping directions that have no edge.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .errors import DomainError, InvalidRotorError

Vertex = tuple[int, int]
Profile = Callable[[int], int]

ORIGIN: Vertex = (0, 0)


class Direction(IntEnum):
    """Rotor directions, numbered in clockwise order."""

    E = 0
    S = 1
    W = 2
    N = 3

    @property
    def step(self) -> Vertex:
        return _STEPS[self]

    @property
    def char(self) -> str:
        return self.name

    @classmethod
    def from_char(cls, c: str) -> "Direction":
        try:
            return cls[c.upper()]
        except KeyError:
            raise ValueError(f"unknown direction character {c!r}") from None


_STEPS = {
    Direction.E: (1, 0),
    Direction.S: (0, -1),
    Direction.W: (-1, 0),
    Direction.N: (0, 1),
}
_CLOCKWISE = (Direction.E, Direction.S, Direction.W, Direction.N)
_TOOTH_DIRECTIONS = (Direction.S, Direction.N)


def directions(v: Vertex) -> tuple[Direction, ...]:
    """Directions with an edge at ``v``, in clockwise order."""
    return _CLOCKWISE if v[1] == 0 else _TOOTH_DIRECTIONS


def degree(v: Vertex) -> int:
    return 4 if v[1] == 0 else 2


def neighbors(v: Vertex) -> list[Vertex]:
    x, y = v
    return [(x + dx, y + dy) for dx, dy in (d.step for d in directions(v))]


def is_adjacent(v: Vertex, w: Vertex) -> bool:
    return w in neighbors(v)


def target(v: Vertex, d: Direction) -> Vertex:
    """Neighbour of ``v`` the rotor direction ``d`` points at."""
    if d not in directions(v):
        raise InvalidRotorError(f"direction {Direction(d).name} is not an edge at {v}")
    dx, dy = _STEPS[d]
    return (v[0] + dx, v[1] + dy)


def rotor_successor(v: Vertex, d: Direction) -> Direction:
    """Next valid direction strictly after ``d`` in clockwise order."""
    dirs = directions(v)
    try:
        i = dirs.index(d)
    except ValueError:
        raise InvalidRotorError(f"direction {Direction(d).name} is not an edge at {v}") from None
    return dirs[(i + 1) % len(dirs)]


def advance(v: Vertex, d: Direction, k: int) -> Direction:
    """Rotor direction at ``v`` after ``k`` clockwise steps from ``d``."""
    dirs = directions(v)
    try:
        i = dirs.index(d)
    except ValueError:
        raise InvalidRotorError(f"direction {Direction(d).name} is not an edge at {v}") from None
    return dirs[(i + k) % len(dirs)]


def initial_rotor(v: Vertex) -> Direction:
    """The initial configuration: every arrow points away from the origin."""
    x, y = v
    if y > 0:
        return Direction.N
    if y < 0:
        return Direction.S
    return Direction.E if x >= 0 else Direction.W


def rotor_sequence(v: Vertex) -> list[Vertex]:
    """Neighbours of ``v`` in rotor order starting from the initial rotor."""
    d0 = initial_rotor(v)
    return [target(v, advance(v, d0, i)) for i in range(degree(v))]


# -- tooth-height profiles ---------------------------------------------------


def h_cluster(x: int) -> int:
    """Tooth height of the rotor-router cluster, ``floor((x+1)^2 / 3)``."""
    if x < 0:
        raise DomainError("profile argument must be non-negative")
    return (x + 1) ** 2 // 3


def h_square(x: int) -> int:
    if x < 0:
        raise DomainError("profile argument must be non-negative")
    return x * x


@dataclass(frozen=True)
class TableProfile:
    """A profile given by an explicit table ``h(0), h(1), ...``."""

    values: tuple[int, ...]

    def __call__(self, x: int) -> int:
        if x < 0 or x >= len(self.values):
            raise DomainError(f"profile table has no entry for {x}")
        return self.values[x]


PROFILES: dict[str, Profile] = {"cluster": h_cluster, "square": h_square}


def get_profile(spec: str) -> Profile:
    """Resolve ``cluster``, ``square`` or ``file:<path>`` to a profile.

    A profile file holds whitespace- or comma-separated non-negative integers.
    """
    if spec in PROFILES:
        return PROFILES[spec]
    if spec.startswith("file:"):
        text = Path(spec[5:]).read_text()
        values = tuple(int(t) for t in text.replace(",", " ").split())
        if any(v < 0 for v in values):
            raise DomainError("profile values must be non-negative")
        return TableProfile(values)
    raise DomainError(f"unknown profile {spec!r}")


def profile_name(h: Profile) -> str:
    for name, fn in PROFILES.items():
        if fn is h:
            return name
    return "table"


# -- shapes ------------------------------------------------------------------


@dataclass(frozen=True)
class ClusterShape:
    """The symmetric comb region ``{|x| <= m, |y| <= h(m - |x|)}``."""

    m: int
    h: Profile = field(default=h_cluster)

    def __post_init__(self):
        if self.m < 0:
            raise DomainError("m must be non-negative")

    def height(self, x: int) -> int:
        """Tooth height above backbone coordinate ``x`` (``-1`` outside)."""
        if abs(x) > self.m:
            return -1
        return self.h(self.m - abs(x))

    def __contains__(self, v: Vertex) -> bool:
        return shape_contains(self, v)

    def vertices(self) -> Iterator[Vertex]:
        for x in range(-self.m, self.m + 1):
            t = self.height(x)
            for y in range(-t, t + 1):
                yield (x, y)

    def __len__(self) -> int:
        return sum(2 * self.height(x) + 1 for x in range(-self.m, self.m + 1))

    def max_height(self) -> int:
        return max(self.height(x) for x in range(-self.m, self.m + 1))

    def inner_boundary(self) -> set[Vertex]:
        return inner_boundary(self)

    def interior(self) -> set[Vertex]:
        boundary = inner_boundary(self)
        return {v for v in self.vertices() if v not in boundary}


def shape_contains(B: ClusterShape, v: Vertex) -> bool:
    x, y = v
    return abs(x) <= B.m and abs(y) <= B.h(B.m - abs(x))


def inner_boundary(B: ClusterShape) -> set[Vertex]:
    """Vertices of ``B`` with at least one neighbour outside ``B``."""
    return {v for v in B.vertices() if any(not shape_contains(B, w) for w in neighbors(v))}


def boundary_tips(B: ClusterShape) -> set[Vertex]:
    """Closed-form boundary: backbone ends plus the tips of non-empty teeth."""
    tips = {(-B.m, 0), (B.m, 0)}
    for x in range(-B.m, B.m + 1):
        t = B.height(x)
        if t > 0:
            tips.add((x, t))
            tips.add((x, -t))
    return tips


def cardinality_Bm(m: int) -> int:
    """Size of the cluster-profile shape of radius ``m``."""
    if m < 0:
        raise DomainError("m must be non-negative")
    num = 4 * m**3 + 12 * m**2 + 24 * m + 5 + 2 * ((m + 2) % 3)
    q, r = divmod(num, 9)
    assert r == 0
    return q


def cardinality_branches(m: int) -> int:
    """The same count from the three congruence-class polynomials."""
    k, i = divmod(m, 3)
    if i == 0:
        return 12 * k**3 + 12 * k**2 + 8 * k + 1
    if i == 1:
        return 12 * k**3 + 24 * k**2 + 20 * k + 5
    return 12 * k**3 + 36 * k**2 + 40 * k + 15


def radius_for(n: int) -> int:
    """Smallest ``m`` with ``cardinality_Bm(m) >= n``."""
    m = 0
    while cardinality_Bm(m) < n:
        m += 1
    return m


# -- half-line ---------------------------------------------------------------


def halfline_neighbors(y: int) -> list[int]:
    if y < 1:
        raise DomainError("the sink 0 has no outgoing edges")
    return [y - 1, y + 1]


# -- export ------------------------------------------------------------------


def vertices_to_csv(vertices: Iterable[Vertex]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for x, y in sorted(vertices):
        w.writerow([x, y])
    return buf.getvalue()


def vertices_from_csv(text: str) -> set[Vertex]:
    rows = csv.DictReader(io.StringIO(text))
    return {(int(r["x"]), int(r["y"])) for r in rows}


def vertices_to_json(vertices: Iterable[Vertex]) -> str:
    return json.dumps([[x, y] for x, y in sorted(vertices)])


def vertices_from_json(text: str) -> set[Vertex]:
    return {(int(x), int(y)) for x, y in json.loads(text)}

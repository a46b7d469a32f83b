"""Toppling mechanics: rotor walks, aggregation, the half-line process and
odometer certification.

States are mutable and single-writer.  Functions that take a state modify it
in place and return it; call :meth:`EngineState.copy` first to keep the
original.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from . import _kernels
from .errors import (
    BudgetExceededError,
    DomainError,
    IllegalToppleError,
    InvalidRotorError,
    SinkToppleError,
)
from .geometry import (
    ORIGIN,
    Direction,
    Vertex,
    advance,
    cardinality_Bm,
    degree,
    directions,
    initial_rotor,
    radius_for,
    rotor_successor,
    target,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**10
SNAPSHOT_VERSION = 1


class ToppleMode(Enum):
    LEGAL = "legal"
    VIRTUAL = "virtual"


class RotorConfig(dict):
    """Rotor directions keyed by vertex; unset vertices read as the initial rotor."""

    def __missing__(self, v: Vertex) -> Direction:
        return initial_rotor(v)

    def __setitem__(self, v: Vertex, d: Direction) -> None:
        if d not in directions(v):
            raise InvalidRotorError(f"direction {Direction(d).name} is not an edge at {v}")
        super().__setitem__(v, Direction(d))

    def target(self, v: Vertex) -> Vertex:
        return target(v, self[v])

    def copy(self) -> "RotorConfig":
        return RotorConfig(self)


class ParticleConfig(dict):
    """Particle counts keyed by vertex; unset vertices hold zero."""

    def __missing__(self, v: Vertex) -> int:
        return 0

    def nonzero(self) -> dict[Vertex, int]:
        return {v: c for v, c in self.items() if c != 0}

    def total(self) -> int:
        return sum(self.values())

    def copy(self) -> "ParticleConfig":
        return ParticleConfig(self)


@dataclass
class EngineState:
    rotors: RotorConfig = field(default_factory=RotorConfig)
    particles: ParticleConfig = field(default_factory=ParticleConfig)
    odometer: dict[Vertex, int] = field(default_factory=dict)
    sinks: frozenset = frozenset()

    @classmethod
    def with_particles(cls, n: int, at: Vertex = ORIGIN, sinks: Iterable[Vertex] = ()) -> "EngineState":
        s = cls(sinks=frozenset(sinks))
        if n:
            s.particles[at] = n
        return s

    def copy(self) -> "EngineState":
        return EngineState(self.rotors.copy(), self.particles.copy(), dict(self.odometer), self.sinks)

    def rotor(self, v: Vertex) -> Direction:
        return self.rotors[v]

    def same_as(self, other: "EngineState") -> bool:
        """Equality of rotors, particles and odometer up to default entries."""
        verts = set(self.rotors) | set(other.rotors)
        return (
            all(self.rotors[v] == other.rotors[v] for v in verts)
            and self.particles.nonzero() == other.particles.nonzero()
            and {v: k for v, k in self.odometer.items() if k} == {v: k for v, k in other.odometer.items() if k}
        )

    # -- snapshots -----------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "version": SNAPSHOT_VERSION,
            "rotors": [[x, y, d.char] for (x, y), d in sorted(self.rotors.items())],
            "particles": [[x, y, c] for (x, y), c in sorted(self.particles.nonzero().items())],
            "odometer": [[x, y, k] for (x, y), k in sorted(self.odometer.items()) if k],
            "sinks": [[x, y] for x, y in sorted(self.sinks)],
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "EngineState":
        doc = json.loads(text)
        if doc.get("version") != SNAPSHOT_VERSION:
            raise DomainError(f"unsupported snapshot version {doc.get('version')!r}")
        s = cls(sinks=frozenset((x, y) for x, y in doc.get("sinks", [])))
        for x, y, c in doc["rotors"]:
            s.rotors[(x, y)] = Direction.from_char(c)
        for x, y, c in doc["particles"]:
            s.particles[(x, y)] = c
        for x, y, k in doc["odometer"]:
            s.odometer[(x, y)] = k
        return s


def topple(s: EngineState, x: Vertex, mode: ToppleMode = ToppleMode.LEGAL) -> EngineState:
    """Advance the rotor at ``x`` one step and send one particle along it."""
    if x in s.sinks:
        raise SinkToppleError(f"{x} is a sink")
    if mode is ToppleMode.LEGAL and s.particles[x] <= 0:
        raise IllegalToppleError(f"no particle at {x}")
    d = rotor_successor(x, s.rotors[x])
    s.rotors[x] = d
    s.particles[x] -= 1
    y = target(x, d)
    s.particles[y] += 1
    s.odometer[x] = s.odometer.get(x, 0) + 1
    return s


def topple_many(s: EngineState, x: Vertex, k: int) -> EngineState:
    """Virtual-mode ``k``-fold toppling of ``x`` in O(degree) work."""
    if k < 0:
        raise DomainError("toppling count must be non-negative")
    if k == 0:
        return s
    if x in s.sinks:
        raise SinkToppleError(f"{x} is a sink")
    d0 = s.rotors[x]
    deg = degree(x)
    q, r = divmod(k, deg)
    for t in range(1, deg + 1):
        s.particles[target(x, advance(x, d0, t))] += q + (1 if t <= r else 0)
    s.particles[x] -= k
    s.rotors[x] = advance(x, d0, k)
    s.odometer[x] = s.odometer.get(x, 0) + k
    return s


def apply_Fu(s: EngineState, u: Mapping[Vertex, int], literal: bool = False) -> EngineState:
    """Topple every ``x`` exactly ``u[x]`` times, holes allowed.

    By the abelian property the order is irrelevant; vertices are processed in
    sorted order.  ``literal`` performs the single topplings one by one.
    """
    for x in sorted(u):
        k = u[x]
        if literal:
            for _ in range(k):
                topple(s, x, ToppleMode.VIRTUAL)
        else:
            topple_many(s, x, k)
    return s


def rotor_walk(
    s: EngineState,
    start: Vertex,
    stop: Callable[[Vertex], bool],
    budget: int = DEFAULT_BUDGET,
) -> tuple[Vertex, int, EngineState]:
    """Add a particle at ``start`` and walk it until ``stop`` holds.

    The particle is left on the stop vertex.  Returns the stop vertex and the
    number of steps taken.
    """
    s.particles[start] += 1
    v = start
    steps = 0
    while not stop(v):
        if steps >= budget:
            raise BudgetExceededError(f"rotor walk exceeded {budget} steps")
        topple(s, v, ToppleMode.LEGAL)
        v = s.rotors.target(v)
        steps += 1
    return v, steps, s


# -- aggregation -------------------------------------------------------------


@dataclass
class Aggregation:
    n: int
    cluster: set[Vertex]
    state: EngineState
    settle_order: list[Vertex]
    steps: int


def aggregate_reference(n: int, budget: int = DEFAULT_BUDGET) -> Aggregation:
    """Aggregation through :func:`rotor_walk`; slow, used as a cross-check."""
    if n < 1:
        raise DomainError("n must be positive")
    s = EngineState()
    cluster: set[Vertex] = set()
    order: list[Vertex] = []
    total = 0
    for _ in range(n):
        z, steps, _ = rotor_walk(s, ORIGIN, lambda v: v not in cluster, budget - total)
        total += steps
        cluster.add(z)
        order.append(z)
    return Aggregation(n, cluster, s, order, total)


class DenseAggregator:
    """Incremental aggregation on dense arrays that grow on demand.

    ``run_to(n)`` continues the process until ``n`` particles have settled,
    so one instance can be inspected at many checkpoints.
    """

    def __init__(self, expected_n: int = 1, budget: int = DEFAULT_BUDGET):
        m = radius_for(max(expected_n, 1))
        self.budget = budget
        self.n = 0
        self.steps = 0
        self._alloc(m + 3, (m + 1) ** 2 // 3 + 3)
        self.settle = np.zeros((max(expected_n, 1), 2), dtype=np.int64)

    def _alloc(self, half_w: int, half_h: int) -> None:
        self.ox, self.oy = half_w, half_h
        shape = (2 * half_w + 1, 2 * half_h + 1)
        self.rot = np.empty(shape, dtype=np.int8)
        self.rot[:, half_h + 1 :] = Direction.N
        self.rot[:, :half_h] = Direction.S
        self.rot[half_w:, half_h] = Direction.E
        self.rot[:half_w, half_h] = Direction.W
        self.odo = np.zeros(shape, dtype=np.int64)
        self.occ = np.zeros(shape, dtype=np.bool_)

    def _grow(self) -> None:
        rot, odo, occ, ox, oy = self.rot, self.odo, self.occ, self.ox, self.oy
        self._alloc(2 * ox, 2 * oy)
        dx, dy = self.ox - ox, self.oy - oy
        w, h = occ.shape
        self.rot[dx : dx + w, dy : dy + h] = rot
        self.odo[dx : dx + w, dy : dy + h] = odo
        self.occ[dx : dx + w, dy : dy + h] = occ
        log.debug("aggregation arrays grown to %s", self.occ.shape)

    def run_to(self, n: int) -> "DenseAggregator":
        if n < self.n:
            raise DomainError(f"already past {n} particles")
        if n > len(self.settle):
            grown = np.zeros((max(n, 2 * len(self.settle)), 2), dtype=np.int64)
            grown[: self.n] = self.settle[: self.n]
            self.settle = grown
        while self.n < n:
            status, self.n, self.steps = _kernels.aggregate_kernel(
                self.rot, self.odo, self.occ, self.ox, self.oy,
                n, self.n, self.settle, self.steps, self.budget,
            )
            if status == _kernels.BUDGET:
                raise BudgetExceededError(f"aggregation exceeded {self.budget} topplings")
            if status == _kernels.GROW:
                self._grow()
        return self

    def cluster(self) -> set[Vertex]:
        xs, ys = np.nonzero(self.occ)
        return {(int(x) - self.ox, int(y) - self.oy) for x, y in zip(xs, ys)}

    def odometer(self) -> dict[Vertex, int]:
        xs, ys = np.nonzero(self.odo)
        return {(int(x) - self.ox, int(y) - self.oy): int(self.odo[x, y]) for x, y in zip(xs, ys)}

    def odometer_at(self, v: Vertex) -> int:
        x, y = v[0] + self.ox, v[1] + self.oy
        if 0 <= x < self.odo.shape[0] and 0 <= y < self.odo.shape[1]:
            return int(self.odo[x, y])
        return 0

    def rotor_at(self, v: Vertex) -> Direction:
        x, y = v[0] + self.ox, v[1] + self.oy
        if 0 <= x < self.rot.shape[0] and 0 <= y < self.rot.shape[1]:
            return Direction(int(self.rot[x, y]))
        return initial_rotor(v)

    def settle_order(self) -> list[Vertex]:
        return [(int(x), int(y)) for x, y in self.settle[: self.n]]

    def to_state(self) -> EngineState:
        s = EngineState()
        odo = self.odometer()
        s.odometer = odo
        for v in odo:
            s.rotors[v] = self.rotor_at(v)
        for v in self.cluster():
            s.particles[v] = 1
        return s

    def result(self) -> Aggregation:
        return Aggregation(self.n, self.cluster(), self.to_state(), self.settle_order(), self.steps)


def aggregate(n: int, budget: int = DEFAULT_BUDGET) -> Aggregation:
    """Rotor-router aggregation of ``n`` particles from the origin."""
    if n < 1:
        raise DomainError("n must be positive")
    return DenseAggregator(n, budget).run_to(n).result()


def aggregate_shapes(ms: Iterable[int], budget: int = DEFAULT_BUDGET) -> Iterator[tuple[int, DenseAggregator]]:
    """Yield the aggregator at ``n = |B_m|`` for each ``m`` in increasing order."""
    ms = sorted(ms)
    if not ms:
        return
    agg = DenseAggregator(cardinality_Bm(ms[-1]), budget)
    for m in ms:
        agg.run_to(cardinality_Bm(m))
        yield m, agg


# -- half-line ---------------------------------------------------------------


@dataclass
class HalflineState:
    """Process on the non-negative integers with sink 0.

    ``odometer[y]`` and ``inward[y]`` are indexed by vertex; index 0 is the
    sink and unused.  ``inward[y]`` is true when the rotor at ``y`` points to
    ``y - 1``.
    """

    n: int = 0
    extent: int = 0
    odometer: list[int] = field(default_factory=lambda: [0])
    inward: list[bool] = field(default_factory=lambda: [False])
    stops: list[int] = field(default_factory=list)

    def frontier(self) -> int:
        """Largest ``r`` such that the rotors at ``1..r`` all point inward."""
        r = 0
        while r < self.extent and self.inward[r + 1]:
            r += 1
        return r


def halfline_step(s: HalflineState) -> int:
    """Release one particle at 1; returns the vertex where it stops."""
    y = 1
    while 1 <= y <= s.extent:
        s.inward[y] = not s.inward[y]
        s.odometer[y] += 1
        y = y - 1 if s.inward[y] else y + 1
    if y > s.extent:
        s.extent = y
        s.odometer.append(0)
        s.inward.append(False)
    s.n += 1
    s.stops.append(y)
    return y


@dataclass
class HalflineResult:
    h: int
    r: int
    odometer: dict[int, int]
    stops: list[int]


def halfline_run(n_max: int) -> Iterator[HalflineState]:
    """Yield the half-line state after each of ``n_max`` particles."""
    s = HalflineState()
    for _ in range(n_max):
        halfline_step(s)
        yield s


def halfline_process(n: int) -> HalflineResult:
    if n < 1:
        raise DomainError("n must be positive")
    for s in halfline_run(n):
        pass
    return HalflineResult(
        s.extent,
        s.frontier(),
        {y: s.odometer[y] for y in range(1, s.extent + 1)},
        list(s.stops),
    )


# -- acyclicity and certification ----------------------------------------------


def is_acyclic(rotors: Mapping[Vertex, Direction], region: Iterable[Vertex]) -> bool:
    """True when following rotor arrows inside ``region`` closes no cycle.

    ``rotors`` may be a :class:`RotorConfig` (defaults to the initial rotor) or
    any mapping covering ``region``.
    """
    region = set(region)
    state: dict[Vertex, int] = {}  # 1 = on current path, 2 = known to escape
    for start in region:
        if start in state:
            continue
        path = []
        v = start
        while v in region and v not in state:
            state[v] = 1
            path.append(v)
            v = target(v, rotors[v])
        if v in region and state.get(v) == 1:
            return False
        for w in path:
            state[w] = 2
    return True


@dataclass
class OdometerVerdict:
    """The four sufficient conditions for an odometer candidate."""

    a_at_most_one: bool
    b_finite: bool
    c_one_on_support: bool
    d_acyclic: bool
    region: set[Vertex]
    state: EngineState
    violations: list[str]

    @property
    def certified(self) -> bool:
        return self.a_at_most_one and self.b_finite and self.c_one_on_support and self.d_acyclic

    def report(self) -> list[str]:
        rows = [
            ("a", "sigma <= 1 everywhere", self.a_at_most_one),
            ("b", "support finite", self.b_finite),
            ("c", "sigma == 1 on support", self.c_one_on_support),
            ("d", "rotors acyclic on support", self.d_acyclic),
        ]
        return [f"({k}) {label}: {'ok' if ok else 'FAIL'}" for k, label, ok in rows]


def verify_odometer(
    u_star: Mapping[Vertex, int],
    n: int,
    A_star: Iterable[Vertex] | None = None,
) -> OdometerVerdict:
    """Check whether ``u_star`` is the aggregation odometer of ``n`` particles."""
    if any(k < 0 for k in u_star.values()):
        raise DomainError("odometer values must be non-negative")
    region = {v for v, k in u_star.items() if k > 0} if A_star is None else set(A_star)
    s = apply_Fu(EngineState.with_particles(n), u_star)
    violations = []
    over = sorted(v for v, c in s.particles.items() if c > 1)
    if over:
        violations.append(f"(a) sigma > 1 at {over[:5]}")
    wrong = sorted(v for v in region if s.particles[v] != 1)
    if wrong:
        violations.append(f"(c) sigma != 1 at {wrong[:5]}")
    acyclic = is_acyclic(s.rotors, region)
    if not acyclic:
        violations.append("(d) rotor cycle on support")
    return OdometerVerdict(not over, True, not wrong, acyclic, region, s, violations)

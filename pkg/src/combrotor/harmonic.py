"""Harmonic measure of comb shapes, computed three ways.

* :func:`harmonic_by_rotor` routes particles from the origin until every
  interior rotor is back at its start; exit counts are then exactly
  proportional to the harmonic measure.
* :func:`harmonic_by_recursion` solves the three-term recursion satisfied by
  the exit counts along the backbone, in exact rationals.
* :func:`harmonic_by_montecarlo` samples simple random walks.

The weight machinery (particle weights plus rotor weights is conserved under
routing) lives here as well, together with the sequence ``e(x)`` of the
cluster profile and its normalised form ``e(x)/x``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .engine import DEFAULT_BUDGET, RotorConfig
from .errors import (
    BudgetExceededError,
    DegenerateProfileError,
    DomainError,
    TheoremContradictionError,
)
from .geometry import (
    ORIGIN,
    ClusterShape,
    Profile,
    Vertex,
    degree,
    h_cluster,
    initial_rotor,
    neighbors,
    rotor_sequence,
    rotor_successor,
    target,
)

log = logging.getLogger(__name__)


# -- boundary measures ---------------------------------------------------------


@dataclass
class BoundaryMeasure:
    """Exit weights ``e`` on the inner boundary and the normalised measure ``nu``."""

    e: dict[Vertex, Fraction | int]
    n: Fraction | int
    nu: dict[Vertex, Fraction] = field(init=False)
    exact: bool = True

    def __post_init__(self):
        if self.n <= 0:
            raise DomainError("total weight must be positive")
        self.nu = {z: Fraction(w) / Fraction(self.n) for z, w in self.e.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "e", "nu_num", "nu_den"])
        for (x, y), val in sorted(self.e.items()):
            nu = self.nu[(x, y)]
            w.writerow([x, y, _fmt(val), nu.numerator, nu.denominator])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BoundaryMeasure":
        rows = list(csv.DictReader(io.StringIO(text)))
        e = {(int(r["x"]), int(r["y"])): Fraction(r["e"]) for r in rows}
        return cls(e, sum(e.values()))

    def to_json(self) -> str:
        doc = {
            "n": _fmt(self.n),
            "exact": self.exact,
            "boundary": [
                {"x": x, "y": y, "e": _fmt(val), "nu": [self.nu[(x, y)].numerator, self.nu[(x, y)].denominator]}
                for (x, y), val in sorted(self.e.items())
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "BoundaryMeasure":
        doc = json.loads(text)
        e = {(r["x"], r["y"]): Fraction(r["e"]) for r in doc["boundary"]}
        out = cls(e, Fraction(doc["n"]))
        out.exact = doc["exact"]
        return out


def _fmt(v) -> str | int:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return int(v)


def max_discrepancy(a: BoundaryMeasure, b: BoundaryMeasure) -> float:
    keys = set(a.nu) | set(b.nu)
    return max(abs(float(a.nu.get(z, 0) - b.nu.get(z, 0))) for z in keys)


# -- rotor weights -------------------------------------------------------------


@dataclass
class WeightSystem:
    """A weight function ``psi``; vertices not listed have weight zero."""

    psi: Mapping[Vertex, Fraction]

    def __call__(self, v: Vertex) -> Fraction:
        return Fraction(self.psi.get(v, 0))

    def rotor_weight(self, x: Vertex, k: int) -> Fraction:
        """``w(x, k)``, summed term by term from the rotor sequence at ``x``."""
        seq = rotor_sequence(x)
        d = len(seq)
        w = Fraction(0)
        for j in range(1, k + 1):
            w += self(x) - self(seq[j % d])
        return w

    def laplacian(self, x: Vertex) -> Fraction:
        nb = neighbors(x)
        return sum((self(y) - self(x) for y in nb), Fraction(0)) / len(nb)

    def particle_weight(self, sigma: Mapping[Vertex, int]) -> Fraction:
        return sum((c * self(v) for v, c in sigma.items()), Fraction(0))

    def total_rotor_weight(self, odometer: Mapping[Vertex, int]) -> Fraction:
        return sum((self.rotor_weight(x, k) for x, k in odometer.items()), Fraction(0))


def weight_series(
    trace: Sequence[Vertex],
    psi: WeightSystem,
    sigma0: Mapping[Vertex, int] | None = None,
) -> list[Fraction]:
    """``W_P(t) + W_R(t)`` for every prefix ``t = 0..len(trace)``.

    The trace is replayed as virtual topplings from the initial rotors, so the
    ``k``-th toppling of ``x`` sends to the ``k mod d``-th entry of its rotor
    sequence.  Both weights are recomputed from the full state at every
    prefix.  Values are scaled to a common denominator so that the sums run in
    integer arrays.
    """
    sigma0 = dict(sigma0 or {})
    verts = set(trace) | set(sigma0) | {v for v in psi.psi}
    for x in set(trace):
        verts.update(neighbors(x))
    verts = sorted(verts)
    idx = {v: i for i, v in enumerate(verts)}
    nv = len(verts)

    D = reduce(math.lcm, (Fraction(p).denominator for p in psi.psi.values()), 1)
    num = [int(psi(v) * D) for v in verts]

    deg = np.array([degree(v) for v in verts], dtype=np.int64)
    partial = [[0] * 5 for _ in verts]
    for x in set(trace):
        i = idx[x]
        for r in range(deg[i] + 1):
            partial[i][r] = int(psi.rotor_weight(x, r) * D)
    send = {x: [idx[y] for y in rotor_sequence(x)] for x in set(trace)}

    bound = max((abs(a) for a in num), default=0) * (len(trace) + sum(abs(c) for c in sigma0.values()) + 1) * 8 * max(nv, 1)
    dtype = np.int64 if bound < 2**62 else object
    numv = np.array(num, dtype=dtype)
    part = np.array(partial, dtype=dtype)
    full = part[np.arange(nv), deg]
    sigma = np.zeros(nv, dtype=dtype)
    for v, c in sigma0.items():
        sigma[idx[v]] = c
    odo = np.zeros(nv, dtype=np.int64)
    rows = np.arange(nv)

    def total() -> Fraction:
        wp = int((sigma * numv).sum())
        wr = int(((odo // deg).astype(dtype) * full).sum() + part[rows, odo % deg].sum())
        return Fraction(wp + wr, D)

    out = [total()]
    for x in trace:
        i = idx[x]
        odo[i] += 1
        sigma[i] -= 1
        sigma[send[x][odo[i] % deg[i]]] += 1
        out.append(total())
    return out


def weight_invariance_check(
    trace: Sequence[Vertex],
    psi: WeightSystem,
    sigma0: Mapping[Vertex, int] | None = None,
) -> bool:
    """True iff particle plus rotor weight is the same after every toppling."""
    series = weight_series(trace, psi, sigma0)
    return all(w == series[0] for w in series)


# -- exact Dirichlet solutions -------------------------------------------------


def exact_harmonic_measure(B: ClusterShape, start: Vertex | None = ORIGIN) -> dict[Vertex, dict[Vertex, Fraction]]:
    """Hitting probabilities of the inner boundary, by exact elimination.

    Returns ``nu[x][z]`` for every ``x`` in ``B`` (or only ``start`` when
    given) and every boundary vertex ``z``.  Gauss-Jordan over the rationals;
    intended for shapes of a few hundred vertices.
    """
    boundary = sorted(B.inner_boundary())
    interior = sorted(B.interior())
    bidx = {z: j for j, z in enumerate(boundary)}
    iidx = {v: i for i, v in enumerate(interior)}
    n, nb = len(interior), len(boundary)
    # rows: d*u(x) - sum_{y interior} u(y) = sum_{z boundary} [y == z]
    A = [[Fraction(0)] * n for _ in range(n)]
    R = [[Fraction(0)] * nb for _ in range(n)]
    for v, i in iidx.items():
        A[i][i] = Fraction(degree(v))
        for w in neighbors(v):
            if w in iidx:
                A[i][iidx[w]] -= 1
            else:
                R[i][bidx[w]] += 1
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        R[c], R[p] = R[p], R[c]
        piv = A[c][c]
        A[c] = [a / piv for a in A[c]]
        R[c] = [a / piv for a in R[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
                R[r] = [a - f * b for a, b in zip(R[r], R[c])]
    sol = {v: {z: R[i][bidx[z]] for z in boundary} for v, i in iidx.items()}
    for z in boundary:
        sol[z] = {w: Fraction(int(w == z)) for w in boundary}
    if start is not None:
        return {start: sol[start]}
    return sol


def harmonic_psi(B: ClusterShape, z: Vertex) -> WeightSystem:
    """``psi(x) = P_x[first boundary hit is z]`` on ``B``, zero outside."""
    sol = exact_harmonic_measure(B, start=None)
    return WeightSystem({x: row[z] for x, row in sol.items()})


# -- particle addition ---------------------------------------------------------


def add_particle_Ex(rotors: RotorConfig, x: Vertex, B: ClusterShape, budget: int = DEFAULT_BUDGET) -> RotorConfig:
    """Route one particle from interior vertex ``x`` to the boundary of ``B``."""
    boundary = B.inner_boundary()
    if x not in B or x in boundary:
        raise DomainError(f"{x} is not an interior vertex of the shape")
    out = rotors.copy()
    v = x
    steps = 0
    while v not in boundary:
        if steps >= budget:
            raise BudgetExceededError(f"particle exceeded {budget} steps")
        d = rotor_successor(v, out[v])
        out[v] = d
        v = target(v, d)
        steps += 1
    return out


# -- rotor-router harmonic measure -----------------------------------------------


@dataclass
class RotorRun:
    """Outcome of :func:`harmonic_by_rotor`."""

    measure: BoundaryMeasure
    exact: bool
    n: int
    steps: int
    odometer: dict[Vertex, int]

    def normalized_odometer(self) -> dict[Vertex, Fraction]:
        return {v: Fraction(k, degree(v)) for v, k in self.odometer.items()}


def _dense_shape(B: ClusterShape):
    H = max(B.max_height(), 0)
    ox, oy = B.m + 1, H + 1
    shape = (2 * ox + 1, 2 * oy + 1)
    kind = np.zeros(shape, dtype=np.int8)
    boundary = B.inner_boundary()
    for x, y in B.vertices():
        kind[x + ox, y + oy] = 2 if (x, y) in boundary else 1
    rot = np.empty(shape, dtype=np.int8)
    for i in range(shape[0]):
        for j in range(shape[1]):
            rot[i, j] = initial_rotor((i - ox, j - oy))
    return kind, rot, ox, oy


def harmonic_by_rotor(B: ClusterShape, cap: int = 10**7, budget: int = DEFAULT_BUDGET) -> RotorRun:
    """Route particles from the origin until all interior rotors are back at start.

    If that happens within ``cap`` particles the exit counts give the exact
    harmonic measure; otherwise the measure at ``cap`` is returned with
    ``exact=False``.
    """
    if cap < 1:
        raise DomainError("cap must be at least 1")
    kind, rot, ox, oy = _dense_shape(B)
    odo = np.zeros(kind.shape, dtype=np.int64)
    exits = np.zeros(kind.shape, dtype=np.int64)
    if kind[ox, oy] == 2:
        exits[ox, oy] = 1
        status, n, steps = _kernels.OK, 1, 0
    else:
        status, n, _, steps = _kernels.exit_kernel(rot, odo, kind, ox, oy, 0, cap, exits, 0, 0, budget)
    if status == _kernels.BUDGET:
        raise BudgetExceededError(f"boundary routing exceeded {budget} topplings")
    exact = status == _kernels.OK
    e = {}
    for z in sorted(B.inner_boundary()):
        e[z] = int(exits[z[0] + ox, z[1] + oy])
    xs, ys = np.nonzero(odo)
    odometer = {(int(i) - ox, int(j) - oy): int(odo[i, j]) for i, j in zip(xs, ys)}
    measure = BoundaryMeasure(e, n)
    measure.exact = exact
    log.info("rotor run on m=%d: n=%d exact=%s", B.m, n, exact)
    return RotorRun(measure, exact, n, int(steps), odometer)


# -- recursion -----------------------------------------------------------------


@dataclass
class RationalSeq:
    """Exact values ``e(0..X)`` of a backbone exit-count sequence."""

    values: list[Fraction]

    def __getitem__(self, x: int) -> Fraction:
        return self.values[x]

    def __len__(self) -> int:
        return len(self.values)

    def normalized(self, x: int) -> Fraction:
        """``e(x) / x`` for ``x >= 1``."""
        if x < 1:
            raise DomainError("normalised value needs x >= 1")
        return self.values[x] / x

    def mod3(self, k: int) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(self.values[3 * k + i] for i in range(3))


def e_sequence(h: Profile, X: int, seeds: tuple[Fraction, Fraction] | None = None) -> RationalSeq:
    """Solve ``e(x+1)h(x+1) + e(x-1)h(x-1) = 2 e(x)(h(x)+1)`` for ``e(0..X)``.

    The default seeds ``e(0) = e(1) = 1`` are forced when ``h(1) == 1``: the
    vertex next to the backbone tip then has three boundary neighbours.
    """
    if seeds is None:
        if h(1) != 1:
            raise DomainError("seeds required when h(1) != 1")
        seeds = (Fraction(1), Fraction(1))
    e = [Fraction(seeds[0]), Fraction(seeds[1])][: X + 1]
    for x in range(1, X):
        hn = h(x + 1)
        if hn == 0:
            raise DegenerateProfileError(f"h({x + 1}) = 0 inside the recursion")
        e.append((2 * e[x] * (h(x) + 1) - e[x - 1] * h(x - 1)) / hn)
    return RationalSeq(e)


_cluster_cache = RationalSeq([Fraction(1), Fraction(1)])


def cluster_sequence(X: int) -> RationalSeq:
    """``e(0..X)`` for the cluster profile, memoised across calls."""
    e = _cluster_cache.values
    h = h_cluster
    while len(e) <= X:
        x = len(e) - 1
        e.append((2 * e[x] * (h(x) + 1) - e[x - 1] * h(x - 1)) / h(x + 1))
    return RationalSeq(e[: X + 1])


def boundary_weights(h: Profile, m: int, e: RationalSeq) -> dict[Vertex, Fraction]:
    """Weight ``e(m - |x|)`` on every boundary vertex of ``B_m``, listed concretely."""
    B = ClusterShape(m, h)
    return {z: e[m - abs(z[0])] for z in sorted(B.inner_boundary())}


def harmonic_by_recursion(
    h: Profile, m: int, seeds: tuple[Fraction, Fraction] | None = None
) -> tuple[RationalSeq, BoundaryMeasure]:
    if m < 1:
        raise DomainError("m must be positive")
    if h(0) != 0:
        raise DomainError("the recursion needs h(0) == 0")
    for x in range(1, m + 1):
        if h(x) == 0:
            raise DegenerateProfileError(f"h({x}) = 0 inside the shape")
    e = e_sequence(h, m, seeds)
    w = boundary_weights(h, m, e)
    return e, BoundaryMeasure(w, sum(w.values()))


def dirichlet_odometer(e: RationalSeq, h: Profile, m: int) -> dict[Vertex, Fraction]:
    """Normalised odometer ``e(x) (h(x) - y)`` in shifted quadrant coordinates."""
    return {(x, y): e[x] * (h(x) - y) for x in range(m + 1) for y in range(h(x) + 1)}


# -- cluster asymptotics -------------------------------------------------------


def matrix_A(k: int) -> tuple[tuple[int, ...], ...]:
    return (
        (0, 3 * k * k - 2 * k, -6 * k * k - 2),
        (0, 0, 3 * k * k),
        (0, 0, 0),
    )


def matrix_B(k: int) -> tuple[tuple[int, ...], ...]:
    return (
        (-3 * k * k - 2 * k, 0, 0),
        (6 * k * k + 4 * k + 2, -3 * k * k - 4 * k - 1, 0),
        (3 * k * k + 2 * k, -6 * k * k - 8 * k - 4, 3 * k * k + 6 * k + 3),
    )


E_BAR_0 = (Fraction(1), Fraction(1), Fraction(4, 3))


def matrix_recursion_step(k: int, prev: Sequence[Fraction]) -> tuple[Fraction, Fraction, Fraction]:
    """Solve ``A_k prev = B_k next`` for ``next`` by forward substitution."""
    if k < 1:
        raise DomainError("k must be at least 1")
    A, B = matrix_A(k), matrix_B(k)
    rhs = [sum((A[i][j] * Fraction(prev[j]) for j in range(3)), Fraction(0)) for i in range(3)]
    out: list[Fraction] = []
    for i in range(3):
        assert B[i][i] != 0
        acc = rhs[i] - sum((B[i][j] * out[j] for j in range(i)), Fraction(0))
        out.append(acc / B[i][i])
    return tuple(out)


def matrix_sequence(K: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    vecs = [E_BAR_0]
    for k in range(1, K + 1):
        vecs.append(matrix_recursion_step(k, vecs[-1]))
    return vecs


def bound_f0(x: int) -> Fraction:
    return Fraction(x * x + 2 * x, x * x + 2 * x + 1)


def bound_f1(x: int) -> Fraction:
    return Fraction(x * x + 3 * x, x * x + 3 * x + 2)


def bound_f2(x: int) -> Fraction:
    p = x**4 + 7 * x**3 + 17 * x**2 + 17 * x
    return Fraction(p, p + 6)


BOUNDS = (bound_f0, bound_f1, bound_f2)


def verify_monotone_bounds(X: int, start: int = 9) -> bool:
    """Check ``e~(x+1) < f~_{x mod 3}(x) * e~(x)`` for ``start <= x <= X``."""
    if X < start:
        raise DomainError(f"X must be at least {start}")
    e = cluster_sequence(X + 1)
    return all(e.normalized(x + 1) < BOUNDS[x % 3](x) * e.normalized(x) for x in range(start, X + 1))


@dataclass
class CBracket:
    """Bracket for ``lim e(x)/x``.

    ``upper`` is ``e(X)/X``, an upper bound because ``e(x)/x`` decreases.
    ``lower`` is the slope of ``e`` over the last full period
    ``(e(X) - e(X-3)) / 3``: an estimate, not a proof.
    """

    X: int
    lower: Fraction
    upper: Fraction
    below_half_from: int

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


def estimate_c(X: int) -> CBracket:
    if X < 21:
        raise DomainError("X must be at least 21")
    e = cluster_sequence(X)
    prev = e.normalized(9)
    for x in range(10, X + 1):
        cur = e.normalized(x)
        if not cur < prev:
            raise TheoremContradictionError(f"e(x)/x fails to decrease at x={x}")
        prev = cur
    half = Fraction(1, 2)
    if not all(e.normalized(x) < half for x in range(20, X + 1)):
        raise TheoremContradictionError("e(x)/x >= 1/2 for some x >= 20")
    first = next(x for x in range(1, X + 1) if e.normalized(x) < half)
    lower = (e[X] - e[X - 3]) / 3
    upper = e.normalized(X)
    if not 0 < lower <= upper:
        raise TheoremContradictionError("empty bracket for the growth constant")
    return CBracket(X, lower, upper, first)


# -- Monte Carlo ---------------------------------------------------------------


def harmonic_by_montecarlo(
    B: ClusterShape,
    samples: int,
    seed: int = 0,
    batch: int = 1 << 16,
) -> BoundaryMeasure:
    """Empirical exit distribution of ``samples`` simple random walks from the origin.

    Batches draw from independent child streams of ``seed`` and are merged in
    batch order, so results depend only on ``(samples, seed, batch)``.
    """
    if samples < 1:
        raise DomainError("samples must be at least 1")
    kind, _, ox, oy = _dense_shape(B)
    counts = np.zeros(kind.shape, dtype=np.int64)
    nbatches = -(-samples // batch)
    streams = np.random.SeedSequence(seed).spawn(nbatches)
    for b, ss in enumerate(streams):
        size = min(batch, samples - b * batch)
        _kernels.random_walk_kernel(kind, ox, oy, size, np.random.default_rng(ss), counts)
    e = {z: int(counts[z[0] + ox, z[1] + oy]) for z in sorted(B.inner_boundary())}
    out = BoundaryMeasure(e, samples)
    out.exact = False
    return out


def sigma_bound(nu: Fraction | float, samples: int) -> float:
    """Standard error of an empirical frequency with true value ``nu``."""
    p = float(nu)
    return math.sqrt(p * (1 - p) / samples)


def within_sigma(estimate: BoundaryMeasure, truth: BoundaryMeasure, k: float = 3.0) -> dict[Vertex, bool]:
    n = int(estimate.n)
    return {
        z: abs(float(estimate.nu.get(z, 0)) - float(p)) <= k * sigma_bound(p, n)
        for z, p in truth.nu.items()
    }

import random

import pytest
from hypothesis import given, settings, strategies as st

from combrotor.engine import (
    DenseAggregator,
    EngineState,
    ParticleConfig,
    RotorConfig,
    ToppleMode,
    aggregate,
    aggregate_reference,
    aggregate_shapes,
    apply_Fu,
    halfline_process,
    is_acyclic,
    rotor_walk,
    topple,
    topple_many,
    verify_odometer,
)
from combrotor.errors import (
    BudgetExceededError,
    DomainError,
    IllegalToppleError,
    InvalidRotorError,
    SinkToppleError,
)
from combrotor.formulas import halfline_odometer, u_m_table
from combrotor.geometry import ORIGIN, ClusterShape, Direction, advance, cardinality_Bm, initial_rotor

small = st.integers(min_value=-3, max_value=3)
vertex = st.tuples(small, small)


def test_rotor_config_defaults_and_validation():
    rho = RotorConfig()
    assert rho[(0, 0)] == Direction.E
    assert rho[(0, 5)] == Direction.N
    with pytest.raises(InvalidRotorError):
        rho[(1, 1)] = Direction.E


def test_topple_legal_requires_particle():
    s = EngineState()
    with pytest.raises(IllegalToppleError):
        topple(s, ORIGIN)
    topple(s, ORIGIN, ToppleMode.VIRTUAL)
    assert s.particles[ORIGIN] == -1
    assert s.particles[(0, -1)] == 1
    assert s.rotor(ORIGIN) == Direction.S


def test_topple_sink():
    s = EngineState.with_particles(1, sinks=[ORIGIN])
    with pytest.raises(SinkToppleError):
        topple(s, ORIGIN)


def test_first_particle_walk():
    s = EngineState()
    v, steps, _ = rotor_walk(s, ORIGIN, lambda w: w != ORIGIN)
    assert (v, steps) == ((0, -1), 1)


def test_rotor_walk_budget():
    s = EngineState()
    with pytest.raises(BudgetExceededError):
        rotor_walk(s, ORIGIN, lambda w: False, budget=100)


@given(st.lists(vertex, min_size=1, max_size=60))
def test_conservation_and_coherence(trace):
    s = EngineState.with_particles(3)
    for x in trace:
        topple(s, x, ToppleMode.VIRTUAL)
    assert s.particles.total() == 3
    for x, k in s.odometer.items():
        assert s.rotors[x] == advance(x, initial_rotor(x), k)


@given(st.dictionaries(vertex, st.integers(0, 30), max_size=12))
def test_block_topple_matches_literal(u):
    a = apply_Fu(EngineState.with_particles(7), u)
    b = apply_Fu(EngineState.with_particles(7), u, literal=True)
    assert a.same_as(b)


def test_topple_many_rejects_negative():
    with pytest.raises(DomainError):
        topple_many(EngineState(), ORIGIN, -1)


@settings(max_examples=50)
@given(st.lists(vertex, min_size=1, max_size=80), st.randoms(use_true_random=False))
def test_abelian_shuffle(trace, rnd):
    a = EngineState.with_particles(2)
    for x in trace:
        topple(a, x, ToppleMode.VIRTUAL)
    order = list(trace)
    rnd.shuffle(order)
    b = EngineState.with_particles(2)
    for x in order:
        topple(b, x, ToppleMode.VIRTUAL)
    assert a.same_as(b)


def test_strong_abelian_falsification_search():
    # distinct odometers with acyclic rotors on the region never give equal sigma
    rng = random.Random(1)
    region = sorted(ClusterShape(1).vertices())
    seen = {}
    for _ in range(3000):
        u = {v: rng.randrange(0, 6) for v in region}
        s = apply_Fu(EngineState.with_particles(5), u)
        if not is_acyclic(s.rotors, region):
            continue
        key = tuple(sorted(s.particles.nonzero().items()))
        prev = seen.setdefault(key, u)
        assert prev == u


def test_aggregate_small():
    a1 = aggregate(1)
    assert a1.cluster == {ORIGIN}
    assert a1.state.odometer == {}
    a5 = aggregate(5)
    assert a5.cluster == set(ClusterShape(1).vertices())
    assert a5.state.odometer == {ORIGIN: 4}


def test_aggregate_15():
    agg = aggregate(15)
    assert agg.cluster == set(ClusterShape(2).vertices())
    assert agg.state.odometer == {
        (-1, 0): 6, (-1, 1): 1, (0, -2): 2, (0, -1): 6,
        (0, 0): 23, (0, 1): 6, (0, 2): 2, (1, 0): 4,
    }
    assert agg.state.rotor(ORIGIN) == Direction.N
    assert agg.state.rotor((-1, 0)) == Direction.E


@pytest.mark.parametrize("n", [1, 2, 5, 15, 40, 123])
def test_dense_matches_reference(n):
    a = aggregate(n)
    b = aggregate_reference(n)
    assert a.settle_order == b.settle_order
    assert a.cluster == b.cluster
    assert a.steps == b.steps
    assert a.state.odometer == {v: k for v, k in b.state.odometer.items() if k}
    for v in a.state.odometer:
        assert a.state.rotor(v) == b.state.rotor(v)


def test_incremental_matches_one_shot():
    agg = DenseAggregator(1)
    for n in (1, 10, 100, 1000):
        agg.run_to(n)
    assert agg.settle_order() == aggregate(1000).settle_order
    with pytest.raises(DomainError):
        agg.run_to(5)


def test_settle_order_deterministic():
    assert aggregate(500).settle_order == aggregate(500).settle_order


def test_aggregation_budget():
    with pytest.raises(BudgetExceededError):
        aggregate(200, budget=100)


def test_half_shift():
    prev = None
    for m, agg in aggregate_shapes(range(3, 14)):
        odo = agg.odometer()
        if prev is not None:
            for x, y in set(odo) | set(prev):
                if x >= 1:
                    assert odo.get((x, y), 0) == prev.get((x - 1, y), 0)
                if x <= -1:
                    assert odo.get((x, y), 0) == prev.get((x + 1, y), 0)
        prev = odo


@pytest.mark.parametrize(
    "n, h, r, odometer",
    [(1, 1, 0, {1: 0}), (3, 2, 0, {1: 2, 2: 0}), (7, 3, 1, {1: 7, 2: 2, 3: 0})],
)
def test_halfline_examples(n, h, r, odometer):
    res = halfline_process(n)
    assert (res.h, res.r, res.odometer) == (h, r, odometer)


def test_halfline_second_particle_reaches_sink():
    # rotor at 1 starts toward 2 and is advanced first, so particle 2 is absorbed
    assert halfline_process(3).stops == [1, 0, 2]


def test_halfline_long_run():
    for n in (100, 1000, 5050, 5051):
        assert halfline_process(n).odometer == halfline_odometer(n)


def test_is_acyclic_examples():
    region = set(ClusterShape(3).vertices())
    assert is_acyclic(RotorConfig(), region)
    rho = RotorConfig()
    rho[(0, 0)] = Direction.E
    rho[(1, 0)] = Direction.W
    assert not is_acyclic(rho, region)
    assert is_acyclic(rho, region - {(1, 0)})


def test_aggregate_rotors_acyclic_on_B4():
    agg = aggregate(cardinality_Bm(4))
    assert is_acyclic(agg.state.rotors, ClusterShape(4).vertices())


@pytest.mark.parametrize("m", [3, 5, 8])
def test_verify_odometer_certifies(m):
    B = ClusterShape(m)
    v = verify_odometer(u_m_table(m), len(B))
    assert v.certified and not v.violations
    assert verify_odometer(u_m_table(m), len(B), B.interior()).certified
    assert all(line.endswith("ok") for line in v.report())


def test_verify_odometer_mutation():
    u = u_m_table(5)
    n = cardinality_Bm(5)
    rng = random.Random(0)
    for v in rng.sample(sorted(u), 20):
        bad = dict(u)
        bad[v] += 1
        verdict = verify_odometer(bad, n)
        assert not verdict.certified
        assert not (verdict.a_at_most_one and verdict.c_one_on_support)


def test_verify_odometer_zero():
    v = verify_odometer({}, 1)
    assert v.certified and v.region == set()
    # n > 1 with no toppling: sigma > 1 at the origin
    assert not verify_odometer({}, 3).a_at_most_one


def test_verify_odometer_negative():
    with pytest.raises(DomainError):
        verify_odometer({ORIGIN: -1}, 1)


def test_snapshot_round_trip():
    s = aggregate(40).state
    s.particles[(9, 9)] = -2
    text = s.to_json()
    t = EngineState.from_json(text)
    assert t.same_as(s)
    assert t.to_json() == text


def test_snapshot_version_checked():
    with pytest.raises(DomainError):
        EngineState.from_json('{"version": 99, "rotors": [], "particles": [], "odometer": []}')


def test_particle_config():
    p = ParticleConfig({(0, 0): 2, (1, 0): 0})
    assert p[(5, 5)] == 0
    assert p.nonzero() == {(0, 0): 2}
    assert p.total() == 2

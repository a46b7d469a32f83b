import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from combrotor.geometry import ClusterShape, degree, rotor_sequence
from combrotor.harmonic import WeightSystem, harmonic_psi, weight_invariance_check, weight_series


def _random_trace(region, length, rng):
    return [rng.choice(region) for _ in range(length)]


def test_constant_psi():
    region = sorted(ClusterShape(2).vertices())
    trace = _random_trace(region, 200, random.Random(0))
    psi = WeightSystem({v: Fraction(1) for v in region})
    series = weight_series(trace, psi, {(0, 0): 5})
    assert set(series) == {5}


def test_harmonic_psi_on_B2():
    B = ClusterShape(2)
    psi = harmonic_psi(B, (0, 3))
    trace = _random_trace(sorted(B.vertices()), 500, random.Random(1))
    assert weight_invariance_check(trace, psi, {(0, 0): 1})


def test_rotor_weight_recurrence():
    psi = WeightSystem({(0, 0): Fraction(3), (1, 0): Fraction(-1, 2), (0, 1): Fraction(2, 7), (2, 4): Fraction(1)})
    for x in [(0, 0), (1, 0), (0, 1), (2, 3)]:
        d = degree(x)
        seq = rotor_sequence(x)
        assert psi.rotor_weight(x, 0) == 0
        for k in range(1, 12):
            assert psi.rotor_weight(x, k) == psi.rotor_weight(x, k - 1) + psi(x) - psi(seq[k % d])
            if k >= d:
                assert psi.rotor_weight(x, k) == psi.rotor_weight(x, k - d) - d * psi.laplacian(x)


fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_random_psi_random_trace(data):
    m = data.draw(st.integers(1, 3))
    region = sorted(ClusterShape(m).vertices())
    psi = WeightSystem({v: data.draw(fractions) for v in region})
    trace = data.draw(st.lists(st.sampled_from(region), max_size=300))
    sigma0 = {(0, 0): data.draw(st.integers(0, 4))}
    assert weight_invariance_check(trace, psi, sigma0)


def test_particle_weight_alone_not_conserved():
    # the rotor term is what makes the sum invariant
    region = sorted(ClusterShape(1).vertices())
    psi = WeightSystem({v: Fraction(i + 1, 3) for i, v in enumerate(region)})
    trace = [(0, 0)] * 3
    series = weight_series(trace, psi)
    assert len(series) == 4 and len(set(series)) == 1
    wr = [psi.total_rotor_weight({(0, 0): k}) for k in range(4)]
    assert len(set(wr)) > 1

import json

import pytest
from hypothesis import given, strategies as st

from combrotor.errors import DomainError, InvalidRotorError
from combrotor.geometry import (
    ClusterShape,
    Direction,
    boundary_tips,
    cardinality_Bm,
    cardinality_branches,
    degree,
    directions,
    get_profile,
    h_cluster,
    h_square,
    initial_rotor,
    inner_boundary,
    neighbors,
    radius_for,
    rotor_successor,
    shape_contains,
    vertices_from_csv,
    vertices_from_json,
    vertices_to_csv,
    vertices_to_json,
)

coords = st.integers(min_value=-50, max_value=50)
vertices = st.tuples(coords, coords)


def test_neighbors_backbone():
    assert neighbors((0, 0)) == [(1, 0), (0, -1), (-1, 0), (0, 1)]


def test_neighbors_tooth():
    assert neighbors((2, 3)) == [(2, 2), (2, 4)]
    assert neighbors((-1, -5)) == [(-1, -6), (-1, -4)]


def test_rotor_successor_examples():
    assert rotor_successor((0, 0), Direction.E) == Direction.S
    assert rotor_successor((0, 3), Direction.N) == Direction.S
    assert rotor_successor((0, 0), Direction.N) == Direction.E


def test_rotor_successor_rejects_missing_edge():
    with pytest.raises(InvalidRotorError):
        rotor_successor((0, 2), Direction.E)


@given(vertices)
def test_full_turn_returns_to_start(v):
    for d in directions(v):
        cur = d
        for _ in range(degree(v)):
            cur = rotor_successor(v, cur)
        assert cur == d


@given(vertices)
def test_successor_visits_every_neighbour(v):
    d = initial_rotor(v)
    seen = set()
    for _ in range(degree(v)):
        d = rotor_successor(v, d)
        seen.add(d)
    assert seen == set(directions(v))


def test_initial_rotor():
    assert initial_rotor((0, 0)) == Direction.E
    assert initial_rotor((-2, 0)) == Direction.W
    assert initial_rotor((3, -2)) == Direction.S
    assert initial_rotor((3, 7)) == Direction.N


def test_shape_contains():
    B2 = ClusterShape(2)
    assert shape_contains(B2, (0, 3))
    assert not shape_contains(B2, (0, 4))
    assert shape_contains(ClusterShape(0), (0, 0))
    assert (3, 0) not in B2


def _brute_boundary(B):
    inside = set(B.vertices())
    return {v for v in inside if any(w not in inside for w in neighbors(v))}


def test_inner_boundary_examples():
    assert inner_boundary(ClusterShape(1)) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert inner_boundary(ClusterShape(0, h_cluster)) == {(0, 0)}
    assert inner_boundary(ClusterShape(2, h_square)) == {
        (2, 0), (-2, 0), (1, 1), (1, -1), (-1, 1), (-1, -1), (0, 4), (0, -4)
    }


@pytest.mark.parametrize("m", range(0, 15))
@pytest.mark.parametrize("h", [h_cluster, h_square])
def test_boundary_matches_tips(m, h):
    B = ClusterShape(m, h)
    assert inner_boundary(B) == _brute_boundary(B) == boundary_tips(B)


def test_cardinality_examples():
    assert [cardinality_Bm(m) for m in range(3)] == [1, 5, 15]
    assert cardinality_Bm(25) == 7845


@pytest.mark.parametrize("m", [0, 1, 2, 7, 25, 60])
def test_cardinality_brute_force(m):
    hm = h_cluster(m)
    B = ClusterShape(m)
    count = sum(
        1
        for x in range(-m - 1, m + 2)
        for y in range(-hm - 1, hm + 2)
        if shape_contains(B, (x, y))
    )
    assert cardinality_Bm(m) == count == cardinality_branches(m) == len(B)


def test_cardinality_increment():
    for m in range(100):
        assert cardinality_Bm(m + 1) - cardinality_Bm(m) == 2 * (h_cluster(m) + h_cluster(m + 1) + 1)


def test_radius_for():
    assert radius_for(1) == 0
    assert radius_for(5) == 1
    assert radius_for(6) == 2


def test_shape_is_symmetric():
    B = ClusterShape(7)
    verts = set(B.vertices())
    assert verts == {(-x, y) for x, y in verts} == {(x, -y) for x, y in verts}


def test_profiles_by_name(tmp_path):
    assert get_profile("cluster") is h_cluster
    assert get_profile("square") is h_square
    f = tmp_path / "p.txt"
    f.write_text("0, 1, 4 9\n")
    p = get_profile(f"file:{f}")
    assert [p(x) for x in range(4)] == [0, 1, 4, 9]
    with pytest.raises(DomainError):
        get_profile("nope")


def test_export_round_trip():
    verts = set(ClusterShape(3).vertices())
    text = vertices_to_csv(verts)
    assert text.splitlines()[0] == "x,y"
    assert vertices_from_csv(text) == verts
    assert vertices_from_json(vertices_to_json(verts)) == verts
    assert all(len(row) == 2 for row in json.loads(vertices_to_json(verts)))

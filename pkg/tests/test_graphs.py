from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import balls_isomorphic, bfs_distance, stabiliser_orbit_size

from extsaw.graphs import (
    FAMILIES,
    GrandparentGraph,
    InvalidVertexError,
    ball,
    get_family,
    reverse,
    undirected_distance,
    weight_constant,
)

ALL = sorted(FAMILIES)


@pytest.mark.parametrize("name", ALL)
def test_in_and_out_neighbours_agree(name):
    g = get_family(name)
    for v in ball(g, g.origin, 3):
        for _, u in g.out_neighbors(v):
            assert v in [x for _, x in g.in_neighbors(u)]
        for _, u in g.in_neighbors(v):
            assert v in [x for _, x in g.out_neighbors(u)]


@pytest.mark.parametrize("name", ALL)
def test_out_degree_is_bounded(name):
    g = get_family(name)
    for v in ball(g, g.origin, 3):
        assert len(g.out_neighbors(v)) <= g.max_degree
        assert len(g.in_neighbors(v)) <= g.max_degree


@pytest.mark.parametrize("name", ALL)
def test_reversal_is_an_involution(name):
    g = get_family(name)
    rg = reverse(g)
    assert reverse(rg) == g or reverse(rg) is g
    for v in ball(g, g.origin, 2):
        assert sorted(u for _, u in rg.out_neighbors(v)) == sorted(u for _, u in g.in_neighbors(v))


@pytest.mark.parametrize("name", ALL)
def test_undirected_families_are_symmetric(name):
    g = get_family(name)
    if not g.is_undirected:
        pytest.skip("directed family")
    for v in ball(g, g.origin, 3):
        assert sorted(u for _, u in g.out_neighbors(v)) == sorted(u for _, u in g.in_neighbors(v))


def test_invalid_vertices_are_rejected():
    with pytest.raises(InvalidVertexError):
        get_family("square").validate((0, 0, 0))
    with pytest.raises(InvalidVertexError):
        get_family("grandparent").validate((0, -1))


def test_unknown_family():
    with pytest.raises(KeyError):
        get_family("hexagonal")


@pytest.mark.parametrize("name", ["square", "triangular", "grandparent", "decorated-square", "ladder"])
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_astar_distance_matches_bfs(name, data):
    g = get_family(name)
    pts = sorted(ball(g, g.origin, 4), key=repr)
    u = data.draw(st.sampled_from(pts))
    v = data.draw(st.sampled_from(pts))
    assert undirected_distance(g, u, v, 20) == bfs_distance(g, u, v)


def test_grandparent_vertex_map_is_automorphism():
    g = GrandparentGraph()
    pts = sorted(ball(g, g.origin, 3), key=repr)
    for target in [(0, 0), (2, 1), (-3, 5), (1, 0)]:
        for u in pts[:10]:
            phi = g.vertex_map(u, target)
            assert phi(u) == target
            for x in ball(g, u, 2):
                assert sorted(phi(y) for _, y in g.out_neighbors(x)) == sorted(y for _, y in g.out_neighbors(phi(x)))


@pytest.mark.parametrize("name", ["square", "cubic", "triangular"])
def test_lattice_vertex_map_is_automorphism(name):
    g = get_family(name)
    phi = g.vertex_map((0,) * len(g.origin), (3,) + (1,) * (len(g.origin) - 1))
    for x in ball(g, g.origin, 2):
        assert sorted(phi(y) for _, y in g.out_neighbors(x)) == sorted(y for _, y in g.out_neighbors(phi(x)))


def test_decorated_weights_match_stabiliser_orbits():
    # M(u)/M(v) = |stab(u) v| / |stab(v) u|
    g = get_family("decorated-square")
    s0, s1 = g.representatives
    # pick a neighbour of each class to get a pair across classes
    u, v = s0, next(x for _, x in g.out_neighbors(s0) if g.class_of(x) == 1)
    ratio = Fraction(stabiliser_orbit_size(g, u, v), stabiliser_orbit_size(g, v, u))
    assert g.weight(u) / g.weight(v) == ratio
    assert weight_constant(g) == 2


def test_grandparent_weights_and_modularity():
    g = GrandparentGraph()
    assert not g.is_unimodular
    assert g.weight((3, 0)) == 8
    assert g.weight(g.shift((0, 0), 1)) == 2 * g.weight((0, 0))


@pytest.mark.parametrize("name", ["square", "grandparent", "tree3", "oriented-ladder"])
def test_transitive_families_look_alike_locally(name):
    g = get_family(name)
    far = [v for v, d in ball(g, g.origin, 3).items() if d == 3][0]
    assert balls_isomorphic(g, g.origin, far, 2)

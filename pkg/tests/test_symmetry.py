from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import bfs_distance

from extsaw import counting, extend, symmetry
from extsaw.graphs import ball, get_family, reverse
from extsaw.walks import walk_from_vertices


@pytest.fixture(scope="module")
def gp():
    return get_family("grandparent")


@pytest.fixture(scope="module")
def qg(gp):
    return symmetry.build_quasi_geodesic(gp, 20)


def _axis(W):
    sq = get_family("square")
    return sq, symmetry.build_quasi_geodesic(sq, W, phi=lambda v, k: (v[0] + k, v[1]),
                                             xi=[(1, 0), (0, 0)], zeta=[(-1, 0), (0, 0)])


@pytest.mark.parametrize("name,n", [("square", 5), ("triangular", 4), ("decorated-square", 6),
                                    ("ladder", 7), ("oriented-ladder", 8), ("tree3", 6)])
def test_mass_transport_exact(name, n):
    r = symmetry.mass_transport_check(get_family(name), n)
    assert isinstance(r.lhs, Fraction) and r.lhs == r.rhs


@pytest.mark.parametrize("name,n", [("decorated-square", 4), ("oriented-ladder", 5)])
def test_walks_ending_at_s_by_brute_force(name, n):
    # every walk ending at s starts within distance n of s
    g = get_family(name)
    r = symmetry.mass_transport_check(g, n)
    for s, _, out, inn in r.terms:
        starts = ball(g, s, n)
        brute = sum(1 for u in starts for w in counting.iter_saws(g, u, n)
                    if w.end == s and extend.forward_extendable(g, w))
        assert inn == brute
        assert out == counting.count_extendable(g, s, n, "F", method="reference")


def test_mass_transport_refuses_grandparent(gp):
    with pytest.raises(symmetry.NotUnimodularError):
        symmetry.mass_transport_check(gp, 3)
    with pytest.raises(symmetry.NotUnimodularError):
        symmetry.reverse_count_check(gp, 3)


@pytest.mark.parametrize("name", ["square", "oriented-ladder", "decorated-square", "triangular"])
def test_reversal_identity(name):
    g = get_family(name)
    for n in range(7):
        r = symmetry.reverse_count_check(g, n)
        assert r.holds
        if g.is_transitive:
            assert r.forward == r.backward_reversed


def test_forward_equals_reversed_backward_per_vertex():
    g = get_family("oriented-ladder")
    rg = reverse(g)
    for n in range(9):
        assert counting.count_extendable(g, (0, 0), n, "F") == counting.count_extendable(rg, (0, 0), n, "B")


def test_geodesic_ray_square():
    g = get_family("square")
    ray = symmetry.find_geodesic_ray(g, (0, 0), 12)
    assert len(ray) == 13
    for i in range(13):
        for j in range(i, 13):
            assert bfs_distance(g, ray[i], ray[j]) == j - i
    with pytest.raises(ValueError):
        symmetry.find_geodesic_ray(get_family("grandparent"), (0, 0), 3)


def test_loop_erase_examples():
    assert symmetry.loop_erase(list("abcbdaef"), 3) == (list("aef"), 0)
    assert symmetry.loop_erase(list("xyzyq"), 0) == (list("xyq"), 0)
    assert symmetry.loop_erase(list("pqrqst"), 5) == (list("pqst"), 3)


@settings(max_examples=50, deadline=None)
@given(steps=st.lists(st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1)]), min_size=1, max_size=60),
       zero_frac=st.floats(0, 1))
def test_loop_erase_gives_self_avoiding_path(steps, zero_frac):
    pts = [(0, 0)]
    for s in steps:
        pts.append((pts[-1][0] + s[0], pts[-1][1] + s[1]))
    zero = int(zero_frac * (len(pts) - 1))
    out, z = symmetry.loop_erase(pts, zero)
    assert len(set(out)) == len(out)
    assert 0 <= z < len(out)
    for a, b in zip(out, out[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
    assert out[0] == pts[0] and out[-1] == pts[-1]


def test_grandparent_quasi_geodesic(gp, qg):
    assert qg.alpha == Fraction(1, 2)
    assert qg.v(0) == gp.origin
    assert qg.check_edges(gp) == []
    assert qg.check_alpha(gp) is None
    # a larger alpha fails with a concrete pair
    assert qg.check_alpha(gp, Fraction(33, 64)) is not None
    for i in range(-5, 6):
        assert qg.v(i) == (i, 0)


def test_quasi_geodesic_needs_shortest_walks(gp):
    with pytest.raises(symmetry.ConstructionError):
        symmetry.build_quasi_geodesic(gp, 5, phi=gp.shift, xi=[(1, 0), (0, 1), (0, 0)], zeta=[(-1, 0), (0, 0)])


def test_decomposition_all_short_grandparent_walks(gp, qg):
    seen = set()
    for n in range(1, 7):
        for w in counting.iter_saws(gp, gp.origin, n):
            d = symmetry.decompose_walk(gp, w, qg)
            seen.add(d.case)
            assert d.certified
            if d.case == "few-plus":
                assert len(d.segments) <= len(d.s_plus)
            elif d.case == "few-minus":
                assert len(d.segments) <= len(d.s_minus)
            else:
                assert d.tail_length > d.tail_bound
    assert seen == {"few-plus", "few-minus", "many-both"}


def test_decomposition_geodesic_case_square():
    g = get_family("square")
    ray = symmetry.find_geodesic_ray(g, (0, 0), 20)
    for w in counting.sample_saws(g, (0, 0), 12, 200, seed=11):
        d = symmetry.decompose_walk(g, w, ray)
        assert d.case == "geodesic" and d.certified
        for s in d.segments:
            assert extend.backward_extendable(g, s.walk)


def test_many_both_by_hand():
    g, line = _axis(15)
    assert line.alpha == 1
    w = walk_from_vertices(g, [(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (0, 1), (-1, 1),
                               (-1, 0), (-2, 0), (-3, 0)])
    d = symmetry.decompose_walk(g, w, line, 0.3)
    assert d.case == "many-both"
    assert d.tail_length == 7 and d.tail_length > d.tail_bound
    assert d.certified


def test_decompose_rejects_bad_input(gp, qg):
    w = walk_from_vertices(gp, [(1, 0), (2, 0)])
    with pytest.raises(ValueError):
        symmetry.decompose_walk(gp, w, qg)
    with pytest.raises(ValueError):
        symmetry.decompose_walk(gp, walk_from_vertices(gp, [(0, 0)]), qg, delta=0.6)


def test_bound_inequality_small_n(gp, qg):
    for n in range(1, 7):
        r = symmetry.bound_inequality(gp, n, qg.alpha)
        assert r["holds"] and r["lhs"] == counting.count_saws(gp, gp.origin, n)

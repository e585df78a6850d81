import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from extsaw.flow import decompose_paths, max_flow
from extsaw.graphs import get_family, reverse
from extsaw.walks import (
    NotSelfAvoidingError,
    Walk,
    WalkParseError,
    check_walk,
    parse_directions,
    reverse_walk,
    to_directions,
    walk_from_vertices,
)

edges = st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(1, 3)), max_size=30)


@settings(max_examples=80, deadline=None)
@given(es=edges)
def test_max_flow_matches_networkx(es):
    es = [(a, b, c) for a, b, c in es if a != b]
    arcs = {}
    h = nx.DiGraph()
    h.add_nodes_from([0, 7])
    for a, b, c in es:
        arcs.setdefault(a, {})
        arcs[a][b] = arcs[a].get(b, 0) + c
    for a, d in arcs.items():
        for b, c in d.items():
            h.add_edge(a, b, capacity=c)
    value, flow, reach = max_flow(0, 7, lambda x: list(arcs.get(x, {}).items()))
    assert value == nx.maximum_flow_value(h, 0, 7)
    assert 7 not in reach
    for (x, y), f in flow.items():
        assert 0 <= f <= arcs[x][y]
    if value:
        assert all(p[0] == 0 and p[-1] == 7 for p in decompose_paths(flow, 0, 7))


def test_max_flow_limit_stops_early():
    arcs = {0: [(1, 1), (2, 1), (3, 1)], 1: [(9, 1)], 2: [(9, 1)], 3: [(9, 1)]}
    value, _, reach = max_flow(0, 9, lambda x: arcs.get(x, []), limit=2)
    assert value == 2 and reach is None


def test_parse_and_print_round_trip():
    g = get_family("square")
    w = parse_directions(g, "ENNWWSE")
    assert w.length == 7 and w.end == (0, 1)
    assert to_directions(g, w) == "ENNWWSE"
    check_walk(g, w)


def test_parse_errors():
    g = get_family("square")
    with pytest.raises(WalkParseError) as e:
        parse_directions(g, "ENQ")
    assert e.value.position == 2
    with pytest.raises(NotSelfAvoidingError) as e:
        parse_directions(g, "ENWS")
    assert e.value.step == 4


def test_digit_walks_on_trees():
    g = get_family("grandparent")
    w = parse_directions(g, "0312")
    assert to_directions(g, w) == "0312"
    with pytest.raises(WalkParseError):
        parse_directions(g, "5")


@settings(max_examples=40, deadline=None)
@given(text=st.text(alphabet="EWNS", max_size=12))
def test_reverse_walk_is_walk_on_reversed_graph(text):
    g = get_family("oriented-ladder")
    try:
        w = parse_directions(g, text)
    except (WalkParseError, NotSelfAvoidingError):
        return
    rw = reverse_walk(w, g)
    check_walk(reverse(g), rw)
    assert rw.vertices == tuple(reversed(w.vertices))
    assert reverse_walk(rw, reverse(g)) == w


def test_walk_helpers():
    g = get_family("square")
    w = walk_from_vertices(g, [(0, 0), (1, 0), (1, 1)])
    assert w.prefix(1) == Walk(((0, 0), (1, 0)), w.edges[:1])
    assert w.segment(1, 2).vertices == ((1, 0), (1, 1))
    with pytest.raises(ValueError):
        Walk(((0, 0),), (0,))
    with pytest.raises(ValueError):
        walk_from_vertices(g, [(0, 0), (2, 0)])

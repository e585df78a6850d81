import pytest
from hypothesis import given, settings, strategies as st

from oracles import naive_bridges, naive_count, naive_walks

from extsaw import counting
from extsaw.counting import MODES, CountOverflowError, vertex_counts
from extsaw.graphs import get_family, reverse

FAMS = ["square", "cubic", "triangular", "ladder", "decorated-square",
        "oriented-ladder", "grandparent", "tree3", "tree4"]
SMALL_N = {"square": 6, "cubic": 4, "triangular": 5, "ladder": 8, "decorated-square": 8,
           "oriented-ladder": 8, "grandparent": 5, "tree3": 7, "tree4": 6}


@pytest.mark.parametrize("name", FAMS)
def test_plain_counts_match_frozen_oracle(name, goldens):
    g = get_family(name)
    for s in g.representatives:
        want = goldens["sigma"][name][repr(s)]
        got = [r[0] for r in vertex_counts(g, s, goldens["n_max"], ("plain",))]
        assert got == want


@pytest.mark.parametrize("name", FAMS)
def test_plain_counts_match_live_oracle(name):
    g = get_family(name)
    n = min(SMALL_N[name], 5)
    for s in g.representatives:
        rows = vertex_counts(g, s, n, ("plain",))
        assert [r[0] for r in rows] == [naive_count(g, s, k) for k in range(n + 1)]


@pytest.mark.parametrize("name", FAMS)
@pytest.mark.parametrize("reversed_", [False, True])
def test_compiled_counts_match_reference(name, reversed_):
    g = get_family(name)
    if reversed_:
        g = reverse(g)
    n = SMALL_N[name]
    for s in g.representatives:
        assert vertex_counts(g, s, n) == vertex_counts(g, s, n, method="reference")


@pytest.mark.parametrize("name", ["square", "triangular", "decorated-square", "ladder"])
def test_symmetry_reduction_and_threads_do_not_change_counts(name):
    g = get_family(name)
    base = vertex_counts(g, g.origin, 9, use_symmetry=False)
    assert vertex_counts(g, g.origin, 9) == base
    assert vertex_counts(g, g.origin, 9, threads=4) == base


def test_regular_tree_formula():
    for d in (3, 4):
        g = get_family(f"tree{d}")
        rows = vertex_counts(g, g.origin, 20)
        for n, r in enumerate(rows):
            want = 1 if n == 0 else d * (d - 1) ** (n - 1)
            assert r == [want] * 4


def test_square_n14_regression(counts14):
    rows = vertex_counts(get_family("square"), (0, 0), 14)
    assert rows == counts14["square"]
    # known lattice values of sigma_14
    assert counts14["square"][14][0] == 2374444
    assert counts14["triangular"][14][0] == 1362791250
    assert counts14["cubic"][14][0] == 4468911678


def test_bridges_match_oracle(goldens):
    for d, want in goldens["bridges"].items():
        assert [counting.count_bridges(int(d), n) for n in range(len(want))] == want
    assert [counting.count_bridges(2, n) for n in range(7)] == [naive_bridges(2, n) for n in range(7)]


def test_iter_saws_order_matches_oracle():
    g = get_family("triangular")
    mine = [(w.vertices, w.edges) for w in counting.iter_saws(g, g.origin, 3)]
    assert mine == [(tuple(v), tuple(e)) for v, e in naive_walks(g, g.origin, 3)]


def test_sample_saws_are_seeded_saws():
    g = get_family("square")
    a = counting.sample_saws(g, (0, 0), 12, 50, seed=7)
    b = counting.sample_saws(g, (0, 0), 12, 50, seed=7)
    assert a == b
    assert all(w.is_self_avoiding() and w.length == 12 for w in a)


def test_errors():
    g = get_family("square")
    with pytest.raises(ValueError):
        vertex_counts(g, (0, 0), -1)
    with pytest.raises(ValueError):
        counting.parse_modes("plain,X")
    with pytest.raises(CountOverflowError):
        vertex_counts(get_family("cubic"), (0, 0, 0), 40)


def test_count_table_csv_schema():
    t = counting.count_table(get_family("square"), 2, ("plain", "F"))
    lines = t.to_csv().splitlines()
    assert lines[0] == "class,n,sigma,sigmaF,sigmaB,sigmaFB,ratioF,ratioB,ratioFB,rootN"
    assert lines[1] == "0,0,1,1,,,1,,,"
    assert lines[3] == "0,2,12,12,,,1,,,3.46410161514"


@settings(max_examples=15, deadline=None)
@given(name=st.sampled_from(["square", "triangular", "ladder", "oriented-ladder", "grandparent", "tree3"]),
       m=st.integers(0, 5), n=st.integers(0, 5))
def test_ordering_and_submultiplicativity(name, m, n):
    g = get_family(name)
    rows = vertex_counts(g, g.origin, m + n)
    for r in rows:
        plain, f, b, fb = r
        assert fb <= min(f, b) and max(f, b) <= plain
    for j in range(4):
        assert rows[m + n][j] <= rows[m][j] * rows[n][j]


@settings(max_examples=10, deadline=None)
@given(n=st.integers(0, 8))
def test_directed_and_undirected_modes_listed(n):
    rows = vertex_counts(get_family("oriented-ladder"), (0, 0), n, MODES)
    assert len(rows) == n + 1 and all(len(r) == 4 for r in rows)


def test_bridges_are_supermultiplicative():
    b = [counting.count_bridges(2, n) for n in range(13)]
    for m in range(13):
        for n in range(13 - m):
            assert b[m + n] >= b[m] * b[n]

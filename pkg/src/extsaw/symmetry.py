"""Mass transport, edge reversal, geodesics and walk decompositions.

The mass-transport and reversal checks are exact: every count is an integer
and weights are Fractions. Geodesic rays and quasi-geodesics are verified
pair by pair with undirected BFS distances, and each piece of a walk
decomposition is checked twice: by the backward-extendability oracle and by
the explicit backward extension along the (quasi-)geodesic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import counting, extend
from .graphs import GraphFamily, GrandparentGraph, UNREACHED, reverse, undirected_distance, weight_constant
from .walks import Walk, walk_from_vertices


class NotUnimodularError(ValueError):
    """The check needs a unimodular family."""


class ConstructionError(RuntimeError):
    """A (quasi-)geodesic failed verification; carries the offending pair."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


# -- mass transport and reversal -------------------------------------------

def _ending_counts(g: GraphFamily, s, n: int) -> int:
    """Forward-extendable n-step walks of g that end at s, found by reading
    the SAWs of reverse(g) from s backwards."""
    rg = reverse(g)
    total = 0
    for rw in counting.iter_saws(rg, s, n):
        w = walk_from_vertices(g, reversed(rw.vertices))
        if extend.forward_extendable(g, w):
            total += 1
    return total


@dataclass
class TransportReport:
    n: int
    lhs: Fraction
    rhs: Fraction
    terms: list  # (s, M(s), out-count, in-count)

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def as_dict(self) -> dict:
        return {"n": self.n, "lhs": str(self.lhs), "rhs": str(self.rhs), "equal": self.equal,
                "terms": [[list(s), str(m), a, b] for s, m, a, b in self.terms]}


def mass_transport_check(g: GraphFamily, n: int) -> TransportReport:
    """Both sides of the mass-transport identity for m(u, v) = number of
    n-step forward-extendable walks from u to v.

    The left side counts walks leaving each representative (compiled
    counter); the right side enumerates walks arriving at it.
    """
    if not g.is_unimodular:
        raise NotUnimodularError(f"{g.name} is not unimodular; the identity does not apply")
    if n < 0:
        raise ValueError("n must be >= 0")
    lhs = Fraction(0)
    rhs = Fraction(0)
    terms = []
    for s in g.representatives:
        m = g.weight(s)
        out = counting.count_extendable(g, s, n, "F")
        inn = _ending_counts(g, s, n)
        lhs += out / m
        rhs += inn / m
        terms.append((s, m, out, inn))
    return TransportReport(n, lhs, rhs, terms)


@dataclass
class ReversalReport:
    n: int
    forward: int  # sigma^F_n(G)
    backward_reversed: int  # sigma^B_n(reverse G)
    ratio: Fraction
    C: Fraction
    exact_required: bool

    @property
    def holds(self) -> bool:
        if self.exact_required:
            return self.ratio == 1
        return 1 / self.C <= self.ratio <= self.C

    def as_dict(self) -> dict:
        return {"n": self.n, "sigmaF_G": self.forward, "sigmaB_reversed": self.backward_reversed,
                "ratio": str(self.ratio), "C": str(self.C), "exact": self.exact_required,
                "holds": self.holds}


def reverse_count_check(g: GraphFamily, n: int) -> ReversalReport:
    """sigma^F_n(G) / sigma^B_n(reverse G), which must be 1 on transitive
    unimodular families and lie in [1/C, C] with C = c|S| otherwise."""
    if not g.is_unimodular:
        raise NotUnimodularError(f"{g.name} is not unimodular; the identity does not apply")
    f = counting.sigma_sup(g, n, "F")
    b = counting.sigma_sup(reverse(g), n, "B")
    ratio = Fraction(f, b) if b else Fraction(0 if f == 0 else math.inf)
    C = weight_constant(g) * len(g.representatives)
    return ReversalReport(n, f, b, ratio, C, g.is_transitive)


# -- geodesics ---------------------------------------------------------------

def find_geodesic_ray(g: GraphFamily, v, length: int) -> list:
    """v_0 = v, ..., v_L with distance(v_i, v_j) = |i - j| for all i, j.

    Greedy extension in neighbour order, backtracking when no neighbour
    keeps every pairwise distance exact.
    """
    if not g.is_undirected:
        raise ValueError("geodesic rays are defined here for undirected families only")
    if length < 1:
        raise ValueError("length must be >= 1")
    ray = [v]

    def fits(y):
        i = len(ray)
        return all(undirected_distance(g, ray[j], y, i - j) == i - j for j in range(i))

    def rec():
        if len(ray) == length + 1:
            return True
        for _, y in g.out_neighbors(ray[-1]):
            if y not in ray and fits(y):
                ray.append(y)
                if rec():
                    return True
                ray.pop()
        return False

    if not rec():
        raise ConstructionError(f"no geodesic of length {length} from {v!r}")
    return ray


# -- quasi-geodesics -----------------------------------------------------------

def loop_erase(seq: list, zero: int = 0) -> tuple[list, int]:
    """Erase loops from a doubly indexed window.

    ``seq[zero]`` is w_0. While some w_a = w_b with a < b, take the pair with
    |a| + |b| smallest (then the smallest a) and drop w_{a+1}, ..., w_b; if
    that loop contained w_0 the old w_a becomes the new w_0. Returns the
    self-avoiding sequence and the position of its w_0.
    """
    seq = list(seq)
    while True:
        pos = {}
        best = None
        for p, x in enumerate(seq):
            pos.setdefault(x, []).append(p)
        for ps in pos.values():
            for p, q in combinations(ps, 2):
                a, b = p - zero, q - zero
                key = (abs(a) + abs(b), a)
                if best is None or key < best[0]:
                    best = (key, p, q)
        if best is None:
            return seq, zero
        _, p, q = best
        if p <= zero <= q:
            zero = p
        elif q < zero:
            zero -= q - p
        del seq[p + 1 : q + 1]


@dataclass
class QuasiGeodesic:
    """Vertices v_i for -W <= i <= W (stored from index -W upward)."""

    vertices: list
    W: int
    alpha: Fraction
    log: dict = field(default_factory=dict)

    def v(self, i: int):
        return self.vertices[i + self.W]

    def index_of(self, x):
        try:
            return self.vertices.index(x) - self.W
        except ValueError:
            return None

    def check_edges(self, g: GraphFamily) -> list:
        """Indices i where the certified edge towards v_0 is missing."""
        bad = []
        for i in range(self.W):
            if self.v(i) not in [y for _, y in g.out_neighbors(self.v(i + 1))]:
                bad.append(i + 1)
            if self.v(-i) not in [y for _, y in g.out_neighbors(self.v(-i - 1))]:
                bad.append(-i - 1)
        return bad

    def check_alpha(self, g: GraphFamily, alpha: Fraction | None = None):
        """First pair (i, j) with d(v_i, v_j) < alpha |i - j|, or None."""
        alpha = self.alpha if alpha is None else alpha
        for i in range(-self.W, self.W + 1):
            for j in range(i + 1, self.W + 1):
                need = math.ceil(alpha * (j - i))
                d = undirected_distance(g, self.v(i), self.v(j), need)
                if d == UNREACHED:
                    continue
                if d < need:
                    return (i, j)
        return None


def grandparent_data(g: GrandparentGraph):
    """phi, xi, zeta for the grandparent graph: phi lifts one level (so
    M(phi v) = 2 M(v)), xi = [u_1, u_0] along a child edge and
    zeta = [u_-1, u_0] along a parent edge, both shortest."""
    u0 = g.origin
    phi = g.shift
    xi = [phi(u0, 1), u0]
    zeta = [phi(u0, -1), u0]
    return phi, xi, zeta


def _shortest_directed(g: GraphFamily, a, b, cap: int = 10) -> int | None:
    dist = {a: 0}
    frontier = [a]
    for d in range(1, cap + 1):
        nxt = []
        for x in frontier:
            for _, y in g.out_neighbors(x):
                if y == b:
                    return d
                if y not in dist:
                    dist[y] = d
                    nxt.append(y)
        frontier = nxt
    return None


def build_quasi_geodesic(g: GraphFamily, W: int, phi=None, xi=None, zeta=None,
                         grid: int = 64) -> QuasiGeodesic:
    """Concatenate ..., phi^-1 zeta, zeta, reversed xi, phi reversed xi, ...
    around w_0 = u_0, erase loops, and return the window -W..W with the
    largest alpha on the 1/grid lattice that passes verification."""
    if phi is None:
        if not isinstance(g, GrandparentGraph):
            raise ValueError("phi, xi and zeta are required outside the grandparent graph")
        phi, xi, zeta = grandparent_data(g)
    u0 = xi[-1]
    for walk in (xi, zeta):
        if _shortest_directed(g, walk[0], walk[-1]) != len(walk) - 1:
            raise ConstructionError("xi and zeta must be shortest directed walks")
        walk_from_vertices(g, walk)  # raises if an edge is missing
    # build generously past the window so that loop erasure settles inside it
    reps = 2 * W + 4
    right = [u0]
    xr = list(reversed(xi))
    for k in range(reps):
        right.extend(phi(x, k) for x in xr[1:])
    left = [u0]
    zr = list(reversed(zeta))
    for k in range(reps):
        left.extend(phi(x, -k) for x in zr[1:])
    seq = list(reversed(left[1:])) + right
    zero = len(left) - 1
    erased, zero = loop_erase(seq, zero)
    if zero < W or len(erased) - zero - 1 < W:
        raise ConstructionError("window too short after loop erasure")
    window = erased[zero - W : zero + W + 1]
    qg = QuasiGeodesic(window, W, Fraction(0),
                       log={"raw_length": len(seq), "erased_length": len(erased)})
    bad = qg.check_edges(g)
    if bad:
        raise ConstructionError("directed edge certificate missing", pair=(bad[0], bad[0]))
    # exact ratios d/|i-j| over the window, then the best grid value below
    worst = None
    for i in range(-W, W + 1):
        for j in range(i + 1, W + 1):
            d = undirected_distance(g, qg.v(i), qg.v(j), j - i)
            r = Fraction(d if d != UNREACHED else j - i, j - i)
            if worst is None or r < worst[0]:
                worst = (r, (i, j))
    alpha = Fraction(math.floor(min(worst[0], 1) * grid), grid)
    if alpha <= 0:
        raise ConstructionError("no positive alpha on the grid", pair=worst[1])
    qg.alpha = alpha
    qg.log["tightest_pair"] = worst[1]
    qg.log["tightest_ratio"] = str(worst[0])
    violation = qg.check_alpha(g)
    if violation is not None:
        raise ConstructionError("alpha verification failed", pair=violation)
    return qg


# -- decompositions ------------------------------------------------------------

@dataclass
class Segment:
    start: int  # index into w
    end: int  # last index kept (inclusive)
    walk: Walk
    witness: list  # backward extension, farthest vertex first
    oracle_ok: bool
    witness_ok: bool


@dataclass
class Decomposition:
    case: str  # geodesic, few-plus, few-minus, many-both
    n: int
    s_plus: list
    s_minus: list
    segments: list
    tail_length: int | None = None
    tail_bound: float | None = None

    @property
    def certified(self) -> bool:
        return all(s.oracle_ok and s.witness_ok for s in self.segments)


def _witness_ok(g, seg: Walk, back: list) -> bool:
    """Is back + seg a SAW of g?"""
    verts = list(back) + list(seg.vertices)
    if len(set(verts)) != len(verts):
        return False
    for a, b in zip(verts, verts[1:]):
        if b not in [y for _, y in g.out_neighbors(a)]:
            return False
    return True


def _segment(g, w: Walk, a: int, b: int, back: list) -> Segment:
    seg = w.segment(a, b)
    return Segment(a, b, seg, back, extend.backward_extendable(g, seg), _witness_ok(g, seg, back))


def _decompose_geodesic(g, w: Walk, ray: list) -> Decomposition:
    where = {x: i for i, x in enumerate(ray)}
    hits = [(where[x], k) for k, x in enumerate(w.vertices) if x in where]
    L, k = max(hits)
    if L + 1 >= len(ray):
        raise ValueError("geodesic ray too short for this walk")
    tail = list(reversed(ray[L + 1 :]))
    minus_verts = list(reversed(w.vertices[: k + 1]))
    w_minus = walk_from_vertices(g, minus_verts)
    segs = [
        Segment(k, 0, w_minus, tail, extend.backward_extendable(g, w_minus), _witness_ok(g, w_minus, tail)),
        _segment(g, w, k, w.length, tail),
    ]
    return Decomposition("geodesic", w.length, sorted(i for i, _ in hits), [], segs)


def _decompose_half(g, w: Walk, qg: QuasiGeodesic, positions: list, sign: int, case: str,
                    s_plus, s_minus) -> Decomposition:
    segs = []
    cuts = positions + ([w.length] if positions[-1] != w.length else [])
    for j, a in enumerate(positions):
        last = j + 1 == len(positions)
        b = cuts[j + 1] if not last else w.length
        if last and a == w.length:
            end = a  # a final segment that is a single vertex
        else:
            end = b - 1
        i = qg.index_of(w.vertices[a])
        back = [qg.v(sign * t) for t in range(qg.W, abs(i), -1)]
        segs.append(_segment(g, w, a, end, back))
    return Decomposition(case, w.length, s_plus, s_minus, segs)


def decompose_walk(g: GraphFamily, w: Walk, geo, delta: float = 0.3) -> Decomposition:
    """Split w into backward-extendable pieces along a geodesic ray (a list
    of vertices) or a QuasiGeodesic, following the three-case analysis:
    few hits on the right half, few on the left half, or many on both, in
    which case the tail from the first of the two extreme hits is kept."""
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    if isinstance(geo, QuasiGeodesic):
        v0 = geo.v(0)
    else:
        v0 = geo[0]
    if w.start != v0:
        raise ValueError(f"walk must start at {v0!r}")
    if not isinstance(geo, QuasiGeodesic):
        return _decompose_geodesic(g, w, geo)
    n = w.length
    plus, minus = [], []
    for k, x in enumerate(w.vertices):
        i = geo.index_of(x)
        if i is None:
            continue
        if abs(i) >= geo.W:
            raise ValueError("walk reaches the edge of the quasi-geodesic window")
        if i >= 0:
            plus.append(k)
        if i <= 0:
            minus.append(k)
    if len(plus) <= delta * n:
        return _decompose_half(g, w, geo, plus, 1, "few-plus", plus, minus)
    if len(minus) <= delta * n:
        return _decompose_half(g, w, geo, minus, -1, "few-minus", plus, minus)
    a = max(plus, key=lambda k: geo.index_of(w.vertices[k]))
    b = max(minus, key=lambda k: -geo.index_of(w.vertices[k]))
    m = min(a, b)
    i = geo.index_of(w.vertices[m])
    sign = 1 if m == a else -1
    back = [geo.v(sign * t) for t in range(geo.W, abs(i), -1)]
    seg = _segment(g, w, m, n, back)
    d = Decomposition("many-both", n, plus, minus, [seg])
    d.tail_length = n - m
    d.tail_bound = 2 * float(geo.alpha) * delta * n
    return d


# -- the counting inequality behind the non-unimodular case ---------------------

def _compositions(n: int, k: int):
    if k == 0:
        if n == 0:
            yield ()
        return
    for first in range(1, n - k + 2):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def bound_inequality(g: GraphFamily, n: int, alpha: Fraction, delta: float = 0.3) -> dict:
    """Left: sigma_n(v_0). Right: the two-term bound built from exact
    sigma^B and sigma counts. Returns both sides and whether left <= right."""
    v0 = g.origin
    rows = counting.vertex_counts(g, v0, n, ("plain", "B"))
    sig = [r[0] for r in rows]
    sigB = [r[2] for r in rows]
    span = math.floor(n / alpha)
    two_d = 2 * g.max_degree
    first = 0
    for k in range(0, math.floor(delta * n) + 1):
        inner = 0
        for js in _compositions(n, k):
            prod = 1
            for j in js:
                prod *= sigB[j - 1]
            inner += prod
        first += math.comb(span, k) * two_d**k * inner
    second = 0
    lo = math.ceil(2 * float(alpha) * delta * n)
    for j in range(lo, n + 1):
        second += sigB[j] * sig[n - j]
    rhs = 2 * first + 2 * span * second
    return {"n": n, "lhs": sig[n], "rhs": rhs, "holds": sig[n] <= rhs,
            "alpha": str(alpha), "delta": delta, "Delta": g.max_degree}

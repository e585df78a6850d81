"""Infinite quasi-transitive directed graphs, represented by neighbour generators.

Every family is immutable after construction. Vertices are plain tuples of
integers so they hash and sort the same way in every run. Nothing here ever
materialises the whole graph; callers grow finite balls on demand.

Neighbour order is part of each family's contract, because edge labels are
positions in that order and all enumeration orders derive from it.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Vertex = tuple

UNREACHED = math.inf


class InvalidVertexError(ValueError):
    """Raised when a tuple does not encode a vertex of the family."""


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of a family embedded in Z^d with unit axis or diagonal steps.

    ``directions`` fixes the direction index used by the kernels and by the
    direction-string parser; ``frame_axes`` lists the unbounded coordinates
    that escape regions are measured along.
    """

    dim: int
    directions: tuple[tuple[int, ...], ...]
    letters: str
    frame_axes: tuple[int, ...]
    bounded: tuple[tuple[int, int] | None, ...]

    def index_of(self, vec) -> int:
        return self.directions.index(tuple(vec))


class GraphFamily:
    """Base class. Subclasses fill in the neighbour generators."""

    name: str = "abstract"
    max_degree: int = 0
    is_undirected: bool = True
    is_unimodular: bool = True
    representatives: tuple = ()
    origin: Vertex = ()
    # Bound C on M(u)/M(v) over edges.
    edge_weight_bound: Fraction = Fraction(1)
    lattice: LatticeSpec | None = None

    def validate(self, v) -> None:
        raise NotImplementedError

    def out_neighbors(self, v) -> list[tuple[int, Vertex]]:
        raise NotImplementedError

    def in_neighbors(self, v) -> list[tuple[int, Vertex]]:
        raise NotImplementedError

    def class_of(self, v) -> int:
        self.validate(v)
        return 0

    def weight(self, v) -> Fraction:
        self.validate(v)
        return Fraction(1)

    def embedding(self, v) -> tuple[int, ...] | None:
        return None

    def distance_lower_bound(self, u, v) -> int:
        """Admissible, consistent lower bound on the undirected distance."""
        return 0

    def vertex_map(self, u, target):
        """An explicit automorphism sending u to target, when one is known."""
        return None

    @property
    def n_classes(self) -> int:
        return len(self.representatives)

    @property
    def is_transitive(self) -> bool:
        return len(self.representatives) == 1

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _check_coords(v, dim: int, name: str) -> None:
    if not isinstance(v, tuple) or len(v) != dim or not all(_is_int(c) for c in v):
        raise InvalidVertexError(f"{name}: expected a {dim}-tuple of ints, got {v!r}")


def _signed_permutations(dim: int) -> list[tuple[tuple[int, ...], ...]]:
    mats = []
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((1, -1), repeat=dim):
            rows = []
            for i in range(dim):
                row = [0] * dim
                row[perm[i]] = signs[i]
                rows.append(tuple(row))
            mats.append(tuple(rows))
    # identity first so searches prefer it
    ident = tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim))
    mats.remove(ident)
    return [ident] + mats


def _mat_vec(a, v) -> tuple[int, ...]:
    return tuple(sum(r[j] * v[j] for j in range(len(v))) for r in a)


def _mat_mul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _closure(gens) -> list:
    ident = tuple(tuple(int(i == j) for j in range(len(gens[0]))) for i in range(len(gens[0])))
    seen = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                p = _mat_mul(g, m)
                if p not in seen:
                    seen.append(p)
                    nxt.append(p)
        frontier = nxt
    return seen


class LatticeFamily(GraphFamily):
    """A family whose vertices are points of Z^d and whose edges are steps
    along ``lattice.directions``. Subclasses decide which points exist and
    which directions leave each point."""

    candidate_matrices: tuple = ()

    def _valid(self, p) -> bool:
        return True

    def out_dirs(self, p) -> tuple[int, ...]:
        return tuple(range(len(self.lattice.directions)))

    def in_dirs(self, p) -> tuple[int, ...]:
        # direction k is an in-direction at p if p + d_k -> p is an edge
        return self.out_dirs(p)

    def validate(self, v) -> None:
        _check_coords(v, self.lattice.dim, self.name)
        if not self._valid(v):
            raise InvalidVertexError(f"{self.name}: {v!r} is not a vertex")

    def step(self, p, k: int) -> Vertex:
        d = self.lattice.directions[k]
        return tuple(a + b for a, b in zip(p, d))

    def out_neighbors(self, v):
        self.validate(v)
        return [(i, self.step(v, k)) for i, k in enumerate(self.out_dirs(v))]

    def in_neighbors(self, v):
        self.validate(v)
        return [(i, self.step(v, k)) for i, k in enumerate(self.in_dirs(v))]

    def embedding(self, v):
        return v

    def distance_lower_bound(self, u, v) -> int:
        # every step moves at most one unit in L-infinity
        return max((abs(a - b) for a, b in zip(u, v)), default=0)

    # -- symmetry helpers used by kernels and subperiodicity witnesses --

    def _dir_perm(self, a) -> tuple[int, ...] | None:
        dirs = self.lattice.directions
        out = []
        for d in dirs:
            img = _mat_vec(a, d)
            if img not in dirs:
                return None
            out.append(dirs.index(img))
        return tuple(out)

    def _is_automorphism(self, a, u, target, radius: int = 4) -> bool:
        """Check p -> A(p-u)+target on a ball around u. The families are
        periodic with period <= 2, so a radius-4 check is conclusive."""
        perm = self._dir_perm(a)
        if perm is None:
            return False
        dim = self.lattice.dim
        for off in itertools.product(range(-radius, radius + 1), repeat=dim):
            p = tuple(c + o for c, o in zip(u, off))
            q = tuple(t + x for t, x in zip(target, _mat_vec(a, off)))
            if self._valid(p) != self._valid(q):
                return False
            if not self._valid(p):
                continue
            if {perm[k] for k in self.out_dirs(p)} != set(self.out_dirs(q)):
                return False
        return True

    def point_group(self, rep) -> tuple[tuple[int, ...], ...]:
        """Direction permutations of the automorphisms fixing ``rep``."""
        return _point_group(self, rep)

    def automorphism_to(self, u, target):
        """An automorphism mapping u to target, as (matrix, direction perm)."""
        for a in self.candidate_matrices:
            if self._is_automorphism(a, u, target):
                return a, self._dir_perm(a)
        return None

    def vertex_map(self, u, target):
        """An automorphism sending u to target as a vertex function, or None."""
        found = self.automorphism_to(u, target)
        if found is None:
            return None
        a = found[0]
        return lambda p: tuple(t + x for t, x in zip(target, _mat_vec(a, tuple(c - o for c, o in zip(p, u)))))


@lru_cache(maxsize=None)
def _point_group(g: LatticeFamily, rep) -> tuple[tuple[int, ...], ...]:
    perms = []
    for a in g.candidate_matrices:
        if g._is_automorphism(a, rep, rep):
            perms.append(g._dir_perm(a))
    return tuple(perms)


_AXIS2 = ((1, 0), (-1, 0), (0, 1), (0, -1))


class SquareLattice(LatticeFamily):
    """Z^2. Neighbour order E, W, N, S."""

    name = "square"
    max_degree = 4
    representatives = ((0, 0),)
    origin = (0, 0)
    lattice = LatticeSpec(2, _AXIS2, "EWNS", (0, 1), (None, None))
    candidate_matrices = tuple(_signed_permutations(2))


class CubicLattice(LatticeFamily):
    """Z^3. Neighbour order E, W, N, S, U, D (+x, -x, +y, -y, +z, -z)."""

    name = "cubic"
    max_degree = 6
    representatives = ((0, 0, 0),)
    origin = (0, 0, 0)
    lattice = LatticeSpec(
        3,
        ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)),
        "EWNSUD",
        (0, 1, 2),
        (None, None, None),
    )
    candidate_matrices = tuple(_signed_permutations(3))


class TriangularLattice(LatticeFamily):
    """Triangular lattice in axial coordinates: Z^2 plus the (1,1) diagonal.

    Neighbour order E, W, N, S, P(+1,+1), M(-1,-1).
    """

    name = "triangular"
    max_degree = 6
    representatives = ((0, 0),)
    origin = (0, 0)
    lattice = LatticeSpec(2, _AXIS2 + ((1, 1), (-1, -1)), "EWNSPM", (0, 1), (None, None))
    # rotation by 60 degrees and the swap of axes generate the 12 symmetries
    candidate_matrices = tuple(_closure([((1, -1), (1, 0)), ((0, 1), (1, 0))]))

    def distance_lower_bound(self, u, v) -> int:
        dx, dy = v[0] - u[0], v[1] - u[1]
        return max(abs(dx), abs(dy), abs(dx - dy))


class Ladder(LatticeFamily):
    """Z x {0,1}. Neighbour order E, W, then the rung."""

    name = "ladder"
    max_degree = 3
    representatives = ((0, 0),)
    origin = (0, 0)
    lattice = LatticeSpec(2, _AXIS2, "EWNS", (0,), (None, (0, 1)))
    candidate_matrices = tuple(_signed_permutations(2))

    def _valid(self, p) -> bool:
        return p[1] in (0, 1)

    def out_dirs(self, p):
        return (0, 1, 2) if p[1] == 0 else (0, 1, 3)


class OrientedLadder(LatticeFamily):
    """Ladder whose rail 0 points east and rail 1 points west; rungs go both
    ways. Transitive (a half-turn swaps the rails) and unimodular.

    Out-neighbour order: along the rail, then the rung.
    """

    name = "oriented-ladder"
    max_degree = 2
    is_undirected = False
    representatives = ((0, 0),)
    origin = (0, 0)
    lattice = LatticeSpec(2, _AXIS2, "EWNS", (0,), (None, (0, 1)))
    candidate_matrices = tuple(_signed_permutations(2))

    def _valid(self, p) -> bool:
        return p[1] in (0, 1)

    def out_dirs(self, p):
        return (0, 2) if p[1] == 0 else (1, 3)

    def in_dirs(self, p):
        # (x,0) is entered from (x-1,0) and (x,1); (x,1) from (x+1,1) and (x,0)
        return (1, 2) if p[1] == 0 else (0, 3)


class DecoratedSquare(LatticeFamily):
    """Z^2 with a degree-2 vertex on every edge, in doubled coordinates.

    Points with both coordinates odd do not exist. (even, even) points are
    the original vertices (class 0); the rest are edge midpoints (class 1).
    Stabiliser orbits give M(original) = 2 M(midpoint); we scale so the
    original class has weight 1.
    """

    name = "decorated-square"
    max_degree = 4
    representatives = ((0, 0), (1, 0))
    origin = (0, 0)
    lattice = LatticeSpec(2, _AXIS2, "EWNS", (0, 1), (None, None))
    candidate_matrices = tuple(_signed_permutations(2))
    edge_weight_bound = Fraction(2)

    def _valid(self, p) -> bool:
        return not (p[0] % 2 and p[1] % 2)

    def out_dirs(self, p):
        if p[0] % 2:
            return (0, 1)
        if p[1] % 2:
            return (2, 3)
        return (0, 1, 2, 3)

    def class_of(self, v) -> int:
        self.validate(v)
        return 0 if (v[0] % 2 == 0 and v[1] % 2 == 0) else 1

    def weight(self, v) -> Fraction:
        return Fraction(1) if self.class_of(v) == 0 else Fraction(1, 2)


class RegularTree(GraphFamily):
    """The infinite d-regular tree.

    A vertex is the tuple of child indices read from the root ``()``. The
    root has children 0..d-1, every other vertex has children 0..d-2.
    Neighbour order: parent first (if any), then children in index order.
    """

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("RegularTree needs d >= 2")
        self.d = d
        self.name = f"tree{d}"
        self.max_degree = d
        self.representatives = ((),)
        self.origin = ()

    def __eq__(self, other):
        return isinstance(other, RegularTree) and other.d == self.d

    def __hash__(self):
        return hash(("RegularTree", self.d))

    def validate(self, v) -> None:
        if not isinstance(v, tuple) or not all(_is_int(c) for c in v):
            raise InvalidVertexError(f"{self.name}: bad address {v!r}")
        if v and not 0 <= v[0] < self.d:
            raise InvalidVertexError(f"{self.name}: bad address {v!r}")
        if any(not 0 <= c < self.d - 1 for c in v[1:]):
            raise InvalidVertexError(f"{self.name}: bad address {v!r}")

    def out_neighbors(self, v):
        self.validate(v)
        nbrs = [] if not v else [v[:-1]]
        k = self.d if not v else self.d - 1
        nbrs.extend(v + (i,) for i in range(k))
        return list(enumerate(nbrs))

    in_neighbors = out_neighbors

    def distance_lower_bound(self, u, v) -> int:
        return abs(len(u) - len(v))


class GrandparentGraph(GraphFamily):
    """3-regular tree with a fixed end xi, plus an edge from every vertex to
    its grandparent (the vertex two steps towards xi).

    A vertex is ``(level, word)``. ``word`` is a non-negative int read in
    binary: each bit is a left/right choice made while descending from the
    backbone. Word 0 is the backbone vertex at that level; leading zero bits
    vanish automatically, which makes the encoding canonical. Levels increase
    towards xi.

    Out-neighbour order: parent, child 0, child 1, grandparent.
    In-neighbour order: parent, child 0, child 1, then the four grandchildren.
    Tree edges go both ways, grandparent edges only upwards, so out-degree is
    4 and in-degree 7. The level shift phi(l, w) = (l+1, w) is an
    automorphism, and M(v) = 2**level.
    """

    name = "grandparent"
    max_degree = 7
    is_undirected = False
    is_unimodular = False
    representatives = ((0, 0),)
    origin = (0, 0)
    edge_weight_bound = Fraction(4)
    modular_constant = 2

    def validate(self, v) -> None:
        if not (isinstance(v, tuple) and len(v) == 2 and _is_int(v[0]) and _is_int(v[1])) or v[1] < 0:
            raise InvalidVertexError(f"grandparent: expected (level, word>=0), got {v!r}")

    @staticmethod
    def parent(v):
        return (v[0] + 1, v[1] >> 1)

    @staticmethod
    def child(v, b: int):
        return (v[0] - 1, 2 * v[1] + b)

    @staticmethod
    def shift(v, k: int = 1):
        return (v[0] + k, v[1])

    @staticmethod
    def is_descendant(x, c) -> bool:
        """True if x lies in the subtree hanging below c (c included)."""
        if x[0] > c[0]:
            return False
        return (x[1] >> (c[0] - x[0])) == c[1]

    def out_neighbors(self, v):
        self.validate(v)
        p = self.parent(v)
        return [(0, p), (1, self.child(v, 0)), (2, self.child(v, 1)), (3, self.parent(p))]

    def in_neighbors(self, v):
        self.validate(v)
        c0, c1 = self.child(v, 0), self.child(v, 1)
        gc = [self.child(c0, 0), self.child(c0, 1), self.child(c1, 0), self.child(c1, 1)]
        return list(enumerate([self.parent(v), c0, c1] + gc))

    def weight(self, v) -> Fraction:
        self.validate(v)
        return Fraction(self.modular_constant) ** v[0]

    @staticmethod
    def _to_origin(x):
        # swap the two children of every vertex on each level where x's
        # ancestry turns right, then shift x's level to 0
        lx, wx = x

        def f(y):
            ly, wy = y
            mask = wx >> (ly - lx) if ly >= lx else wx << (lx - ly)
            return (ly - lx, wy ^ mask)

        def inv(y):
            ly, wy = y[0] + lx, y[1]
            mask = wx >> (ly - lx) if ly >= lx else wx << (lx - ly)
            return (ly, wy ^ mask)

        return f, inv

    def vertex_map(self, u, target):
        """An automorphism sending u to target (the graph is transitive)."""
        fu, _ = self._to_origin(u)
        _, gt = self._to_origin(target)
        return lambda y: gt(fu(y))

    def distance_lower_bound(self, u, v) -> int:
        return (abs(u[0] - v[0]) + 1) // 2


class ReversedGraph(GraphFamily):
    """G with every edge reversed. Classes, weights and Delta are shared."""

    def __init__(self, base: GraphFamily):
        self.base = base
        self.name = base.name + "~"
        self.max_degree = base.max_degree
        self.is_undirected = base.is_undirected
        self.is_unimodular = base.is_unimodular
        self.representatives = base.representatives
        self.origin = base.origin
        self.edge_weight_bound = base.edge_weight_bound
        self.lattice = base.lattice

    def __eq__(self, other):
        return isinstance(other, ReversedGraph) and other.base == self.base

    def __hash__(self):
        return hash(("ReversedGraph", self.base))

    def validate(self, v):
        self.base.validate(v)

    def out_neighbors(self, v):
        return self.base.in_neighbors(v)

    def in_neighbors(self, v):
        return self.base.out_neighbors(v)

    def class_of(self, v):
        return self.base.class_of(v)

    def weight(self, v):
        return self.base.weight(v)

    def embedding(self, v):
        return self.base.embedding(v)

    def distance_lower_bound(self, u, v):
        return self.base.distance_lower_bound(u, v)

    # lattice helpers, swapped
    def out_dirs(self, p):
        return self.base.in_dirs(p)

    def in_dirs(self, p):
        return self.base.out_dirs(p)

    def _valid(self, p):
        return self.base._valid(p)

    def point_group(self, rep):
        return self.base.point_group(rep)

    def step(self, p, k: int):
        return self.base.step(p, k)

    def automorphism_to(self, u, target):
        # automorphisms of G are automorphisms of its reversal
        return self.base.automorphism_to(u, target)

    def vertex_map(self, u, target):
        return self.base.vertex_map(u, target)


def reverse(g: GraphFamily) -> GraphFamily:
    if isinstance(g, ReversedGraph):
        return g.base
    return ReversedGraph(g)


def is_lattice(g: GraphFamily) -> bool:
    return g.lattice is not None


FAMILIES = {
    "square": SquareLattice,
    "cubic": CubicLattice,
    "triangular": TriangularLattice,
    "ladder": Ladder,
    "tree3": lambda: RegularTree(3),
    "tree4": lambda: RegularTree(4),
    "decorated-square": DecoratedSquare,
    "grandparent": GrandparentGraph,
    "oriented-ladder": OrientedLadder,
}


@lru_cache(maxsize=None)
def get_family(name: str) -> GraphFamily:
    try:
        return FAMILIES[name]()
    except KeyError:
        raise KeyError(f"unknown graph family {name!r}; choose from {', '.join(FAMILIES)}") from None


def undirected_neighbors(g: GraphFamily, v) -> list:
    seen = {}
    for _, u in g.out_neighbors(v):
        seen.setdefault(u, None)
    for _, u in g.in_neighbors(v):
        seen.setdefault(u, None)
    return list(seen)


def ball(g: GraphFamily, center, radius: int, directed: bool = False) -> dict:
    """Vertices within ``radius`` of center, mapped to their distance.

    With ``directed`` only out-edges are followed.
    """
    dist = {center: 0}
    frontier = [center]
    for r in range(1, radius + 1):
        nxt = []
        for v in frontier:
            nb = [u for _, u in g.out_neighbors(v)] if directed else undirected_neighbors(g, v)
            for u in nb:
                if u not in dist:
                    dist[u] = r
                    nxt.append(u)
        frontier = nxt
    return dist


def undirected_distance(g: GraphFamily, u, v, cap: int):
    """Shortest path length ignoring orientation, or UNREACHED if above cap.

    A* with the family's admissible lower bound; with the trivial bound this
    is plain BFS.
    """
    if cap < 0:
        raise ValueError("cap must be >= 0")
    if u == v:
        return 0
    h0 = g.distance_lower_bound(u, v)
    if h0 > cap:
        return UNREACHED
    best = {u: 0}
    tie = itertools.count()
    heap = [(h0, next(tie), 0, u)]
    while heap:
        f, _, d, x = heapq.heappop(heap)
        if f > cap:
            return UNREACHED
        if x == v:
            return d
        if d > best.get(x, math.inf):
            continue
        for y in undirected_neighbors(g, x):
            nd = d + 1
            if nd < best.get(y, math.inf):
                best[y] = nd
                fy = nd + g.distance_lower_bound(y, v)
                if fy <= cap:
                    heapq.heappush(heap, (fy, next(tie), nd, y))
    return UNREACHED


def weight(g: GraphFamily, v) -> Fraction:
    return g.weight(v)


def weight_constant(g: GraphFamily) -> Fraction:
    """c = max M(s)/M(s') over pairs of representatives."""
    ws = [g.weight(s) for s in g.representatives]
    return max(ws) / min(ws)

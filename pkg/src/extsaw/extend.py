"""Deciding whether a finite SAW extends to an infinite one.

Three exact oracles (forward, backward, doubly) plus ``extendable_by``, a
brute-force finite-extension search used to cross-check them.

Lattice families work inside an escape region: the walk's bounding box grown
by a margin along the unbounded axes. A flood fill (or a two-path max-flow
for the doubly extendable case) that reaches the frame of the region proves
extendability, since from the first frame vertex hit the path can continue
along the ray it crossed the box in; rays from distinct frame vertices never
meet. Conversely every infinite extension has to cross the frame.

Trees decide locally. On the grandparent graph a child subtree of the end
vertex that the walk never touches gives an infinite escape down that
subtree; such a child always exists (a subtree below v can only be entered
through v), but the check is still made per walk.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .flow import decompose_paths, max_flow
from .graphs import GraphFamily, GrandparentGraph, RegularTree, ReversedGraph, reverse
from .walks import Walk, reverse_walk

SAFE_MARGIN = 2
SAFE_MARGIN_FB = 3
SIDES = ("F", "B", "both")


class UnsupportedFamilyError(ValueError):
    """The family has no extendability oracle."""


class UndecidedError(RuntimeError):
    """No certificate either way (never expected on the built-in families)."""


@dataclass(frozen=True)
class EscapeRegion:
    """Bounding box of a walk along ``axes``, grown by ``margin``.

    A vertex is inside when it is within margin-1 of the box on every frame
    axis; the frame is everything else reachable in one step.
    """

    lo: tuple
    hi: tuple
    axes: tuple
    margin: int

    def inside(self, p) -> bool:
        m = self.margin - 1
        return all(self.lo[i] - m <= p[a] <= self.hi[i] + m for i, a in enumerate(self.axes))

    def in_box(self, p) -> bool:
        return all(self.lo[i] <= p[a] <= self.hi[i] for i, a in enumerate(self.axes))


def escape_region(g: GraphFamily, w: Walk, margin: int) -> EscapeRegion:
    if margin < 1:
        raise ValueError("margin must be >= 1")
    axes = g.lattice.frame_axes
    pts = [g.embedding(v) for v in w.vertices]
    lo = tuple(min(p[a] for p in pts) for a in axes)
    hi = tuple(max(p[a] for p in pts) for a in axes)
    return EscapeRegion(lo, hi, axes, margin)


@dataclass
class Verdict:
    """An oracle answer with its certificate.

    ``witness`` holds escape paths (vertex lists) when extendable; otherwise
    ``blocking`` holds the set of vertices the escape search could reach.
    """

    extendable: bool
    witness: list = field(default_factory=list)
    blocking: frozenset | None = None


def _kind(g: GraphFamily) -> str:
    b = g.base if isinstance(g, ReversedGraph) else g
    if b.lattice is not None:
        return "lattice"
    if isinstance(b, RegularTree):
        return "tree"
    if isinstance(b, GrandparentGraph):
        return "grandparent"
    raise UnsupportedFamilyError(f"no extendability oracle for {g.name}")


# -- lattice flood fills ---------------------------------------------------

def _flood(nbrs, src, blocked, region):
    """BFS from src avoiding blocked; return (path to frame or None, seen)."""
    parent = {src: None}
    q = deque([src])
    while q:
        x = q.popleft()
        for _, y in nbrs(x):
            if y in blocked or y in parent:
                continue
            parent[y] = x
            if not region.inside(y):
                path = [y]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1], frozenset(parent)
            q.append(y)
    return None, frozenset(parent)


def _lattice_single(g, w, forward: bool) -> Verdict:
    region = escape_region(g, w, SAFE_MARGIN)
    src = w.end if forward else w.start
    blocked = set(w.vertices) - {src}
    nbrs = g.out_neighbors if forward else g.in_neighbors
    path, seen = _flood(nbrs, src, blocked, region)
    if path is None:
        return Verdict(False, blocking=seen)
    return Verdict(True, witness=[path])


def _lattice_double_undirected(g, w) -> Verdict:
    """Two vertex-disjoint escapes, one from each end, via unit-capacity flow."""
    region = escape_region(g, w, SAFE_MARGIN_FB)
    on_walk = set(w.vertices)
    s, e = w.start, w.end
    src, sink = ("src",), ("sink",)

    def arcs(node):
        if node == src:
            return [((s, 0), 1), ((e, 0), 1)] if s != e else [((s, 0), 2)]
        x, side = node[0], node[1]
        if side == 0:
            if not region.inside(x):
                return [(sink, 1)]
            return [((x, 1), 2 if (x == s == e) else 1)]
        out = []
        for _, y in g.out_neighbors(x):
            if y not in on_walk:
                out.append(((y, 0), 1))
        return out

    value, flow, reach = max_flow(src, sink, arcs, limit=2)
    if value < 2:
        cut = frozenset(n[0] for n in reach if n not in (src, sink))
        return Verdict(False, blocking=cut)
    paths = []
    for p in decompose_paths(flow, src, sink):
        verts = []
        for node in p[1:-1]:
            if not verts or verts[-1] != node[0]:
                verts.append(node[0])
        paths.append(verts)
    # report the backward escape first, read towards the start
    paths.sort(key=lambda p: p[0] != s)
    return Verdict(True, witness=paths)


def _simple_paths_to_frame(nbrs, src, blocked, region):
    """All simple paths from src that stop at their first frame vertex."""
    path = [src]
    used = set(blocked) | {src}

    def rec():
        x = path[-1]
        for _, y in nbrs(x):
            if y in used:
                continue
            path.append(y)
            if not region.inside(y):
                yield list(path)
            else:
                used.add(y)
                yield from rec()
                used.discard(y)
            path.pop()

    yield from rec()


def _lattice_double_directed(g, w) -> Verdict:
    """Directed case: the two sides use different edge directions, so search
    forward escape paths one by one and flood the backward side around each."""
    region = escape_region(g, w, SAFE_MARGIN_FB)
    on_walk = set(w.vertices)
    s, e = w.start, w.end
    seen_any = set()
    for fpath in _simple_paths_to_frame(g.out_neighbors, e, on_walk - {e}, region):
        seen_any.update(fpath)
        blocked = (on_walk | set(fpath)) - {s}
        if s == e:
            blocked = on_walk | set(fpath[1:])
            blocked.discard(s)
        bpath, _ = _flood(g.in_neighbors, s, blocked, region)
        if bpath is not None:
            return Verdict(True, witness=[bpath, fpath])
    return Verdict(False, blocking=frozenset(seen_any))


# -- trees and the grandparent graph ---------------------------------------

def _tree_single(g, w, forward: bool) -> Verdict:
    src = w.end if forward else w.start
    on_walk = set(w.vertices)
    nbrs = g.out_neighbors(src) if forward else g.in_neighbors(src)
    free = [y for _, y in nbrs if y not in on_walk]
    if free:
        return Verdict(True, witness=[[src, free[0]]])
    return Verdict(False, blocking=frozenset([src]))


def _tree_double(g, w) -> Verdict:
    on_walk = set(w.vertices)
    if w.length == 0:
        free = [y for _, y in g.out_neighbors(w.start) if y not in on_walk]
        if len(free) >= 2:
            return Verdict(True, witness=[[w.start, free[0]], [w.start, free[1]]])
        return Verdict(False, blocking=frozenset([w.start]))
    b = _tree_single(g, w, False)
    f = _tree_single(g, w, True)
    # branches hanging off different vertices of a tree path are disjoint
    if b.extendable and f.extendable:
        return Verdict(True, witness=b.witness + f.witness)
    return Verdict(False, blocking=(b.blocking or frozenset()) | (f.blocking or frozenset()))


def _free_children(gp: GrandparentGraph, v, on_walk) -> list:
    out = []
    for bit in (0, 1):
        c = gp.child(v, bit)
        if not any(gp.is_descendant(x, c) for x in on_walk):
            out.append(c)
    return out


def _gp_single(g, w, forward: bool) -> Verdict:
    gp = g.base if isinstance(g, ReversedGraph) else g
    src = w.end if forward else w.start
    free = _free_children(gp, src, w.vertices)
    if not free:
        raise UndecidedError(f"no free child subtree at {src!r}")
    return Verdict(True, witness=[[src, free[0]]])


def _gp_double(g, w) -> Verdict:
    gp = g.base if isinstance(g, ReversedGraph) else g
    if w.length == 0:
        free = _free_children(gp, w.start, w.vertices)
        if len(free) < 2:
            raise UndecidedError("fewer than two free child subtrees")
        return Verdict(True, witness=[[w.start, free[0]], [w.start, free[1]]])
    # subtrees below children of two different walk vertices that both avoid
    # the walk cannot overlap (neither contains the other's root's parent)
    b = _gp_single(g, w, False)
    f = _gp_single(g, w, True)
    return Verdict(True, witness=b.witness + f.witness)


# -- public oracles --------------------------------------------------------

def _verdict(g: GraphFamily, w: Walk, mode: str) -> Verdict:
    kind = _kind(g)
    if kind == "lattice":
        if mode == "F":
            return _lattice_single(g, w, True)
        if mode == "B":
            return _lattice_single(g, w, False)
        if g.is_undirected:
            return _lattice_double_undirected(g, w)
        return _lattice_double_directed(g, w)
    if kind == "tree":
        if mode == "FB":
            return _tree_double(g, w)
        return _tree_single(g, w, mode == "F")
    if mode == "FB":
        return _gp_double(g, w)
    return _gp_single(g, w, mode == "F")


def forward_extendable(g: GraphFamily, w: Walk) -> bool:
    """Is w the initial segment of a singly infinite SAW?"""
    return _verdict(g, w, "F").extendable


def backward_extendable(g: GraphFamily, w: Walk) -> bool:
    """Is w the final segment of a SAW coming in from infinity?"""
    return _verdict(g, w, "B").extendable


def doubly_extendable(g: GraphFamily, w: Walk) -> bool:
    """Does w sit inside some doubly infinite SAW?"""
    return _verdict(g, w, "FB").extendable


def classify(g: GraphFamily, w: Walk) -> dict[str, Verdict]:
    """Verdicts with certificates for all three modes."""
    return {m: _verdict(g, w, m) for m in ("F", "B", "FB")}


def is_extendable(g: GraphFamily, w: Walk, mode: str) -> bool:
    if mode == "plain":
        return True
    if mode not in ("F", "B", "FB"):
        raise ValueError(f"unknown mode {mode!r}")
    return _verdict(g, w, mode).extendable


# -- finite extension search -----------------------------------------------

def _reach_at_least(nbrs, src, blocked, k: int) -> bool:
    """Can at least k vertices outside blocked be reached from src?"""
    if k <= 0:
        return True
    seen = {src}
    q = deque([src])
    found = 0
    while q:
        x = q.popleft()
        for _, y in nbrs(x):
            if y in blocked or y in seen:
                continue
            seen.add(y)
            found += 1
            if found >= k:
                return True
            q.append(y)
    return False


def _extend(nbrs, tip, k: int, used: set, accept=None) -> bool:
    """Depth-first search for a k-step self-avoiding path from tip avoiding
    ``used``. ``accept(path_vertices)`` can veto a complete path; it is also
    used as a prune hook with the partial path."""
    path = []

    def rec(x, left):
        if left == 0:
            return accept is None or accept(path, True)
        if not _reach_at_least(nbrs, x, used, left):
            return False
        if accept is not None and not accept(path, False):
            return False
        for _, y in nbrs(x):
            if y in used:
                continue
            used.add(y)
            path.append(y)
            if rec(y, left - 1):
                used.discard(y)
                path.pop()
                return True
            used.discard(y)
            path.pop()
        return False

    return rec(tip, k)


def extendable_by(g: GraphFamily, w: Walk, k: int, side: str = "F") -> bool:
    """Does w extend by k more steps on the given side(s)?

    ``side`` is "F" (append at the end), "B" (prepend at the start, along
    in-edges) or "both" (one extension each way, mutually disjoint).
    Exhaustive search; exponential in k in the worst case.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    if k == 0:
        return True
    used = set(w.vertices)
    if side == "F":
        return _extend(g.out_neighbors, w.end, k, used)
    if side == "B":
        return _extend(g.in_neighbors, w.start, k, used)

    s = w.start

    def accept(fpath, complete):
        if complete:
            return _extend(g.in_neighbors, s, k, used)
        # prune: the backward side still needs k free vertices
        return _reach_at_least(g.in_neighbors, s, used, k)

    return _extend(g.out_neighbors, w.end, k, used, accept)


def sufficient_extension_length(g: GraphFamily, w: Walk) -> int:
    """K with: exact oracle(w) <=> extendable_by(w, K) for every side.

    On lattices K = (number of box vertices off the walk) + 1: a trapped
    escape stays inside the walk's bounding box (a vertex beyond the box
    would see an open ray), so it has fewer than K vertices to use; and K
    steps that leave the box continue along rays.
    """
    kind = _kind(g)
    if kind != "lattice":
        return 1
    lat = g.lattice
    region = escape_region(g, w, 1)
    ranges = []
    for a in range(lat.dim):
        if a in region.axes:
            i = region.axes.index(a)
            ranges.append(range(region.lo[i], region.hi[i] + 1))
        else:
            lo, hi = lat.bounded[a]
            ranges.append(range(lo, hi + 1))
    on_walk = set(w.vertices)
    base = g.base if isinstance(g, ReversedGraph) else g
    free = sum(1 for p in itertools.product(*ranges) if base._valid(p) and p not in on_walk)
    return free + 1


def reversed_walk_on(g: GraphFamily, w: Walk) -> tuple[GraphFamily, Walk]:
    """(reverse(g), reversal of w): F on one side is B on the other."""
    return reverse(g), reverse_walk(w, g)

"""Depth-truncated SAW trees.

A node of T(v) is a SAW from v; its children are the one-step extensions.
Trees are stored as flat arrays with parents listed before children, which
is all the level-wise algorithms in ``treedim`` need.

Dump format (``dump_tree``): one line per node, ``id parent level label
vertex`` with parent -1 at the root and vertex written without spaces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels, extend
from .counting import SAFE_MARGIN, SAFE_MARGIN_FB, lattice_window
from .graphs import GraphFamily, RegularTree, ReversedGraph
from .walks import Walk

DEFAULT_BUDGET = 10_000_000
TREE_MODES = ("plain", "F", "B", "FB")


class TreeBudgetError(MemoryError):
    """The truncated tree would exceed the node budget."""


class TruncatedTree:
    """Arena-stored rooted tree.

    ``parent[i] < i`` for every non-root node, ``level`` is the depth,
    ``label`` the out-edge label of the last step (for the root of a joined
    tree's subtrees it is the subtree index) and ``vertices[i]`` the endpoint
    of the walk. ``level_offset`` is 1 for joined trees, so that the edges
    leaving the added root carry capacity 1 in flow computations.
    """

    def __init__(self, parent, level, label, vertices, depth: int, level_offset: int = 0,
                 name: str = ""):
        self.parent = np.asarray(parent, dtype=np.int64)
        self.level = np.asarray(level, dtype=np.int64)
        self.label = np.asarray(label, dtype=np.int64)
        self.vertices = vertices if isinstance(vertices, _ReplayVertices) else list(vertices)
        self.depth = int(depth)
        self.level_offset = level_offset
        self.name = name

    def __len__(self) -> int:
        return self.parent.shape[0]

    @cached_property
    def level_sizes(self) -> np.ndarray:
        """|W_n| for n = 0..depth (exact integers)."""
        return np.bincount(self.level, minlength=self.depth + 1)[: self.depth + 1]

    @cached_property
    def _children(self):
        kids = np.argsort(self.parent[1:], kind="stable") + 1
        ptr = np.searchsorted(self.parent[kids], np.arange(len(self) + 1))
        return ptr, kids

    def children(self, i: int) -> np.ndarray:
        ptr, kids = self._children
        return kids[ptr[i] : ptr[i + 1]]

    def n_children(self) -> np.ndarray:
        return np.bincount(self.parent[1:], minlength=len(self))

    def path(self, i: int) -> list[int]:
        out = [i]
        while self.parent[out[-1]] >= 0:
            out.append(int(self.parent[out[-1]]))
        return out[::-1]

    def walk(self, i: int) -> Walk:
        """The SAW a node stands for (inside its T(s) for joined trees)."""
        nodes = [j for j in self.path(i) if self.vertices[j] is not None]
        verts = tuple(self.vertices[j] for j in nodes)
        labels = tuple(int(self.label[j]) for j in nodes[1:])
        return Walk(verts, labels)

    def subtree_nodes(self, i: int) -> np.ndarray:
        out = [i]
        k = 0
        while k < len(out):
            out.extend(int(c) for c in self.children(out[k]))
            k += 1
        return np.array(out, dtype=np.int64)

    def subtree(self, i: int) -> "TruncatedTree":
        """T^w: the subtree at node i, re-rooted (levels start at 0)."""
        nodes = self.subtree_nodes(i)
        return _restrict(self, nodes, self.level[i], self.depth - int(self.level[i]), 0)

    def keep(self, mask) -> "TruncatedTree":
        """Sub-tree of nodes with mask true whose ancestors are all kept."""
        mask = np.asarray(mask, dtype=bool).copy()
        for i in range(1, len(self)):
            if mask[i] and not mask[self.parent[i]]:
                mask[i] = False
        if not mask[0]:
            raise ValueError("the root must be kept")
        nodes = np.nonzero(mask)[0]
        return _restrict(self, nodes, 0, self.depth, self.level_offset)

    def node_set(self) -> set:
        """Nodes as tuples of vertex sequences; handy for set comparisons."""
        out = set()
        seqs = [None] * len(self)
        for i in range(len(self)):
            p = self.parent[i]
            seqs[i] = (self.vertices[i],) if p < 0 else seqs[p] + (self.vertices[i],)
            out.add(seqs[i])
        return out


class _ReplayVertices:
    """Endpoint lookup by replaying edge labels from the root; saves
    materialising millions of tuples for big regular trees."""

    def __init__(self, g, root, parent, label):
        self.g, self.root, self.parent, self.label = g, root, parent, label

    def __len__(self):
        return len(self.parent)

    def __getitem__(self, i):
        chain = []
        while self.parent[i] >= 0:
            chain.append(int(self.label[i]))
            i = int(self.parent[i])
        v = self.root
        for lab in reversed(chain):
            v = self.g.out_neighbors(v)[lab][1]
        return v

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def _restrict(t: TruncatedTree, nodes: np.ndarray, base_level: int, depth: int, offset: int):
    index = np.full(len(t), -1, dtype=np.int64)
    index[nodes] = np.arange(len(nodes))
    par = t.parent[nodes]
    newpar = np.where(par >= 0, index[np.maximum(par, 0)], -1)
    newpar[0] = -1
    return TruncatedTree(newpar, t.level[nodes] - base_level, t.label[nodes],
                         [t.vertices[j] for j in nodes], depth, offset, t.name)


def dump_tree(t: TruncatedTree, fh) -> None:
    for i in range(len(t)):
        v = t.vertices[i]
        vid = "o" if v is None else ",".join(str(x) for x in v) if isinstance(v, tuple) else str(v)
        fh.write(f"{i} {int(t.parent[i])} {int(t.level[i])} {int(t.label[i])} ({vid})\n")


# -- builders ---------------------------------------------------------------

def _lattice_tree(g, v, depth, mode, budget):
    win = lattice_window(g, tuple(v), depth + SAFE_MARGIN_FB + 1)
    parent, direc, cells, flags, count = _kernels.lattice_tree(
        depth, win.cell(v), win.off, win.outmask, win.inmask, win.coords, win.frame_axes,
        mode == "F", mode == "B", mode == "FB", bool(g.is_undirected),
        SAFE_MARGIN, SAFE_MARGIN_FB, budget)
    if count < 0:
        raise TreeBudgetError(f"SAW tree of depth {depth} on {g.name} exceeds {budget} nodes")
    level = np.zeros(count, dtype=np.int64)
    for i in range(1, count):
        level[i] = level[parent[i]] + 1
    verts = list(map(tuple, win.coords[cells].tolist()))
    # direction index -> out-edge label at the parent
    labels = np.full(count, -1, dtype=np.int64)
    table = {}
    for i in range(1, count):
        p = verts[parent[i]]
        key = (p, int(direc[i]))
        if key not in table:
            table[key] = g.out_dirs(p).index(int(direc[i]))
        labels[i] = table[key]
    t = TruncatedTree(parent, level, labels, verts, depth, 0, g.name)
    if mode == "plain":
        return t
    bit = {"F": 1, "B": 2, "FB": 4}[mode]
    return t.keep((flags & bit) != 0)


def _regular_tree_root(g: RegularTree, depth, budget):
    # from the root every step moves away from it: labels 0..d-1 first, then
    # 1..d-1 (label 0 is the way back)
    total = 1 + sum(g.d * (g.d - 1) ** (n - 1) for n in range(1, depth + 1))
    if total > budget:
        raise TreeBudgetError(f"SAW tree of depth {depth} on {g.name} exceeds {budget} nodes")
    parent = [np.array([-1])]
    label = [np.array([-1])]
    level = [np.array([0])]
    prev = np.array([0])
    start = 1
    for n in range(1, depth + 1):
        labs = np.arange(g.d) if n == 1 else np.arange(1, g.d)
        par = np.repeat(prev, len(labs))
        parent.append(par)
        label.append(np.tile(labs, len(prev)))
        level.append(np.full(len(par), n))
        prev = np.arange(start, start + len(par))
        start += len(par)
    parent = np.concatenate(parent)
    label = np.concatenate(label)
    verts = _ReplayVertices(g, (), parent, label)
    return TruncatedTree(parent, np.concatenate(level), label, verts, depth, 0, g.name)


def _generic_tree(g, v, depth, mode, budget):
    parent, level, label, verts = [-1], [0], [-1], [v]
    path = [v]
    labels = []
    on = {v}

    def ok():
        if mode == "plain":
            return True
        return extend.is_extendable(g, Walk(tuple(path), tuple(labels)), mode)

    if not ok():
        raise ValueError(f"the trivial walk at {v!r} is not {mode}-extendable")

    def rec(node, d):
        if d == depth:
            return
        for lab, y in g.out_neighbors(path[-1]):
            if y in on:
                continue
            path.append(y)
            labels.append(lab)
            on.add(y)
            if ok():
                if len(parent) >= budget:
                    raise TreeBudgetError(f"SAW tree of depth {depth} on {g.name} exceeds {budget} nodes")
                idx = len(parent)
                parent.append(node)
                level.append(d + 1)
                label.append(lab)
                verts.append(y)
                rec(idx, d + 1)
            on.discard(y)
            labels.pop()
            path.pop()

    rec(0, 0)
    return TruncatedTree(parent, level, label, verts, depth, 0, g.name)


def build_saw_tree(g: GraphFamily, v, depth: int, mode: str = "plain",
                   budget: int = DEFAULT_BUDGET) -> TruncatedTree:
    """T(v) truncated at ``depth``; with a mode, only walks passing that
    extendability oracle (F: forward tree, B: backward tree, FB: doubly
    extendable tree)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if mode not in TREE_MODES:
        raise ValueError(f"mode must be one of {TREE_MODES}")
    g.validate(v)
    base = g.base if isinstance(g, ReversedGraph) else g
    if base.lattice is not None and (mode != "FB" or g.is_undirected):
        return _lattice_tree(g, v, depth, mode, budget)
    if isinstance(g, RegularTree) and v == () and mode == "plain":
        return _regular_tree_root(g, depth, budget)
    return _generic_tree(g, v, depth, mode, budget)


def build_forward_saw_tree(g: GraphFamily, v, depth: int, budget: int = DEFAULT_BUDGET):
    return build_saw_tree(g, v, depth, "F", budget)


def build_backward_saw_tree(g: GraphFamily, v, depth: int, budget: int = DEFAULT_BUDGET):
    return build_saw_tree(g, v, depth, "B", budget)


def build_doubly_saw_tree(g: GraphFamily, v, depth: int, budget: int = DEFAULT_BUDGET):
    return build_saw_tree(g, v, depth, "FB", budget)


def prune_finite_bushes(t: TruncatedTree, oracle) -> TruncatedTree:
    """Keep the nodes the oracle marks as having an infinite subtree.

    ``oracle`` is a boolean array over nodes or a function of the node's
    walk. Descendants of removed nodes go too.
    """
    if callable(oracle):
        mask = np.array([True if t.vertices[i] is None else bool(oracle(t.walk(i)))
                         for i in range(len(t))])
    else:
        mask = np.asarray(oracle, dtype=bool)
    return t.keep(mask)


def join_trees(ts: list) -> TruncatedTree:
    """Attach the roots of ``ts`` to a new root o; the old roots sit at
    level 1."""
    if not ts:
        raise ValueError("need at least one tree")
    parent, level, label, verts = [np.array([-1])], [np.array([0])], [np.array([-1])], [None]
    off = 1
    for k, t in enumerate(ts):
        p = t.parent + off
        p[0] = 0
        parent.append(p)
        level.append(t.level + 1)
        lab = t.label.copy()
        lab[0] = k
        label.append(lab)
        verts.extend(t.vertices)
        off += len(t)
    depth = max(t.depth for t in ts) + 1
    name = "join(" + ",".join(t.name for t in ts) + ")"
    return TruncatedTree(np.concatenate(parent), np.concatenate(level), np.concatenate(label),
                         verts, depth, 1, name)


def joined_saw_tree(g: GraphFamily, depth: int, mode: str = "plain",
                    budget: int = DEFAULT_BUDGET) -> TruncatedTree:
    """The tree o joined to T(s) for each class representative s, with
    total depth ``depth`` (so each T(s) is cut at depth-1)."""
    if depth < 1:
        raise ValueError("a joined tree needs depth >= 1")
    return join_trees([build_saw_tree(g, s, depth - 1, mode, budget) for s in g.representatives])


# -- subperiodicity witness ----------------------------------------------------

@dataclass
class SubperiodicReport:
    """Outcome of the bounded-depth embedding check T^w -> T^{w'}.

    ``results`` holds (node, target node, depth checked, status) with status
    "verified" or "inconclusive"; a failed search is never a disproof.
    """

    checked: int = 0
    verified: int = 0
    inconclusive: int = 0
    min_depth_verified: int | None = None
    results: list = field(default_factory=list)


def _map_by_automorphism(t, w, wp, phi, child_of) -> bool:
    image = {int(w): int(wp)}
    for node in t.subtree_nodes(w)[1:]:
        ip = image[int(t.parent[node])]
        c = child_of.get((ip, phi(t.vertices[node])))
        if c is None:
            return False
        image[int(node)] = c
    return True


def _greedy_embed(t, a, b, sizes) -> bool:
    ka = sorted(t.children(a), key=lambda i: -sizes[i])
    kb = sorted(t.children(b), key=lambda i: -sizes[i])
    if len(ka) > len(kb):
        return False
    return all(_greedy_embed(t, x, y, sizes) for x, y in zip(ka, kb))


def _subtree_sizes(t):
    sizes = np.ones(len(t), dtype=np.int64)
    for i in range(len(t) - 1, 0, -1):
        sizes[t.parent[i]] += sizes[i]
    return sizes


def check_subperiodic_witness(g: GraphFamily, t: TruncatedTree, samples: int = 50,
                              seed: int = 0) -> SubperiodicReport:
    """For sampled nodes w find w' with |w'| <= 1 and an injective
    level-preserving map T^w -> T^{w'} on the truncation.

    Where the family offers an explicit automorphism (lattices, the
    grandparent graph) the extensions of w are carried over by the
    automorphism sending w's endpoint to the endpoint of w'; otherwise a
    greedy child matching is tried.
    """
    rng = random.Random(seed)
    nodes = list(range(len(t)))
    picked = nodes if len(nodes) <= samples else [0] + rng.sample(nodes[1:], samples - 1)
    shallow = [i for i in nodes if t.level[i] <= 1 and t.vertices[i] is not None]
    child_of = None
    sizes = None
    report = SubperiodicReport()
    for w in picked:
        report.checked += 1
        d = t.depth - int(t.level[w])
        if t.level[w] <= 1:
            # w itself has |w| <= 1
            report.verified += 1
            report.results.append((w, w, d, "verified"))
            report.min_depth_verified = d if report.min_depth_verified is None else min(report.min_depth_verified, d)
            continue
        x = t.vertices[w]
        status = "inconclusive"
        target = w
        for wp in shallow:
            if t.depth - int(t.level[wp]) < d:
                continue
            phi = g.vertex_map(x, t.vertices[wp])
            if phi is not None:
                if child_of is None:
                    child_of = {(int(t.parent[i]), t.vertices[i]): i for i in range(1, len(t))}
                ok = _map_by_automorphism(t, w, wp, phi, child_of)
            else:
                if sizes is None:
                    sizes = _subtree_sizes(t)
                ok = _greedy_embed(t, w, wp, sizes)
            if ok:
                status, target = "verified", wp
                break
        if status == "verified":
            report.verified += 1
            report.min_depth_verified = d if report.min_depth_verified is None else min(report.min_depth_verified, d)
        else:
            report.inconclusive += 1
        report.results.append((w, target, d, status))
    return report

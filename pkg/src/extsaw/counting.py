"""Exact counting and streaming enumeration of self-avoiding walks.

Lattice families and the grandparent graph are counted by compiled
depth-first kernels; regular trees by a memoised recursion over isomorphic
subtrees. Everything else, and every cross-check, can use the plain Python
enumerator ``iter_saws``.

Parallel runs split the walks by their first k steps and add the partial
counts, so results never depend on the thread count.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .graphs import GraphFamily, GrandparentGraph, RegularTree, ReversedGraph
from .walks import Walk, walk_from_vertices

MODES = ("plain", "F", "B", "FB")
COUNT_LIMIT = 2**127 - 1
_KERNEL_LIMIT = 2**62
SAFE_MARGIN = 2
SAFE_MARGIN_FB = 3


class CountOverflowError(ArithmeticError):
    """A count left the checked 128-bit range."""


class UnsupportedFamilyError(ValueError):
    """The family has no extendability oracle (or no kernel for the request)."""


def _checked(x: int) -> int:
    x = int(x)
    if x > COUNT_LIMIT:
        raise CountOverflowError(f"count {x} exceeds 2**127-1")
    return x


def _base(g: GraphFamily) -> GraphFamily:
    return g.base if isinstance(g, ReversedGraph) else g


def parse_modes(modes) -> tuple[str, ...]:
    if isinstance(modes, str):
        modes = [m.strip() for m in modes.split(",") if m.strip()]
    out = []
    for m in modes:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}; expected a subset of {','.join(MODES)}")
        if m not in out:
            out.append(m)
    return tuple(sorted(out, key=MODES.index))


# --------------------------------------------------------------------------
# plain Python enumeration


def iter_saws(g: GraphFamily, v, n: int, prefix: tuple = ()):
    """Yield every n-step SAW from v in edge-label order.

    ``prefix`` restricts to walks whose first labels equal it.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    g.validate(v)
    verts = [v]
    labels: list[int] = []
    seen = {v}
    for lab in prefix[:n]:
        nbrs = g.out_neighbors(verts[-1])
        if lab >= len(nbrs) or nbrs[lab][1] in seen:
            return
        verts.append(nbrs[lab][1])
        labels.append(lab)
        seen.add(nbrs[lab][1])
    def rec():
        if len(labels) == n:
            yield Walk(tuple(verts), tuple(labels))
            return
        for lab, u in g.out_neighbors(verts[-1]):
            if u in seen:
                continue
            verts.append(u)
            labels.append(lab)
            seen.add(u)
            yield from rec()
            verts.pop()
            labels.pop()
            seen.remove(u)

    yield from rec()


def _partition_length(branching: int, threads: int, n: int) -> int:
    k = 0
    while branching**k < 4 * threads and k < n:
        k += 1
    return k


def enumerate_saws(g: GraphFamily, v, n: int, visitor, threads: int = 1) -> int:
    """Call ``visitor(walk)`` once per n-step SAW from v, in label order.

    With threads > 1 the partitions are collected concurrently and replayed
    to the visitor in partition order, so the visit sequence is identical to
    the serial one. Exceptions raised by the visitor propagate.
    """
    if threads <= 1:
        count = 0
        for w in iter_saws(g, v, n):
            visitor(w)
            count += 1
        return count
    k = _partition_length(g.max_degree, threads, n)
    prefixes = list(itertools.product(range(g.max_degree), repeat=k))
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda p: list(iter_saws(g, v, n, prefix=p)), prefixes))
    count = 0
    for part in parts:
        for w in part:
            visitor(w)
            count += 1
    return count


# --------------------------------------------------------------------------
# compiled engines


@dataclass(frozen=True)
class LatticeWindow:
    lo: tuple
    shape: tuple
    strides: tuple
    off: np.ndarray
    outmask: np.ndarray
    inmask: np.ndarray
    coords: np.ndarray
    frame_axes: np.ndarray

    def cell(self, p) -> int:
        return int(sum((c - l) * s for c, l, s in zip(p, self.lo, self.strides)))

    def vertex(self, cell: int) -> tuple:
        return tuple(int(x) for x in self.coords[cell])


@lru_cache(maxsize=64)
def lattice_window(g: GraphFamily, center: tuple, radius: int) -> LatticeWindow:
    """Occupancy-grid view of the ball of L-infinity radius ``radius``."""
    lat = g.lattice
    lo, hi = [], []
    for a in range(lat.dim):
        if lat.bounded[a] is None:
            lo.append(center[a] - radius)
            hi.append(center[a] + radius)
        else:
            lo.append(lat.bounded[a][0])
            hi.append(lat.bounded[a][1])
    shape = tuple(h - l + 1 for l, h in zip(lo, hi))
    strides = []
    acc = 1
    for s in reversed(shape):
        strides.append(acc)
        acc *= s
    strides = tuple(reversed(strides))
    grids = np.meshgrid(*[np.arange(l, h + 1) for l, h in zip(lo, hi)], indexing="ij")
    coords = np.stack([x.ravel() for x in grids], axis=1).astype(np.int64)
    ncell = coords.shape[0]
    outmask = np.zeros(ncell, dtype=np.int64)
    inmask = np.zeros(ncell, dtype=np.int64)
    dirs = lat.directions

    def inwin(q):
        return all(l <= x <= h for x, l, h in zip(q, lo, hi))

    for i in range(ncell):
        p = tuple(int(x) for x in coords[i])
        if not g._valid(p):
            continue
        om = 0
        for k in g.out_dirs(p):
            if inwin(tuple(a + b for a, b in zip(p, dirs[k]))):
                om |= 1 << k
        im = 0
        for k in g.in_dirs(p):
            if inwin(tuple(a + b for a, b in zip(p, dirs[k]))):
                im |= 1 << k
        outmask[i] = om
        inmask[i] = im
    off = np.array([sum(d[a] * strides[a] for a in range(lat.dim)) for d in dirs], dtype=np.int64)
    return LatticeWindow(tuple(lo), shape, strides, off, outmask, inmask, coords,
                         np.array(lat.frame_axes, dtype=np.int64))


@dataclass(frozen=True)
class CsrWindow:
    vertices: tuple
    index: dict
    indptr: np.ndarray
    indices: np.ndarray
    level: np.ndarray
    word: np.ndarray


def csr_window(g: GraphFamily, v, radius: int) -> CsrWindow:
    """Explicit out-ball of radius ``radius`` around v; edges leaving the
    ball are stored as -1 and never followed."""
    order = [v]
    index = {v: 0}
    frontier = [v]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for _, y in g.out_neighbors(x):
                if y not in index:
                    index[y] = len(order)
                    order.append(y)
                    nxt.append(y)
        frontier = nxt
    indptr = [0]
    indices = []
    for x in order:
        for _, y in g.out_neighbors(x):
            indices.append(index.get(y, -1))
        indptr.append(len(indices))
    if isinstance(_base(g), GrandparentGraph):
        level = np.array([x[0] for x in order], dtype=np.int64)
        word = np.array([x[1] for x in order], dtype=np.int64)
    else:
        level = np.zeros(len(order), dtype=np.int64)
        word = np.zeros(len(order), dtype=np.int64)
    return CsrWindow(tuple(order), index, np.array(indptr, dtype=np.int64),
                     np.array(indices, dtype=np.int64), level, word)


def _run(fn, prefixes, threads):
    if threads <= 1 or len(prefixes) <= 1:
        parts = [fn(p) for p in prefixes]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(fn, prefixes))
    total = parts[0].copy()
    for p in parts[1:]:
        total += p
    return total


def _split(call, n_max, branching, threads):
    """Run ``call(prefix, n)`` over prefix partitions and add the results."""
    k = _partition_length(branching, threads, n_max + 1) if threads > 1 else 0
    k = min(k, n_max)
    if k == 0:
        return call(np.zeros(0, dtype=np.int64), n_max)
    short = call(np.zeros(0, dtype=np.int64), k - 1)
    prefixes = [np.array(p, dtype=np.int64) for p in itertools.product(range(branching), repeat=k)]
    long = _run(lambda p: call(p, n_max), prefixes, threads)
    long[:k] += short
    return long


def _lattice_counts(g, v, n_max, modes, threads, use_symmetry):
    win = lattice_window(g, tuple(v), n_max + SAFE_MARGIN_FB + 1)
    if use_symmetry:
        perms = np.array(g.point_group(tuple(v)), dtype=np.int64)
    else:
        perms = np.arange(len(g.lattice.directions), dtype=np.int64)[None, :]
    want = np.array([True, "F" in modes, "B" in modes, "FB" in modes], dtype=np.bool_)
    start = win.cell(v)

    def call(prefix, n):
        return _kernels.count_lattice(prefix, n, start, win.off, win.outmask, win.inmask,
                                      win.coords, win.frame_axes, perms, want,
                                      bool(g.is_undirected), SAFE_MARGIN, SAFE_MARGIN_FB)

    return _split(call, n_max, len(g.lattice.directions), threads)


def _csr_counts(g, v, n_max, modes, threads):
    win = csr_window(g, v, n_max)
    cert = isinstance(_base(g), GrandparentGraph)
    want = np.array([True, "F" in modes, "B" in modes, "FB" in modes], dtype=np.bool_)

    def call(prefix, n):
        return _kernels.count_csr(prefix, n, 0, win.indptr, win.indices, win.level, win.word, want, cert)

    return _split(call, n_max, g.max_degree, threads)


def _tree_counts(g: RegularTree, v, n_max, modes):
    from . import extend

    # All SAWs of a given length from v are equivalent under automorphisms
    # fixing v, so one representative walk decides the extendability modes.
    plain = [1] + [g.d * (g.d - 1) ** (n - 1) for n in range(1, n_max + 1)]
    rows = []
    verts = [v]
    prev = None
    for n in range(n_max + 1):
        if n > 0:
            nxt = next(u for _, u in g.out_neighbors(verts[-1]) if u != prev)
            prev = verts[-1]
            verts.append(nxt)
        rep = walk_from_vertices(g, verts)
        row = [plain[n], 0, 0, 0]
        if "F" in modes:
            row[1] = plain[n] if extend.forward_extendable(g, rep) else 0
        if "B" in modes:
            row[2] = plain[n] if extend.backward_extendable(g, rep) else 0
        if "FB" in modes:
            row[3] = plain[n] if extend.doubly_extendable(g, rep) else 0
        rows.append([_checked(x) for x in row])
    return rows


def _reference_counts(g, v, n_max, modes):
    from . import extend

    rows = []
    for n in range(n_max + 1):
        row = [0, 0, 0, 0]
        for w in iter_saws(g, v, n):
            row[0] += 1
            if "F" in modes and extend.forward_extendable(g, w):
                row[1] += 1
            if "B" in modes and extend.backward_extendable(g, w):
                row[2] += 1
            if "FB" in modes and extend.doubly_extendable(g, w):
                row[3] += 1
        rows.append(row)
    return rows


def supports_extendability(g: GraphFamily) -> bool:
    b = _base(g)
    return b.lattice is not None or isinstance(b, (RegularTree, GrandparentGraph))


def vertex_counts(g: GraphFamily, v, n_max: int, modes=MODES, threads: int = 1,
                  method: str = "auto", use_symmetry: bool = True) -> list[list[int]]:
    """Counts for every length 0..n_max: rows of [plain, F, B, FB].

    Modes that were not requested are reported as 0. ``method`` is "auto"
    (compiled engines) or "reference" (Python enumeration plus the exact
    oracles of ``extend``).
    """
    if n_max < 0:
        raise ValueError("n must be >= 0")
    modes = parse_modes(modes)
    g.validate(v)
    ext = [m for m in modes if m != "plain"]
    if ext and not supports_extendability(g):
        raise UnsupportedFamilyError(f"no extendability oracle for {g.name}")
    if method == "reference":
        return _reference_counts(g, v, n_max, modes)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    b = _base(g)
    if isinstance(b, RegularTree):
        return _tree_counts(b, v, n_max, modes)
    dmax = g.max_degree
    if n_max > 0 and dmax * (dmax - 1) ** (n_max - 1) >= _KERNEL_LIMIT:
        raise CountOverflowError(f"n={n_max} is beyond the 64-bit kernel range for {g.name}")
    if b.lattice is not None:
        kernel_modes = modes
        directed_fb = "FB" in modes and not g.is_undirected
        if directed_fb:
            kernel_modes = tuple(m for m in modes if m != "FB")
        arr = _lattice_counts(g, v, n_max, kernel_modes, threads, use_symmetry)
        rows = [[_checked(x) for x in r] for r in arr.tolist()]
        if directed_fb:
            ref = _reference_counts(g, v, n_max, ("FB",))
            for r, q in zip(rows, ref):
                r[3] = q[3]
        return rows
    arr = _csr_counts(g, v, n_max, modes, threads)
    return [[_checked(x) for x in r] for r in arr.tolist()]


def count_saws(g: GraphFamily, v, n: int, threads: int = 1, method: str = "auto") -> int:
    """sigma_n(v): the number of n-step SAWs from v."""
    return vertex_counts(g, v, n, ("plain",), threads, method)[n][0]


def count_extendable(g: GraphFamily, v, n: int, mode: str, threads: int = 1, method: str = "auto") -> int:
    """Number of n-step SAWs from v that are F, B or FB extendable.

    Complete walks are filtered; prefixes are never pruned by extendability.
    """
    if mode not in ("F", "B", "FB"):
        raise ValueError("mode must be F, B or FB")
    return vertex_counts(g, v, n, (mode,), threads, method)[n][MODES.index(mode)]


def sigma_sup(g: GraphFamily, n: int, mode: str = "plain", threads: int = 1) -> int:
    """sup over v of sigma_n(v): the maximum over class representatives."""
    return max(vertex_counts(g, s, n, (mode,), threads)[n][MODES.index(mode)] for s in g.representatives)


def count_bridges(d: int, n: int) -> int:
    """Number of n-step bridges on Z^d.

    Convention (Hammersley and Welsh): a SAW w is a bridge if
    w_0[0] < w_i[0] <= w_n[0] for every 1 <= i <= n, i.e. the first
    coordinate is strictly above its starting value after the first step and
    never exceeds its final value. The 0-step walk counts as a bridge.
    """
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    if n < 0:
        raise ValueError("n must be >= 0")
    steps = [tuple(s * (i == a) for i in range(d)) for a in range(d) for s in (1, -1)]
    origin = (0,) * d

    def rec(p, left, seen, top):
        if left == 0:
            return 1 if p[0] == top else 0
        total = 0
        for s in steps:
            q = tuple(a + b for a, b in zip(p, s))
            if q[0] <= 0 or q in seen:
                continue
            seen.add(q)
            total += rec(q, left - 1, seen, max(top, q[0]))
            seen.remove(q)
        return total

    return rec(origin, n, {origin}, 0) if n else 1


def sample_saws(g: GraphFamily, v, n: int, count: int, seed: int) -> list[Walk]:
    """Uniform samples of n-step SAWs by rejection of non-reversing walks."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        verts = [v]
        labels = []
        seen = {v}
        ok = True
        for _ in range(n):
            nbrs = g.out_neighbors(verts[-1])
            if len(verts) > 1:
                nbrs = [(lab, u) for lab, u in nbrs if u != verts[-2]]
            lab, u = nbrs[rng.randrange(len(nbrs))]
            if u in seen:
                ok = False
                break
            verts.append(u)
            labels.append(lab)
            seen.add(u)
        if ok:
            out.append(Walk(tuple(verts), tuple(labels)))
    return out


# --------------------------------------------------------------------------
# tables


def _fmt(x: float) -> str:
    return format(x, ".12g")


@dataclass
class CountTable:
    graph: str
    n_max: int
    modes: tuple
    rows: list = field(default_factory=list)  # (class, n, sigma, F, B, FB)

    def counts(self, cls: int, mode: str) -> list[int | None]:
        j = 2 + MODES.index(mode)
        return [r[j] for r in self.rows if r[0] == cls]

    def _cells(self, r):
        cls, n, s, f, b, fb = r
        ratio = lambda x: "" if x is None or s == 0 else _fmt(x / s)
        root = "" if n == 0 else _fmt(math.exp(math.log(s) / n)) if s > 0 else _fmt(0.0)
        show = lambda x: "" if x is None else str(x)
        return [str(cls), str(n), show(s), show(f), show(b), show(fb), ratio(f), ratio(b), ratio(fb), root]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "n", "sigma", "sigmaF", "sigmaB", "sigmaFB", "ratioF", "ratioB", "ratioFB", "rootN"])
        for r in self.rows:
            w.writerow(self._cells(r))
        return buf.getvalue()

    def to_dict(self) -> dict:
        keys = ["class", "n", "sigma", "sigmaF", "sigmaB", "sigmaFB", "ratioF", "ratioB", "ratioFB", "rootN"]
        out = []
        for r in self.rows:
            cells = self._cells(r)
            d = dict(zip(keys[:6], [r[0], r[1], r[2], r[3], r[4], r[5]]))
            d.update({k: (float(c) if c else None) for k, c in zip(keys[6:], cells[6:])})
            out.append(d)
        return {"graph": self.graph, "n_max": self.n_max, "modes": list(self.modes), "rows": out}


def count_table(g: GraphFamily, n_max: int, modes=MODES, threads: int = 1) -> CountTable:
    modes = parse_modes(modes)
    if "plain" not in modes:
        modes = ("plain",) + modes
    table = CountTable(g.name, n_max, modes)
    for cls, s in enumerate(g.representatives):
        rows = vertex_counts(g, s, n_max, modes, threads)
        for n, r in enumerate(rows):
            vals = [r[MODES.index(m)] if m in modes else None for m in MODES]
            table.rows.append((cls, n, *vals))
    return table


def table_json(table: CountTable, meta: dict) -> str:
    payload = {"version": 1, **table.to_dict(), **meta}
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"

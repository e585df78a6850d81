"""The Walk value type, direction-string parsing and walk reversal."""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import GraphFamily, reverse


class WalkParseError(ValueError):
    def __init__(self, position: int, char: str, message: str | None = None):
        self.position = position
        self.char = char
        super().__init__(message or f"cannot parse {char!r} at position {position}")


class NotSelfAvoidingError(ValueError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"not a SAW at step {step}")


@dataclass(frozen=True)
class Walk:
    """A directed walk: n+1 vertices and the n out-edge labels between them."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ValueError("a walk has one more vertex than edges")

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def is_self_avoiding(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)

    def prefix(self, k: int) -> "Walk":
        return Walk(self.vertices[: k + 1], self.edges[:k])

    def segment(self, a: int, b: int) -> "Walk":
        """Sub-walk from vertex index a to vertex index b (inclusive)."""
        return Walk(self.vertices[a : b + 1], self.edges[a:b])


def label_of(g: GraphFamily, u, v) -> int:
    for lab, x in g.out_neighbors(u):
        if x == v:
            return lab
    raise ValueError(f"no edge {u!r} -> {v!r} in {g.name}")


def walk_from_vertices(g: GraphFamily, vertices) -> Walk:
    """Build a SAW from its vertex sequence (the built-ins have no parallel edges)."""
    vertices = tuple(vertices)
    seen = set()
    for i, v in enumerate(vertices):
        g.validate(v)
        if v in seen:
            raise NotSelfAvoidingError(i)
        seen.add(v)
    labels = tuple(label_of(g, vertices[i], vertices[i + 1]) for i in range(len(vertices) - 1))
    return Walk(vertices, labels)


def check_walk(g: GraphFamily, w: Walk) -> None:
    """Raise unless w is a valid SAW on g."""
    if not w.is_self_avoiding():
        seen = set()
        for i, v in enumerate(w.vertices):
            if v in seen:
                raise NotSelfAvoidingError(i)
            seen.add(v)
    for i, lab in enumerate(w.edges):
        nbrs = g.out_neighbors(w.vertices[i])
        if not (0 <= lab < len(nbrs)) or nbrs[lab][1] != w.vertices[i + 1]:
            raise ValueError(f"edge {i} of the walk is not an out-edge of {g.name}")


def reverse_walk(w: Walk, g: GraphFamily) -> Walk:
    """The reversal of a walk on g, read as a walk on reverse(g)."""
    return walk_from_vertices(reverse(g), reversed(w.vertices))


def parse_directions(g: GraphFamily, text: str, start=None) -> Walk:
    """Read a walk from a direction string.

    Lattices use their direction letters (E W N S, plus U D on the cubic
    lattice and P M for the triangular diagonals). Tree-like families take
    decimal digits naming out-edge labels.
    """
    v = g.origin if start is None else start
    g.validate(v)
    verts = [v]
    labels = []
    seen = {v}
    lat = g.lattice
    for pos, ch in enumerate(text):
        nbrs = g.out_neighbors(verts[-1])
        if lat is not None:
            up = ch.upper()
            if up not in lat.letters:
                raise WalkParseError(pos, ch)
            vec = lat.directions[lat.letters.index(up)]
            target = tuple(a + b for a, b in zip(verts[-1], vec))
            found = [lab for lab, u in nbrs if u == target]
            if not found:
                raise WalkParseError(pos, ch, f"no edge in direction {ch!r} at position {pos}")
            lab = found[0]
        else:
            if not ch.isdigit() or int(ch) >= len(nbrs):
                raise WalkParseError(pos, ch)
            lab = int(ch)
            target = nbrs[lab][1]
        if target in seen:
            raise NotSelfAvoidingError(pos + 1)
        seen.add(target)
        verts.append(target)
        labels.append(lab)
    return Walk(tuple(verts), tuple(labels))


def to_directions(g: GraphFamily, w: Walk) -> str:
    lat = g.lattice
    if lat is None:
        return "".join(str(lab) for lab in w.edges)
    out = []
    for a, b in zip(w.vertices, w.vertices[1:]):
        vec = tuple(y - x for x, y in zip(a, b))
        out.append(lat.letters[lat.index_of(vec)])
    return "".join(out)

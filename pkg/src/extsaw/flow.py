"""Small Edmonds-Karp max-flow on implicitly given graphs.

Only used for the two-path escape test, where flows never exceed 2, so the
simple BFS augmentation is plenty.
"""

from __future__ import annotations

from collections import defaultdict, deque


def max_flow(source, sink, arcs, limit: int | None = None):
    """Return (value, flow, reach).

    ``flow`` maps (x, y) to the flow on x->y. ``reach`` is the source side
    of a minimum cut when the flow is maximum, and None when the search
    stopped at ``limit``. ``arcs(x)`` yields (y, capacity) for the arcs
    leaving x.
    """
    flow: dict = defaultdict(int)
    back = defaultdict(set)  # back[x] = {y : flow(y, x) > 0}
    value = 0
    while limit is None or value < limit:
        parent = {source: None}
        q = deque([source])
        found = False
        while q and not found:
            x = q.popleft()
            cand = [(y, c - flow[(x, y)]) for y, c in arcs(x)]
            cand += [(y, flow[(y, x)]) for y in back[x]]
            for y, r in cand:
                if r > 0 and y not in parent:
                    parent[y] = x
                    if y == sink:
                        found = True
                        break
                    q.append(y)
        if not found:
            return value, _nonzero(flow), set(parent)
        # unit augmentation keeps the bookkeeping trivial
        y = sink
        while parent[y] is not None:
            x = parent[y]
            if flow[(y, x)] > 0:
                flow[(y, x)] -= 1
                if flow[(y, x)] == 0:
                    back[x].discard(y)
            else:
                flow[(x, y)] += 1
                back[y].add(x)
            y = x
        value += 1
    return value, _nonzero(flow), None


def _nonzero(flow) -> dict:
    return {k: f for k, f in flow.items() if f}


def decompose_paths(flow: dict, source, sink) -> list[list]:
    """Split a 0/1 flow into source-sink paths (cycles are dropped)."""
    out = defaultdict(list)
    for (x, y), f in flow.items():
        for _ in range(max(f, 0)):
            out[x].append(y)
    paths = []
    while out[source]:
        path = [source]
        x = source
        seen = {source}
        while x != sink:
            y = out[x].pop()
            if y in seen:
                break
            seen.add(y)
            path.append(y)
            x = y
        if x == sink:
            paths.append(path)
    return paths

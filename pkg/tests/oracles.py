"""Reference oracles kept deliberately naive.

These use nothing from the package except the neighbour generators, so they
give an independent second route for counts, distances and weights.
"""

from __future__ import annotations

from collections import deque

import networkx as nx


def naive_count(g, v, n):
    """Number of n-step SAWs from v by plain recursion."""

    def rec(x, left, seen):
        if left == 0:
            return 1
        total = 0
        for _, y in g.out_neighbors(x):
            if y not in seen:
                seen.add(y)
                total += rec(y, left - 1, seen)
                seen.remove(y)
        return total

    return rec(v, n, {v})


def naive_walks(g, v, n):
    """All n-step SAWs from v as (vertices, labels) in label order."""
    out = []

    def rec(verts, labels):
        if len(labels) == n:
            out.append((tuple(verts), tuple(labels)))
            return
        for lab, y in g.out_neighbors(verts[-1]):
            if y not in verts:
                verts.append(y)
                labels.append(lab)
                rec(verts, labels)
                verts.pop()
                labels.pop()

    rec([v], [])
    return out


def naive_bridges(d, n):
    """Bridges on Z^d by filtering every SAW: x0 < x_i <= x_n for i >= 1."""
    from extsaw.graphs import get_family

    g = get_family("square" if d == 2 else "cubic")
    total = 0
    for verts, _ in naive_walks(g, g.origin, n):
        xs = [p[0] for p in verts]
        if all(xs[0] < x <= xs[-1] for x in xs[1:]):
            total += 1
    return total


def bfs_distance(g, u, v, limit=60):
    """Undirected BFS distance, no heuristics."""
    if u == v:
        return 0
    seen = {u}
    frontier = [u]
    for d in range(1, limit + 1):
        nxt = []
        for x in frontier:
            for _, y in g.out_neighbors(x) + g.in_neighbors(x):
                if y == v:
                    return d
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return None


def _ball(g, center, r):
    dist = {center: 0}
    q = deque([center])
    while q:
        x = q.popleft()
        if dist[x] == r:
            continue
        for _, y in g.out_neighbors(x) + g.in_neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def rooted_ball(g, center, r):
    """Induced directed ball as a networkx graph, nodes tagged by distance."""
    dist = _ball(g, center, r)
    h = nx.DiGraph()
    for x, d in dist.items():
        h.add_node(x, dist=d, mark=0)
    for x in dist:
        for _, y in g.out_neighbors(x):
            if y in dist:
                h.add_edge(x, y)
    return h


def _match(a, b):
    return a["dist"] == b["dist"] and a["mark"] == b["mark"]


def stabiliser_orbit_size(g, u, v, r=3):
    """|stab(u) v| counted on the radius-r ball around u.

    Counts vertices v' of the ball for which some isomorphism of the ball
    fixes u and sends v to v'.
    """
    h = rooted_ball(g, u, r)
    base = h.copy()
    base.nodes[u]["mark"] = 1
    base.nodes[v]["mark"] = 2
    count = 0
    for w in h.nodes:
        if h.nodes[w]["dist"] != h.nodes[v]["dist"]:
            continue
        other = h.copy()
        other.nodes[u]["mark"] = 1
        other.nodes[w]["mark"] = 2
        if nx.algorithms.isomorphism.DiGraphMatcher(base, other, node_match=_match).is_isomorphic():
            count += 1
    return count


def balls_isomorphic(g, u, v, r=2):
    a = rooted_ball(g, u, r)
    b = rooted_ball(g, v, r)
    a.nodes[u]["mark"] = 1
    b.nodes[v]["mark"] = 1
    return nx.algorithms.isomorphism.DiGraphMatcher(a, b, node_match=_match).is_isomorphic()

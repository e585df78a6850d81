"""Compiled depth-first counters.

Two engines:

* ``count_lattice`` walks an occupancy grid for families embedded in Z^d.
  Steps are direction indices; per-cell bit masks say which directions are
  edges. It can quotient by the point group fixing the start (orbit counting
  on lexicographically least direction sequences) and evaluates the
  forward/backward escape and the two-path flow test at every node.
* ``count_csr`` walks an explicit adjacency window (CSR arrays) and knows the
  free-subtree certificate of the grandparent graph.

Counts are int64; callers guard the range. All kernels release the GIL so a
thread pool can run disjoint prefixes side by side.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MODE_PLAIN, MODE_F, MODE_B, MODE_FB = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def _inside(cell, coords, frame_axes, lo, hi, m):
    for i in range(frame_axes.shape[0]):
        a = frame_axes[i]
        x = coords[cell, a]
        if x < lo[a] - (m - 1) or x > hi[a] + (m - 1):
            return False
    return True


@njit(cache=True, nogil=True)
def _escape(src, mask, off, occ, coords, frame_axes, lo, hi, m, mark, stamp, queue):
    """BFS from src through unoccupied cells; True once the frame is hit."""
    head = 0
    tail = 1
    queue[0] = src
    mark[src] = stamp
    nd = off.shape[0]
    while head < tail:
        c = queue[head]
        head += 1
        bits = mask[c]
        for k in range(nd):
            if (bits >> k) & 1:
                nb = c + off[k]
                if occ[nb] or mark[nb] == stamp:
                    continue
                if not _inside(nb, coords, frame_axes, lo, hi, m):
                    return True
                mark[nb] = stamp
                queue[tail] = nb
                tail += 1
    return False


@njit(cache=True, nogil=True)
def _two_paths(s0, s1, mask, off, occ, coords, frame_axes, lo, hi, m,
               mark, stamp, queue, par, mark2, fsucc, fpred, onflow):
    """Undirected graphs only: are there vertex-disjoint escapes from s0 and
    from s1 (s0 == s1 allowed, meaning two escapes from one vertex)?

    One BFS augmentation finds a first path; a second search runs in the
    residual graph of the vertex-split network. Only the value matters, so
    the second augmentation is not applied.
    """
    nd = off.shape[0]
    # first augmentation: plain BFS from both sources
    head = 0
    tail = 0
    queue[tail] = s0
    tail += 1
    mark[s0] = stamp
    par[s0] = -1
    if s1 != s0:
        queue[tail] = s1
        tail += 1
        mark[s1] = stamp
        par[s1] = -1
    hit = -1
    last = -1
    while head < tail and hit < 0:
        c = queue[head]
        head += 1
        bits = mask[c]
        for k in range(nd):
            if (bits >> k) & 1:
                nb = c + off[k]
                if occ[nb] or mark[nb] == stamp:
                    continue
                mark[nb] = stamp
                par[nb] = c
                if not _inside(nb, coords, frame_axes, lo, hi, m):
                    hit = nb
                    break
                queue[tail] = nb
                tail += 1
    if hit < 0:
        return False
    c = hit
    while par[c] >= 0:
        p = par[c]
        onflow[c] = stamp
        fpred[c] = p
        fsucc[p] = c
        last = p
        c = p
    src1 = last
    src2 = s1 if src1 == s0 else s0
    if s0 == s1:
        src2 = s0
    # second augmentation over states 2*cell + side (0 in, 1 out)
    head = 0
    tail = 1
    st0 = 2 * src2 + 1
    queue[0] = st0
    mark2[st0] = stamp
    while head < tail:
        st = queue[head]
        head += 1
        c = st >> 1
        on_c = onflow[c] == stamp or c == src1
        if st & 1:
            bits = mask[c]
            for k in range(nd):
                if (bits >> k) & 1:
                    nb = c + off[k]
                    if occ[nb]:
                        continue
                    if on_c and fsucc[c] == nb:
                        continue
                    if not _inside(nb, coords, frame_axes, lo, hi, m):
                        if onflow[nb] != stamp:
                            return True
                    t = 2 * nb
                    if mark2[t] != stamp:
                        mark2[t] = stamp
                        queue[tail] = t
                        tail += 1
            if onflow[c] == stamp:
                t = 2 * c
                if mark2[t] != stamp:
                    mark2[t] = stamp
                    queue[tail] = t
                    tail += 1
        else:
            if onflow[c] != stamp:
                t = 2 * c + 1
            else:
                t = 2 * fpred[c] + 1
            if mark2[t] != stamp:
                mark2[t] = stamp
                queue[tail] = t
                tail += 1
    return False


@njit(cache=True, nogil=True)
def count_lattice(prefix, n_max, start, off, outmask, inmask, coords, frame_axes,
                  perms, modes, undirected, m_single, m_double):
    """Count SAWs of every length <= n_max whose direction sequence starts
    with ``prefix``; only lengths >= len(prefix) are counted.

    ``perms`` rows are direction permutations of the point group fixing the
    start, identity first. Each orbit is counted once, through its
    lexicographically least member, with weight |G| / |stabiliser|.
    Returns counts[n, mode].
    """
    ncell = outmask.shape[0]
    dim = coords.shape[1]
    ng = perms.shape[0]
    nd = off.shape[0]
    counts = np.zeros((n_max + 1, 4), dtype=np.int64)
    occ = np.zeros(ncell, dtype=np.bool_)
    mark = np.zeros(ncell, dtype=np.int64)
    mark2 = np.zeros(2 * ncell, dtype=np.int64)
    queue = np.empty(2 * ncell, dtype=np.int64)
    par = np.empty(ncell, dtype=np.int64)
    fsucc = np.full(ncell, -1, dtype=np.int64)
    fpred = np.full(ncell, -1, dtype=np.int64)
    onflow = np.zeros(ncell, dtype=np.int64)
    path = np.empty(n_max + 1, dtype=np.int64)
    nxt = np.zeros(n_max + 1, dtype=np.int64)
    ties = np.zeros((n_max + 1, ng), dtype=np.bool_)
    lo = np.empty(dim, dtype=np.int64)
    hi = np.empty(dim, dtype=np.int64)
    stamp = 0

    path[0] = start
    occ[start] = True
    for gi in range(ng):
        ties[0, gi] = True
    depth = 0
    kp = prefix.shape[0]
    if kp > n_max:
        return counts
    for i in range(kp):
        d = prefix[i]
        c = path[depth]
        if not (outmask[c] >> d) & 1:
            return counts
        nb = c + off[d]
        if occ[nb]:
            return counts
        for gi in range(ng):
            ties[depth + 1, gi] = False
            if ties[depth, gi]:
                pd = perms[gi, d]
                if pd < d:
                    return counts
                if pd == d:
                    ties[depth + 1, gi] = True
        depth += 1
        path[depth] = nb
        occ[nb] = True

    base = depth
    nxt[depth] = 0
    evaluate = True
    while True:
        if evaluate:
            # the walk path[0..depth] is counted here
            nt = 0
            for gi in range(ng):
                if ties[depth, gi]:
                    nt += 1
            wgt = ng // nt
            counts[depth, 0] += wgt
            if modes[1] or modes[2] or modes[3]:
                for a in range(dim):
                    lo[a] = coords[path[0], a]
                    hi[a] = lo[a]
                for j in range(1, depth + 1):
                    for a in range(dim):
                        x = coords[path[j], a]
                        if x < lo[a]:
                            lo[a] = x
                        if x > hi[a]:
                            hi[a] = x
                okf = True
                if modes[1] or (modes[3] and not undirected):
                    stamp += 1
                    okf = _escape(path[depth], outmask, off, occ, coords, frame_axes,
                                  lo, hi, m_single, mark, stamp, queue)
                    if modes[1] and okf:
                        counts[depth, 1] += wgt
                okb = True
                if modes[2]:
                    stamp += 1
                    okb = _escape(path[0], inmask, off, occ, coords, frame_axes,
                                  lo, hi, m_single, mark, stamp, queue)
                    if okb:
                        counts[depth, 2] += wgt
                # FB implies both F and B
                if modes[3] and undirected and okf and okb:
                    stamp += 1
                    if _two_paths(path[0], path[depth], outmask, off, occ, coords,
                                  frame_axes, lo, hi, m_double, mark, stamp, queue,
                                  par, mark2, fsucc, fpred, onflow):
                        counts[depth, 3] += wgt
            evaluate = False
            nxt[depth] = 0
            if depth == n_max:
                # no children; fall through to backtrack
                nxt[depth] = nd
        if nxt[depth] >= nd:
            if depth == base:
                break
            occ[path[depth]] = False
            depth -= 1
            continue
        d = nxt[depth]
        nxt[depth] += 1
        c = path[depth]
        if not (outmask[c] >> d) & 1:
            continue
        nb = c + off[d]
        if occ[nb]:
            continue
        canon = True
        for gi in range(ng):
            ties[depth + 1, gi] = False
            if ties[depth, gi]:
                pd = perms[gi, d]
                if pd < d:
                    canon = False
                    break
                if pd == d:
                    ties[depth + 1, gi] = True
        if not canon:
            continue
        depth += 1
        path[depth] = nb
        occ[nb] = True
        evaluate = True
    return counts


@njit(cache=True, nogil=True)
def _gp_free_child(v, which, path, depth, level, word):
    """Does vertex path[v] have a child whose subtree avoids the walk?
    ``which`` = 2 asks for two free children (used when depth is 0)."""
    lv = level[path[v]]
    wv = word[path[v]]
    free = 0
    for b in range(2):
        cl = lv - 1
        cw = 2 * wv + b
        ok = True
        for j in range(depth + 1):
            x = path[j]
            lx = level[x]
            if lx <= cl and (word[x] >> (cl - lx)) == cw:
                ok = False
                break
        if ok:
            free += 1
    return free >= which


@njit(cache=True, nogil=True)
def count_csr(prefix, n_max, start, indptr, indices, level, word, modes, certificate):
    """Count SAWs on an explicit window. With ``certificate`` (grandparent
    graph) the F/B/FB verdicts come from free child subtrees."""
    nv = indptr.shape[0] - 1
    counts = np.zeros((n_max + 1, 4), dtype=np.int64)
    occ = np.zeros(nv, dtype=np.bool_)
    path = np.empty(n_max + 1, dtype=np.int64)
    nxt = np.zeros(n_max + 1, dtype=np.int64)
    path[0] = start
    occ[start] = True
    depth = 0
    kp = prefix.shape[0]
    if kp > n_max:
        return counts
    for i in range(kp):
        c = path[depth]
        lab = prefix[i]
        if lab >= indptr[c + 1] - indptr[c]:
            return counts
        nb = indices[indptr[c] + lab]
        if nb < 0 or occ[nb]:
            return counts
        depth += 1
        path[depth] = nb
        occ[nb] = True
    base = depth
    evaluate = True
    while True:
        if evaluate:
            counts[depth, 0] += 1
            f = False
            b = False
            if certificate:
                if modes[1] or modes[3]:
                    f = _gp_free_child(depth, 1, path, depth, level, word)
                    if modes[1] and f:
                        counts[depth, 1] += 1
                if modes[2] or modes[3]:
                    b = _gp_free_child(0, 1, path, depth, level, word)
                    if modes[2] and b:
                        counts[depth, 2] += 1
                if modes[3]:
                    if depth == 0:
                        if _gp_free_child(0, 2, path, depth, level, word):
                            counts[depth, 3] += 1
                    elif f and b:
                        counts[depth, 3] += 1
            evaluate = False
            nxt[depth] = 0
            if depth == n_max:
                nxt[depth] = indptr[path[depth] + 1] - indptr[path[depth]]
        c = path[depth]
        deg = indptr[c + 1] - indptr[c]
        if nxt[depth] >= deg:
            if depth == base:
                break
            occ[c] = False
            depth -= 1
            continue
        nb = indices[indptr[c] + nxt[depth]]
        nxt[depth] += 1
        if nb < 0 or occ[nb]:
            continue
        depth += 1
        path[depth] = nb
        occ[nb] = True
        evaluate = True
    return counts


@njit(cache=True, nogil=True)
def lattice_tree(n_max, start, off, outmask, inmask, coords, frame_axes,
                 want_f, want_b, want_fb, undirected, m_single, m_double, budget):
    """All SAWs of length <= n_max in depth-first preorder.

    Returns (parent, direction, cell, flags) with flags bit 0/1/2 for
    F/B/FB. Stops with n = -1 if more than ``budget`` nodes would be needed.
    """
    ncell = outmask.shape[0]
    dim = coords.shape[1]
    nd = off.shape[0]
    cap = 1024
    parent = np.empty(cap, dtype=np.int64)
    direc = np.empty(cap, dtype=np.int64)
    cellv = np.empty(cap, dtype=np.int64)
    flags = np.empty(cap, dtype=np.int8)
    occ = np.zeros(ncell, dtype=np.bool_)
    mark = np.zeros(ncell, dtype=np.int64)
    mark2 = np.zeros(2 * ncell, dtype=np.int64)
    queue = np.empty(2 * ncell, dtype=np.int64)
    par = np.empty(ncell, dtype=np.int64)
    fsucc = np.full(ncell, -1, dtype=np.int64)
    fpred = np.full(ncell, -1, dtype=np.int64)
    onflow = np.zeros(ncell, dtype=np.int64)
    path = np.empty(n_max + 1, dtype=np.int64)
    node = np.empty(n_max + 1, dtype=np.int64)
    nxt = np.zeros(n_max + 1, dtype=np.int64)
    lo = np.empty(dim, dtype=np.int64)
    hi = np.empty(dim, dtype=np.int64)
    stamp = 0
    count = 0
    depth = 0
    path[0] = start
    occ[start] = True
    evaluate = True
    last_dir = -1
    while True:
        if evaluate:
            if count >= budget:
                return parent[:0], direc[:0], cellv[:0], flags[:0], -1
            if count >= cap:
                cap *= 2
                parent2 = np.empty(cap, dtype=np.int64)
                direc2 = np.empty(cap, dtype=np.int64)
                cell2 = np.empty(cap, dtype=np.int64)
                flags2 = np.empty(cap, dtype=np.int8)
                parent2[:count] = parent[:count]
                direc2[:count] = direc[:count]
                cell2[:count] = cellv[:count]
                flags2[:count] = flags[:count]
                parent, direc, cellv, flags = parent2, direc2, cell2, flags2
            parent[count] = node[depth - 1] if depth > 0 else -1
            direc[count] = last_dir
            cellv[count] = path[depth]
            node[depth] = count
            fl = 0
            if want_f or want_b or want_fb:
                for a in range(dim):
                    lo[a] = coords[path[0], a]
                    hi[a] = lo[a]
                for j in range(1, depth + 1):
                    for a in range(dim):
                        x = coords[path[j], a]
                        if x < lo[a]:
                            lo[a] = x
                        if x > hi[a]:
                            hi[a] = x
                okf = False
                if want_f or want_fb:
                    stamp += 1
                    okf = _escape(path[depth], outmask, off, occ, coords, frame_axes,
                                  lo, hi, m_single, mark, stamp, queue)
                    if okf:
                        fl |= 1
                if want_b:
                    stamp += 1
                    if _escape(path[0], inmask, off, occ, coords, frame_axes,
                               lo, hi, m_single, mark, stamp, queue):
                        fl |= 2
                if want_fb and undirected and okf:
                    stamp += 1
                    if _two_paths(path[0], path[depth], outmask, off, occ, coords,
                                  frame_axes, lo, hi, m_double, mark, stamp, queue,
                                  par, mark2, fsucc, fpred, onflow):
                        fl |= 4
            flags[count] = fl
            count += 1
            evaluate = False
            nxt[depth] = 0
            if depth == n_max:
                nxt[depth] = nd
        if nxt[depth] >= nd:
            if depth == 0:
                break
            occ[path[depth]] = False
            depth -= 1
            continue
        d = nxt[depth]
        nxt[depth] += 1
        c = path[depth]
        if not (outmask[c] >> d) & 1:
            continue
        nb = c + off[d]
        if occ[nb]:
            continue
        depth += 1
        path[depth] = nb
        occ[nb] = True
        last_dir = d
        evaluate = True
    return parent[:count], direc[:count], cellv[:count], flags[:count], count

"""Compiled traversal kernels over a pool's super graph (CSR arrays)."""

import numpy as np
from numba import njit


@njit(cache=True)
def reach_gain(indptr, succ, covered, v, n, R, stack, touched):
    # visited nodes are marked in ``covered`` itself and rolled back at the end
    top = 0
    nt = 0
    for x in range(v, R * n, n):
        if covered[x] == 0:
            covered[x] = 1
            stack[top] = x
            top += 1
            touched[nt] = x
            nt += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for j in range(indptr[u], indptr[u + 1]):
            w = succ[j]
            if covered[w] == 0:
                covered[w] = 1
                stack[top] = w
                top += 1
                touched[nt] = w
                nt += 1
    for i in range(nt):
        covered[touched[i]] = 0
    return nt


@njit(cache=True)
def reach_add(indptr, succ, covered, v, n, R, stack):
    top = 0
    added = 0
    for x in range(v, R * n, n):
        if covered[x] == 0:
            covered[x] = 1
            stack[top] = x
            top += 1
            added += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for j in range(indptr[u], indptr[u + 1]):
            w = succ[j]
            if covered[w] == 0:
                covered[w] = 1
                stack[top] = w
                top += 1
                added += 1
    return added


@njit(cache=True)
def _push(hd, hu, size, d, u):
    i = size
    hd[i] = d
    hu[i] = u
    while i > 0:
        p = (i - 1) >> 1
        if hd[p] <= hd[i]:
            break
        hd[p], hd[i] = hd[i], hd[p]
        hu[p], hu[i] = hu[i], hu[p]
        i = p
    return size + 1


@njit(cache=True)
def _pop(hd, hu, size):
    d = hd[0]
    u = hu[0]
    size -= 1
    hd[0] = hd[size]
    hu[0] = hu[size]
    i = 0
    while True:
        a = 2 * i + 1
        if a >= size:
            break
        b = a + 1
        c = b if b < size and hd[b] < hd[a] else a
        if hd[i] <= hd[c]:
            break
        hd[c], hd[i] = hd[i], hd[c]
        hu[c], hu[i] = hu[i], hu[c]
        i = c
    return d, u, size


@njit(cache=True)
def timed_gain(indptr, succ, delay, dist, v, n, R, window, commit,
               tent, touched, hd, hu):
    """Window-bounded Dijkstra from every copy of ``v``.

    Counts nodes reached within the window that the current seeds (arrival
    times in ``dist``) do not reach in time. A node the seeds already reach
    at least as early is not expanded: anything beyond it is reached no
    later from the seeds.
    """
    size = 0
    nt = 0
    for x in range(v, R * n, n):
        if dist[x] > 0.0:
            tent[x] = 0.0
            touched[nt] = x
            nt += 1
            size = _push(hd, hu, size, 0.0, x)
    new = 0
    while size > 0:
        d, u, size = _pop(hd, hu, size)
        if d > tent[u]:
            continue
        if dist[u] > window:
            new += 1
        for j in range(indptr[u], indptr[u + 1]):
            w = succ[j]
            nd = d + delay[j]
            if nd <= window and nd < dist[w] and nd < tent[w]:
                if tent[w] == np.inf:
                    touched[nt] = w
                    nt += 1
                tent[w] = nd
                size = _push(hd, hu, size, nd, w)
    for i in range(nt):
        u = touched[i]
        if commit and tent[u] < dist[u]:
            dist[u] = tent[u]
        tent[u] = np.inf
    return new


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def scc_labels(indptr, succ, base, n):
    """Tarjan's algorithm on one world (nodes ``base .. base+n-1``).

    Returns ``(comp, ncomp)``; component ids are assigned sinks first, so
    every arc goes from a higher id to a lower or equal one.
    """
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    comp = np.full(n, -1, dtype=np.int64)
    onstack = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    work_v = np.empty(n, dtype=np.int64)
    work_pos = np.empty(n, dtype=np.int64)
    sp = 0
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = True
        wp = 0
        work_v[0] = root
        work_pos[0] = indptr[base + root]
        wp = 1
        while wp > 0:
            v = work_v[wp - 1]
            pos = work_pos[wp - 1]
            end = indptr[base + v + 1]
            descended = False
            while pos < end:
                w = succ[pos] - base
                pos += 1
                if index[w] == -1:
                    work_pos[wp - 1] = pos
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    onstack[w] = True
                    work_v[wp] = w
                    work_pos[wp] = indptr[base + w]
                    wp += 1
                    descended = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            wp -= 1
            if wp > 0:
                u = work_v[wp - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    sp -= 1
                    w = stack[sp]
                    onstack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp, ncomp


@njit(cache=True)
def reach_counts_world(indptr, succ, base, n, out):
    """Add ``|reach(v)|`` within one world to ``out[v]`` using per-component
    reachability bitsets over the condensation."""
    comp, ncomp = scc_labels(indptr, succ, base, n)
    words = (n + 63) // 64
    bits = np.zeros((ncomp, words), dtype=np.uint64)
    # group members by component
    start = np.zeros(ncomp + 1, dtype=np.int64)
    for v in range(n):
        start[comp[v] + 1] += 1
    for c in range(ncomp):
        start[c + 1] += start[c]
    fill = start[:-1].copy()
    members = np.empty(n, dtype=np.int64)
    for v in range(n):
        members[fill[comp[v]]] = v
        fill[comp[v]] += 1
    sizes = np.zeros(ncomp, dtype=np.int64)
    for c in range(ncomp):
        row = bits[c]
        for i in range(start[c], start[c + 1]):
            v = members[i]
            row[v >> 6] |= np.uint64(1) << np.uint64(v & 63)
        for i in range(start[c], start[c + 1]):
            v = members[i]
            for j in range(indptr[base + v], indptr[base + v + 1]):
                d = comp[succ[j] - base]
                if d != c:
                    other = bits[d]
                    for t in range(words):
                        row[t] |= other[t]
        s = 0
        for t in range(words):
            s += _popcount(row[t])
        sizes[c] = s
    for v in range(n):
        out[v] += sizes[comp[v]]


@njit(cache=True)
def reach_counts_bfs(indptr, succ, base, n, out, mark, stack):
    """Same as :func:`reach_counts_world` by one search per node; used when
    the bitset table would not fit in memory."""
    for v in range(n):
        stamp = base + v + 1
        top = 0
        stack[top] = v
        top += 1
        mark[v] = stamp
        cnt = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for j in range(indptr[base + u], indptr[base + u + 1]):
                w = succ[j] - base
                if mark[w] != stamp:
                    mark[w] = stamp
                    stack[top] = w
                    top += 1
                    cnt += 1
        out[v] += cnt

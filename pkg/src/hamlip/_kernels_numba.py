"""numba implementations of the shortest-path kernels.

All graphs arrive as CSR arrays (indptr int64, dst int32/int64, cost
float64).  Costs must be nonnegative; initial labels may be any finite
floats (multi-source Dijkstra with source potentials stays correct for
nonnegative edge costs).
"""

import numpy as np
from numba import njit, prange

INF = np.inf


@njit(cache=True)
def _heap_push(hk, hv, hn, key, val):
    if hn >= hk.shape[0]:
        hk2 = np.empty(hk.shape[0] * 2, np.float64)
        hv2 = np.empty(hv.shape[0] * 2, np.int64)
        hk2[:hn] = hk[:hn]
        hv2[:hn] = hv[:hn]
        hk, hv = hk2, hv2
    j = hn
    hk[j] = key
    hv[j] = val
    hn += 1
    while j > 0:
        p = (j - 1) >> 1
        if hk[p] <= hk[j]:
            break
        hk[p], hk[j] = hk[j], hk[p]
        hv[p], hv[j] = hv[j], hv[p]
        j = p
    return hk, hv, hn


@njit(cache=True)
def _heap_pop(hk, hv, hn):
    key = hk[0]
    val = hv[0]
    hn -= 1
    hk[0] = hk[hn]
    hv[0] = hv[hn]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < hn and hk[l] < hk[m]:
            m = l
        if r < hn and hk[r] < hk[m]:
            m = r
        if m == i:
            break
        hk[i], hk[m] = hk[m], hk[i]
        hv[i], hv[m] = hv[m], hv[i]
        i = m
    return key, val, hn


@njit(cache=True)
def sssp(indptr, dst, cost, sources, init):
    """Multi-source Dijkstra: dist[v] = min_s init[s] + d(s, v)."""
    n = indptr.shape[0] - 1
    dist = np.full(n, INF)
    hk = np.empty(1024, np.float64)
    hv = np.empty(1024, np.int64)
    hn = 0
    for i in range(sources.shape[0]):
        s = sources[i]
        if init[i] < dist[s]:
            dist[s] = init[i]
    for i in range(sources.shape[0]):
        s = sources[i]
        if dist[s] == init[i]:
            hk, hv, hn = _heap_push(hk, hv, hn, init[i], s)
    while hn > 0:
        d, v, hn = _heap_pop(hk, hv, hn)
        if d > dist[v]:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            w = dst[e]
            nd = d + cost[e]
            if nd < dist[w]:
                dist[w] = nd
                hk, hv, hn = _heap_push(hk, hv, hn, nd, w)
    return dist


@njit(cache=True)
def sssp_pred(indptr, dst, cost, source):
    """Single-source Dijkstra returning (dist, predecessor edge id or -1)."""
    n = indptr.shape[0] - 1
    dist = np.full(n, INF)
    pred = np.full(n, -1, np.int64)
    hk = np.empty(1024, np.float64)
    hv = np.empty(1024, np.int64)
    hn = 0
    dist[source] = 0.0
    hk, hv, hn = _heap_push(hk, hv, hn, 0.0, source)
    while hn > 0:
        d, v, hn = _heap_pop(hk, hv, hn)
        if d > dist[v]:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            w = dst[e]
            nd = d + cost[e]
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = e
                hk, hv, hn = _heap_push(hk, hv, hn, nd, w)
    return dist, pred


@njit(cache=True, parallel=True)
def sssp_many(indptr, dst, cost, sources):
    """One Dijkstra per source, rows independent (parallel over sources)."""
    n = indptr.shape[0] - 1
    k = sources.shape[0]
    out = np.empty((k, n))
    for i in prange(k):
        src = np.empty(1, np.int64)
        src[0] = sources[i]
        ini = np.zeros(1)
        out[i, :] = sssp(indptr, dst, cost, src, ini)
    return out


@njit(cache=True)
def floyd_warshall(dmat):
    """In-place all-pairs min-plus relaxation on a dense matrix."""
    n = dmat.shape[0]
    for k in range(n):
        for i in range(n):
            dik = dmat[i, k]
            if dik == INF:
                continue
            for j in range(n):
                alt = dik + dmat[k, j]
                if alt < dmat[i, j]:
                    dmat[i, j] = alt
    return dmat

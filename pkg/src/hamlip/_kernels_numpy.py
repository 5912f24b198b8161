"""Pure-numpy fallbacks for the shortest-path kernels.

Shortest paths run as vectorized Bellman-Ford edge relaxations (correct
for nonnegative costs, converges in at most V rounds, usually in a few
dozen).  Slower than the numba kernels but dependency-free; selected via
HAMLIP_BACKEND=numpy.
"""

import numpy as np

INF = np.inf


def _edge_sources(indptr):
    return np.repeat(np.arange(indptr.shape[0] - 1), np.diff(indptr))


def sssp(indptr, dst, cost, sources, init):
    n = indptr.shape[0] - 1
    src = _edge_sources(indptr)
    dist = np.full(n, INF)
    np.minimum.at(dist, np.asarray(sources), np.asarray(init, dtype=np.float64))
    for _ in range(n + 1):
        relaxed = dist[src] + cost
        new = dist.copy()
        np.minimum.at(new, dst, relaxed)
        if np.array_equal(new, dist):
            return new
        dist = new
    raise RuntimeError("relaxation did not settle; negative cost cycle?")


def sssp_pred(indptr, dst, cost, source):
    n = indptr.shape[0] - 1
    src = _edge_sources(indptr)
    dist = sssp(indptr, dst, cost, np.array([source]), np.zeros(1))
    # any in-edge whose relaxed value equals dist witnesses a shortest path;
    # pick the smallest edge id for determinism
    match = np.flatnonzero((dist[src] + cost == dist[dst]) & np.isfinite(dist[dst]))
    pred = np.full(n, -1, np.int64)
    best = np.full(n, np.iinfo(np.int64).max, np.int64)
    np.minimum.at(best, dst[match], match)
    found = best < np.iinfo(np.int64).max
    pred[found] = best[found]
    pred[source] = -1
    return dist, pred


def sssp_many(indptr, dst, cost, sources):
    n = indptr.shape[0] - 1
    out = np.empty((len(sources), n))
    for i, s in enumerate(sources):
        out[i, :] = sssp(indptr, dst, cost, np.array([s]), np.zeros(1))
    return out


def floyd_warshall(dmat):
    n = dmat.shape[0]
    for k in range(n):
        np.minimum(dmat, dmat[:, k : k + 1] + dmat[k : k + 1, :], out=dmat)
    return dmat

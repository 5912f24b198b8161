"""Shortest-path realizations of the intrinsic pseudo-distances.

d_lambda(x, y) is computed as the directed shortest-path value on the
stencil graph with edge costs given by the sublevel support function at
level lambda.  Distances are asymmetric in general; the to-target
direction runs on the reversed graph with the same per-edge costs (each
reverse edge already carries the negated coefficient vector, so its cost
was priced for the backward traversal).  The Carnot-Caratheodory
distance is the special case H = |p|, lambda = 1.
"""

from __future__ import annotations

import warnings

import numpy as np

from .backend import kernels
from .errors import ContractError
from .fields import DistanceField
from .graph import DirectedGraph
from .hamiltonians import Hamiltonian, PNorm

_ZERO = np.zeros(1)
_warned_levels: set[tuple[str, float]] = set()


def _warn_degenerate_level(ham: Hamiltonian, lam: float) -> None:
    # below lambda_H zero-cost edges of positive length exist and the
    # induced topology can differ from the Euclidean one; say so once
    if lam <= 0.0 or (ham.name, lam) in _warned_levels:
        return
    _warned_levels.add((ham.name, lam))
    try:
        degenerate = ham.radii(lam).r_inner <= 0.0
    except ContractError:
        return
    if degenerate:
        warnings.warn(
            f"level {lam:g} is at or below lambda_H for {ham.name}: distances may "
            "vanish along whole directions and induce a coarser topology",
            stacklevel=3,
        )


def _provenance(graph, ham, lam, extra=None):
    p = {
        "hamiltonian": ham.name,
        "lambda": float(lam),
        "frame": graph.frame.name,
        "h": graph.h,
        "stencil_radius": graph.stencil.radius,
    }
    if extra:
        p.update(extra)
    return p


def dist_from(
    graph: DirectedGraph,
    ham: Hamiltonian,
    lam: float,
    source: int,
    rule: str = "midpoint",
    costs: np.ndarray | None = None,
) -> DistanceField:
    """Distances d_lambda(source, .); unreachable vertices hold +inf."""
    if not 0 <= source < graph.num_vertices:
        raise ContractError(f"source {source} out of range")
    _warn_degenerate_level(ham, lam)
    c = graph.costs(ham, lam, rule) if costs is None else costs
    values = kernels().sssp(graph.indptr, graph.dst, c, np.array([source], dtype=np.int64), _ZERO)
    return DistanceField(
        vertex_ids=np.arange(graph.num_vertices),
        values=values,
        provenance=_provenance(graph, ham, lam, {"computed_by": "dist_from", "source": source}),
        anchor=source,
        direction="from-source",
        lam=float(lam),
    )


def dist_to(
    graph: DirectedGraph,
    ham: Hamiltonian,
    lam: float,
    target: int,
    rule: str = "midpoint",
    costs: np.ndarray | None = None,
) -> DistanceField:
    """Distances d_lambda(., target) via the reversed graph."""
    if not 0 <= target < graph.num_vertices:
        raise ContractError(f"target {target} out of range")
    _warn_degenerate_level(ham, lam)
    c = graph.costs(ham, lam, rule) if costs is None else costs
    rindptr, rdst, emap = graph.reverse
    values = kernels().sssp(rindptr, rdst, c[emap], np.array([target], dtype=np.int64), _ZERO)
    return DistanceField(
        vertex_ids=np.arange(graph.num_vertices),
        values=values,
        provenance=_provenance(graph, ham, lam, {"computed_by": "dist_to", "target": target}),
        anchor=target,
        direction="to-target",
        lam=float(lam),
    )


def cc_distance(graph: DirectedGraph, source: int, rule: str = "midpoint") -> DistanceField:
    """Carnot-Caratheodory distance field: H = |p| at level 1."""
    field = dist_from(graph, PNorm(2.0, 1.0, m=graph.frame.m), 1.0, source, rule)
    field.provenance["computed_by"] = "cc_distance"
    return field


def all_pairs(
    graph: DirectedGraph,
    ham: Hamiltonian,
    lam: float,
    sources,
    targets=None,
    rule: str = "midpoint",
    costs: np.ndarray | None = None,
) -> np.ndarray:
    """Distance matrix d_lambda(s, t) for s in sources, t in targets.

    Rows are independent per-source shortest-path runs (parallelized by
    the numba backend); targets default to all vertices.
    """
    sources = np.asarray(sources, dtype=np.int64)
    if sources.size == 0:
        raise ContractError("all_pairs needs at least one source")
    c = graph.costs(ham, lam, rule) if costs is None else costs
    mat = kernels().sssp_many(graph.indptr, graph.dst, c, sources)
    if targets is None:
        return mat
    return mat[:, np.asarray(targets, dtype=np.int64)]


def path_length(
    graph: DirectedGraph, ham: Hamiltonian, lam: float, vertices, rule: str = "midpoint"
) -> float:
    """Sum of edge costs along a vertex sequence (cheapest parallel edge)."""
    verts = [int(v) for v in np.asarray(vertices).reshape(-1)]
    if len(verts) < 2:
        return 0.0
    costs = graph.costs(ham, lam, rule)
    total = 0.0
    for a, b in zip(verts[:-1], verts[1:]):
        eids = graph.parallel_edges(a, b)
        if eids.size == 0:
            raise ContractError(f"no edge joins vertex {a} to vertex {b}")
        total += float(np.min(costs[eids]))
    return total


def extract_path(graph: DirectedGraph, costs: np.ndarray, source: int, target: int) -> list[int]:
    """A shortest path as a vertex list (via predecessor edges)."""
    dist, pred = kernels().sssp_pred(graph.indptr, graph.dst, costs, source)
    if not np.isfinite(dist[target]):
        raise ContractError(f"vertex {target} unreachable from {source}")
    path = [int(target)]
    v = int(target)
    while v != source:
        e = int(pred[v])
        if e < 0:
            raise ContractError("predecessor chain broken")
        v = int(graph.edge_src[e])
        path.append(v)
    path.reverse()
    return path


def midpoint_defect(
    graph: DirectedGraph, ham: Hamiltonian, lam: float, x: int, y: int, rule: str = "midpoint"
) -> float:
    """inf_z max(d(x, z), d(z, y)) - d(x, y) / 2.

    Nonpositive defect means a perfect discrete midpoint exists; on a
    graph the defect is bounded by the largest single-edge cost at this
    level (split the shortest path where the prefix first reaches half
    the total).
    """
    costs = graph.costs(ham, lam, rule)
    du = dist_from(graph, ham, lam, x, rule, costs=costs).values
    dv = dist_to(graph, ham, lam, y, rule, costs=costs).values
    dxy = du[y]
    if not np.isfinite(dxy):
        raise ContractError(f"vertex {y} unreachable from {x} at level {lam}")
    return float(np.min(np.maximum(du, dv)) - 0.5 * dxy)

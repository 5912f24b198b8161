"""Directed horizontal-stencil graphs and their level-dependent costs.

Each vertex of a GridDomain gets, for every primitive coefficient vector
c (0 < |c|_inf <= stencil radius, gcd of components 1), an edge toward
the lattice vertex nearest to the first-order horizontal move
x + h * sum_i c_i X_i(x).  Edges are built in (c, -c) pairs so the graph
is reverse-closed by construction: the reverse edge prices the same
geometric segment traversed backward (re-stepping from the far end is
not involutive for x-dependent frames).  Costs are not stored: an edge
with coefficient vector c discretizes the length integral of the
sublevel support function, so at level lam its cost is

    support(x_eval, lam, h * c)

with x_eval the segment midpoint (default) or the endpoint average
(trapezoid rule).  Asymmetric Hamiltonians price a -> b and b -> a
differently through the sign of c; zero costs are legitimate (leftward
motion under the half-disk Hamiltonian) and Dijkstra handles them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd

import numpy as np

from .backend import kernels
from .domains import GridDomain
from .errors import ContractError
from .frames import Frame
from .hamiltonians import Hamiltonian

_RULES = ("midpoint", "trapezoid")


@dataclass(frozen=True)
class StencilSpec:
    """Primitive integer coefficient vectors with |c|_inf <= radius."""

    radius: int = 1

    def __post_init__(self):
        if self.radius < 1:
            raise ContractError("stencil radius must be >= 1")

    def coefficients(self, m: int) -> np.ndarray:
        rng = range(-self.radius, self.radius + 1)
        out = []
        grids = np.meshgrid(*([list(rng)] * m), indexing="ij")
        for c in np.stack([g.ravel() for g in grids], axis=1):
            if not c.any():
                continue
            g = 0
            for v in c:
                g = gcd(g, abs(int(v)))
            if g == 1:
                out.append(c)
        arr = np.array(sorted(map(tuple, out)), dtype=np.int64)
        return arr


class DirectedGraph:
    """CSR graph over the vertices of a GridDomain."""

    def __init__(self, domain, frame, stencil, indptr, dst, cidx, coeffs):
        self.domain = domain
        self.frame = frame
        self.stencil = stencil
        self.indptr = indptr
        self.dst = dst
        self.cidx = cidx
        self.coeffs = coeffs  # (K, m) stencil coefficient vectors
        self.h = domain.h
        self._unit_costs = {}

    @property
    def num_vertices(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def num_edges(self) -> int:
        return self.dst.shape[0]

    @property
    def coords(self) -> np.ndarray:
        return self.domain.coords

    @cached_property
    def edge_src(self) -> np.ndarray:
        return np.repeat(
            np.arange(self.num_vertices, dtype=np.int64), np.diff(self.indptr)
        )

    @cached_property
    def reverse(self):
        """Reversed CSR: (indptr, dst, edge_map) with edge_map into this graph."""
        order = np.argsort(self.dst, kind="stable")
        rsrc = self.dst[order]
        rdst = self.edge_src[order]
        rindptr = np.zeros(self.num_vertices + 1, dtype=np.int64)
        np.add.at(rindptr, rsrc + 1, 1)
        np.cumsum(rindptr, out=rindptr)
        return rindptr, rdst, order

    def costs(self, ham: Hamiltonian, lam: float, rule: str = "midpoint") -> np.ndarray:
        """Per-edge costs at level lam (vectorized support evaluation).

        For Hamiltonians with exact level scaling the unit-level costs
        are cached and scaled, which makes level monotonicity exact in
        floating point (lam1 * c <= lam2 * c termwise) and keeps level
        bisections cheap.
        """
        if lam < 0.0:
            raise ContractError("level must be >= 0")
        if rule not in _RULES:
            raise ContractError(f"quadrature rule must be one of {_RULES}")
        if ham.m != self.frame.m:
            raise ContractError(
                f"Hamiltonian has m={ham.m}, frame has m={self.frame.m}"
            )
        if ham.scale_linear:
            key = (id(ham), rule)
            hit = self._unit_costs.get(key)
            if hit is None or hit[0] is not ham:
                base = self._raw_costs(ham, 1.0, rule)
                self._unit_costs[key] = (ham, base)
            else:
                base = hit[1]
            return lam * base
        return self._raw_costs(ham, lam, rule)

    def _raw_costs(self, ham: Hamiltonian, lam: float, rule: str) -> np.ndarray:
        q = self.h * self.coeffs[self.cidx].astype(np.float64)
        if not ham.x_dependent:
            return np.asarray(ham.support(None, lam, q), dtype=np.float64)
        a = self.coords[self.edge_src]
        b = self.coords[self.dst]
        if rule == "midpoint":
            return np.asarray(ham.support(0.5 * (a + b), lam, q), dtype=np.float64)
        ca = np.asarray(ham.support(a, lam, q), dtype=np.float64)
        cb = np.asarray(ham.support(b, lam, q), dtype=np.float64)
        return 0.5 * (ca + cb)

    def find_edge(self, a: int, b: int) -> int:
        """Cheapest-to-enumerate edge id a -> b, or -1."""
        lo, hi = self.indptr[a], self.indptr[a + 1]
        hits = lo + np.flatnonzero(self.dst[lo:hi] == b)
        return int(hits[0]) if hits.size else -1

    def parallel_edges(self, a: int, b: int) -> np.ndarray:
        lo, hi = self.indptr[a], self.indptr[a + 1]
        return lo + np.flatnonzero(self.dst[lo:hi] == b)

    def subgraph(self, vertex_ids):
        """Induced sub-CSR: (indptr, local dst, edge ids, vertex order).

        ``vertex_ids`` become local vertices 0..k-1 in the given order;
        edges with either endpoint outside are dropped.
        """
        vertex_ids = np.asarray(vertex_ids, dtype=np.int64)
        local = np.full(self.num_vertices, -1, dtype=np.int64)
        local[vertex_ids] = np.arange(vertex_ids.size)
        starts = self.indptr[vertex_ids]
        ends = self.indptr[vertex_ids + 1]
        counts = ends - starts
        total = int(counts.sum())
        base = np.repeat(starts, counts)
        within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        eids = base + within
        ldst = local[self.dst[eids]]
        keep = ldst >= 0
        eids = eids[keep]
        ldst = ldst[keep]
        lsrc = np.repeat(np.arange(vertex_ids.size), counts)[keep]
        sub_indptr = np.zeros(vertex_ids.size + 1, dtype=np.int64)
        np.add.at(sub_indptr, lsrc + 1, 1)
        np.cumsum(sub_indptr, out=sub_indptr)
        return sub_indptr, ldst.astype(np.int64), eids, vertex_ids

    def __repr__(self):
        return (
            f"<DirectedGraph V={self.num_vertices} E={self.num_edges} "
            f"stencil={self.stencil.radius} frame={self.frame.name}>"
        )


def build_graph(domain: GridDomain, frame: Frame, stencil: StencilSpec) -> DirectedGraph:
    """Assemble the stencil graph (edges in (c, -c) pairs, snapped targets).

    Steps landing outside the domain (or snapping onto their source, or
    crossing a slit) are dropped.  Raises when an interior vertex ends up
    with no outgoing edge or the graph is disconnected.
    """
    if frame.n != domain.n:
        raise ContractError(f"frame is {frame.n}-D but domain is {domain.n}-D")
    coeffs = stencil.coefficients(frame.m)
    # index of -c for each c (coefficient list is negation-symmetric)
    lookup = {tuple(c): i for i, c in enumerate(coeffs)}
    neg_idx = np.array([lookup[tuple(-c)] for c in coeffs], dtype=np.int64)
    half = [i for i, c in enumerate(coeffs) if tuple(c) > tuple(-c)]

    V = domain.num_vertices
    pts = domain.coords
    rows = frame.coeff(pts)  # (V, m, n)
    src_parts, dst_parts, cid_parts = [], [], []
    for ci in half:
        c = coeffs[ci].astype(np.float64)
        disp = domain.h * np.einsum("m,kmn->kn", c, rows)
        target = pts + disp
        tidx = domain.snap(target)
        tvid = domain.vertex_at(tidx)
        valid = tvid >= 0
        valid &= tvid != np.arange(V)
        if domain.slit is not None and valid.any():
            sel = np.flatnonzero(valid)
            blocked = domain.blocks_segment(pts[sel], domain.coords[tvid[sel]])
            valid[sel[blocked]] = False
        a = np.flatnonzero(valid)
        b = tvid[a]
        src_parts.extend((a, b))
        dst_parts.extend((b, a))
        cid_parts.append(np.full(a.size, ci, dtype=np.int32))
        cid_parts.append(np.full(a.size, neg_idx[ci], dtype=np.int32))

    if not src_parts:
        raise ContractError("stencil produced no edges")
    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    cid = np.concatenate(cid_parts)
    order = np.lexsort((cid, dst, src))
    src, dst, cid = src[order], dst[order], cid[order]
    indptr = np.zeros(V + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)

    graph = DirectedGraph(domain, frame, stencil, indptr, dst.astype(np.int64), cid, coeffs)

    outdeg = np.diff(indptr)
    isolated = np.flatnonzero((outdeg == 0) & (domain.roles == 1))
    if isolated.size:
        raise ContractError(
            f"{isolated.size} interior vertices have no outgoing edge "
            f"(first at {domain.coords[isolated[0]].tolist()})"
        )
    # structural reachability: with reverse-closed edges, finite distances
    # exist for every level exactly when the edge support is connected
    probe = kernels().sssp(
        indptr, graph.dst, np.zeros(graph.num_edges), np.array([0], dtype=np.int64), np.zeros(1)
    )
    if not np.all(np.isfinite(probe)):
        raise ContractError("stencil graph is disconnected on this domain")
    return graph


def edge_cost(graph: DirectedGraph, edge_id: int, ham: Hamiltonian, lam: float, rule: str = "midpoint") -> float:
    """Cost of one edge at level lam (same quadrature as the bulk path)."""
    if not 0 <= edge_id < graph.num_edges:
        raise ContractError(f"edge id {edge_id} out of range")
    q = graph.h * graph.coeffs[graph.cidx[edge_id]].astype(np.float64)
    if not ham.x_dependent:
        return float(ham.support(None, lam, q))
    a = graph.coords[graph.edge_src[edge_id]]
    b = graph.coords[graph.dst[edge_id]]
    if rule == "midpoint":
        return float(ham.support(0.5 * (a + b), lam, q))
    return 0.5 * (float(ham.support(a, lam, q)) + float(ham.support(b, lam, q)))

"""Lattice discretization of domains and subdomains.

A GridDomain is a rectangular lattice clipped to a region (box, disk,
slit-disk, or a user predicate/mask).  Vertices are classified interior
(all 2n face neighbors present) or boundary (the remaining thin ring);
boundary vertices with no interior face-neighbor are pruned.  The slit
of the slit-disk removes *edges*, not vertices: any segment crossing the
slit, or ending on it from below, is impassable, while vertices on the
slit line stay meshed and bind to the upper side.  This keeps both faces
of the cut meshed, matching the intrinsic-distance picture where the cut
is a measure-zero obstacle you must walk around.

Lattice spacings are per-axis.  Frames whose horizontal steps move some
coordinates quadratically (Heisenberg vertical, Grushin second axis)
declare anisotropic spacings so that horizontal steps from lattice
points land exactly on lattice points; see Frame.lattice_spacings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError

_OUTSIDE, _INTERIOR, _BOUNDARY = 0, 1, 2


@dataclass(frozen=True)
class Slit:
    """Horizontal cut {(t, y0) : x_lo <= t < x_hi} in a 2-D domain.

    x_hi sits on the domain rim, so although the endpoint itself is not
    part of the cut, no path inside the domain can round that end; the
    edge-blocking therefore treats the right end as sealed (inclusive)
    and passage exists only around the left end.
    """

    y0: float
    x_lo: float
    x_hi: float


class GridDomain:
    """Lattice vertices with interior/boundary roles.

    Attributes:
        axes: per-axis 1-D coordinate arrays.
        spacings: per-axis lattice spacing.
        h: scalar horizontal resolution the spacings derive from.
        coords: (V, n) vertex coordinates (interior then boundary order
            is not guaranteed; use interior_ids/boundary_ids).
        lattice: (V, n) integer lattice positions.
        roles: (V,) uint8, 1 = interior, 2 = boundary.
        index_grid: dense lattice -> vertex id map (-1 where absent).
    """

    def __init__(self, axes, h, shape_name, region_mask, slit: Slit | None = None):
        self.axes = tuple(np.asarray(a, dtype=np.float64) for a in axes)
        self.n = len(self.axes)
        self.h = float(h)
        self.spacings = np.array([a[1] - a[0] if a.size > 1 else 1.0 for a in self.axes])
        self.origin = np.array([a[0] for a in self.axes])
        self.shape_name = shape_name
        self.slit = slit
        self.grid_shape = tuple(a.size for a in self.axes)

        role = np.where(region_mask, _BOUNDARY, _OUTSIDE).astype(np.uint8)
        interior = region_mask.copy()
        for ax in range(self.n):
            inner = np.zeros_like(region_mask)
            sl_lo = [slice(None)] * self.n
            sl_hi = [slice(None)] * self.n
            sl_mid = [slice(None)] * self.n
            sl_lo[ax] = slice(0, -2)
            sl_hi[ax] = slice(2, None)
            sl_mid[ax] = slice(1, -1)
            inner[tuple(sl_mid)] = region_mask[tuple(sl_lo)] & region_mask[tuple(sl_hi)]
            interior &= inner
        role[interior] = _INTERIOR

        # boundary vertices must touch the interior across a lattice face
        touches = np.zeros_like(interior)
        for ax in range(self.n):
            for off in (-1, 1):
                shifted = np.zeros_like(interior)
                src = [slice(None)] * self.n
                dstn = [slice(None)] * self.n
                if off == 1:
                    src[ax] = slice(0, -1)
                    dstn[ax] = slice(1, None)
                else:
                    src[ax] = slice(1, None)
                    dstn[ax] = slice(0, -1)
                shifted[tuple(dstn)] = interior[tuple(src)]
                touches |= shifted
        role[(role == _BOUNDARY) & ~touches] = _OUTSIDE

        if not interior.any():
            raise ContractError("domain has an empty interior at this resolution")
        self._check_connected(interior)

        self.role_grid = role
        present = role != _OUTSIDE
        self.lattice = np.argwhere(present).astype(np.int32)
        self.roles = role[present]
        self.coords = self.origin + self.lattice * self.spacings
        self.index_grid = np.full(self.grid_shape, -1, dtype=np.int64)
        self.index_grid[tuple(self.lattice.T)] = np.arange(self.lattice.shape[0])
        self.interior_ids = np.flatnonzero(self.roles == _INTERIOR)
        self.boundary_ids = np.flatnonzero(self.roles == _BOUNDARY)

    @staticmethod
    def _check_connected(interior):
        # BFS flood fill over lattice faces
        seed = np.argwhere(interior)[0]
        seen = np.zeros_like(interior)
        seen[tuple(seed)] = True
        frontier = seen.copy()
        n = interior.ndim
        while frontier.any():
            grown = np.zeros_like(frontier)
            for ax in range(n):
                for off in (-1, 1):
                    shifted = np.roll(frontier, off, axis=ax)
                    edge = [slice(None)] * n
                    edge[ax] = 0 if off == 1 else -1
                    shifted[tuple(edge)] = False
                    grown |= shifted
            frontier = grown & interior & ~seen
            seen |= frontier
        if not np.array_equal(seen & interior, interior):
            raise ContractError("domain interior is not edge-connected")

    # -- geometry helpers ---------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return self.lattice.shape[0]

    def snap(self, points):
        """Nearest lattice index per axis; no domain membership implied."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.rint((pts - self.origin) / self.spacings).astype(np.int64)

    def vertex_at(self, lattice_idx):
        """Vertex ids at integer lattice positions, -1 when absent/out of range."""
        idx = np.atleast_2d(np.asarray(lattice_idx, dtype=np.int64))
        ok = np.ones(idx.shape[0], dtype=bool)
        for ax in range(self.n):
            ok &= (idx[:, ax] >= 0) & (idx[:, ax] < self.grid_shape[ax])
        out = np.full(idx.shape[0], -1, dtype=np.int64)
        if ok.any():
            out[ok] = self.index_grid[tuple(idx[ok].T)]
        return out

    def vertex_near(self, point):
        """Vertex id nearest a coordinate point (ContractError when absent)."""
        vid = int(self.vertex_at(self.snap(point))[0])
        if vid < 0:
            raise ContractError(f"no domain vertex near {np.asarray(point).tolist()}")
        return vid

    def blocks_segment(self, a, b):
        """True where the open segment a-b is cut by the slit."""
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        b = np.atleast_2d(np.asarray(b, dtype=np.float64))
        if self.slit is None:
            return np.zeros(a.shape[0], dtype=bool)
        s = self.slit
        tol = 1e-9 * float(np.max(self.spacings))
        ya = a[:, 1] - s.y0
        yb = b[:, 1] - s.y0
        blocked = np.zeros(a.shape[0], dtype=bool)

        # genuine sign change only (coordinates within tol of the line count
        # as on it, not across it)
        crossing = ((ya > tol) & (yb < -tol)) | ((ya < -tol) & (yb > tol))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(crossing, ya / (ya - yb), 0.0)
        xi = a[:, 0] + t * (b[:, 0] - a[:, 0])
        blocked |= crossing & (xi >= s.x_lo - tol) & (xi <= s.x_hi + tol)

        # vertices on the slit line belong to the upper side: cut any edge
        # linking them to strictly lower points
        a_on = (np.abs(ya) <= tol) & (a[:, 0] >= s.x_lo - tol) & (a[:, 0] <= s.x_hi + tol)
        b_on = (np.abs(yb) <= tol) & (b[:, 0] >= s.x_lo - tol) & (b[:, 0] <= s.x_hi + tol)
        blocked |= a_on & (yb < -tol)
        blocked |= b_on & (ya < -tol)
        return blocked

    def interpolate(self, dense_values, points):
        """Multilinear interpolation of per-vertex values at arbitrary points.

        Returns (values, ok); ok=False marks points whose surrounding cell
        has a missing corner (outside the domain) or non-finite data.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        rel = (pts - self.origin) / self.spacings
        base = np.floor(rel + 1e-9).astype(np.int64)
        frac = rel - base
        # snap exact lattice hits to avoid touching a second cell
        exact = np.abs(frac) < 1e-9
        frac = np.where(exact, 0.0, frac)
        vals = np.zeros(pts.shape[0])
        ok = np.ones(pts.shape[0], dtype=bool)
        for corner in range(1 << self.n):
            offs = np.array([(corner >> ax) & 1 for ax in range(self.n)], dtype=np.int64)
            w = np.ones(pts.shape[0])
            for ax in range(self.n):
                w *= frac[:, ax] if offs[ax] else (1.0 - frac[:, ax])
            idx = base + offs
            vid = self.vertex_at(idx)
            active = w > 1e-13
            missing = active & (vid < 0)
            ok &= ~missing
            use = active & (vid >= 0)
            if use.any():
                v = dense_values[vid[use]]
                ok[use] &= np.isfinite(v)
                vals[use] += w[use] * np.where(np.isfinite(v), v, 0.0)
        return vals, ok

    def __repr__(self):
        return (
            f"<GridDomain {self.shape_name} n={self.n} h={self.h} "
            f"interior={self.interior_ids.size} boundary={self.boundary_ids.size}>"
        )


def build_domain(
    shape: str,
    box: Sequence[Sequence[float]],
    h: float,
    frame=None,
    radius: float | None = None,
    center: Sequence[float] | None = None,
    predicate: Callable | None = None,
    mask_points=None,
) -> GridDomain:
    """Build a GridDomain of the given shape over an axis-aligned box.

    ``frame`` (optional) supplies per-axis lattice spacings via
    ``frame.lattice_spacings(h)``; without it every axis uses h.  For
    disk shapes the default center is the box center and the default
    radius the smallest half-extent.
    """
    if h <= 0.0:
        raise ContractError("spacing h must be positive")
    box = np.asarray(box, dtype=np.float64)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] <= box[:, 0]):
        raise ContractError("box must be per-axis (lo, hi) with lo < hi")
    n = box.shape[0]
    spacings = np.full(n, float(h)) if frame is None else np.asarray(frame.lattice_spacings(h))
    if spacings.shape != (n,):
        raise ContractError(f"frame spacings have dimension {spacings.shape}, expected ({n},)")

    axes = []
    for ax in range(n):
        count = int(round((box[ax, 1] - box[ax, 0]) / spacings[ax])) + 1
        if count < 3:
            raise ContractError(f"axis {ax} resolves to fewer than 3 lattice points")
        axes.append(box[ax, 0] + np.arange(count) * spacings[ax])

    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    slit = None

    if shape == "box":
        region = np.ones(pts.shape[0], dtype=bool)
    elif shape in ("disk", "slit-disk"):
        if n != 2:
            raise ContractError(f"{shape} needs a 2-D box")
        c = np.asarray(center, dtype=np.float64) if center is not None else box.mean(axis=1)
        r = float(radius) if radius is not None else float(np.min(box[:, 1] - box[:, 0]) / 2.0)
        region = np.sum((pts - c) ** 2, axis=1) <= r * r * (1.0 + 1e-12)
        if shape == "slit-disk":
            slit = Slit(y0=float(c[1]), x_lo=float(c[0]), x_hi=float(c[0] + r))
    elif shape == "mask":
        if predicate is not None:
            region = np.asarray(predicate(pts), dtype=bool).reshape(-1)
        elif mask_points is not None:
            region = np.zeros(pts.shape[0], dtype=bool)
            tmp_shape = tuple(a.size for a in axes)
            origin = np.array([a[0] for a in axes])
            idx = np.rint((np.atleast_2d(mask_points) - origin) / spacings).astype(np.int64)
            keep = np.all((idx >= 0) & (idx < np.array(tmp_shape)), axis=1)
            flat = np.ravel_multi_index(tuple(idx[keep].T), tmp_shape)
            region[flat] = True
        else:
            raise ContractError("mask shape needs a predicate or mask_points")
    else:
        raise ContractError(f"unknown domain shape {shape!r}")

    region = region.reshape(tuple(a.size for a in axes))
    return GridDomain(axes, h, shape, region, slit=slit)


# ---------------------------------------------------------------------------
# subdomains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubDomain:
    """A vertex-set view of a parent graph: interior plus stencil frontier.

    The frontier (boundary) consists of parent-graph vertices one edge
    away from the selected interior.  Metric and extension operations on
    a SubDomain run on the induced edge set.
    """

    graph: object = field(repr=False)
    interior: np.ndarray
    boundary: np.ndarray
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def vertices(self) -> np.ndarray:
        return np.concatenate([self.interior, self.boundary])

    @property
    def is_whole_domain(self) -> bool:
        dom = self.graph.domain
        return self.interior.size == dom.interior_ids.size and np.array_equal(
            np.sort(self.interior), dom.interior_ids
        )


def whole_domain(graph) -> SubDomain:
    """The trivial subdomain: domain interior with the domain boundary ring."""
    dom = graph.domain
    return SubDomain(graph=graph, interior=dom.interior_ids.copy(), boundary=dom.boundary_ids.copy())


def _neighbors_out(graph, vid):
    return graph.dst[graph.indptr[vid] : graph.indptr[vid + 1]]


def restrict(graph, selector) -> SubDomain:
    """Restrict to interior vertices chosen by ``selector``.

    ``selector`` is either an array of vertex ids or a predicate over
    coordinates (k, n) -> bool mask.  The selection must be a nonempty,
    edge-connected subset of the parent interior; the result's boundary
    is its one-step stencil frontier.
    """
    dom = graph.domain
    if callable(selector):
        mask = np.asarray(selector(dom.coords), dtype=bool).reshape(-1)
        chosen = np.flatnonzero(mask & (dom.roles == _INTERIOR))
    else:
        chosen = np.unique(np.asarray(selector, dtype=np.int64))
        if chosen.size and not np.all(dom.roles[chosen] == _INTERIOR):
            raise ContractError("restriction selector must pick interior vertices")
    if chosen.size == 0:
        raise ContractError("restriction selected no interior vertices")

    in_sel = np.zeros(graph.num_vertices, dtype=bool)
    in_sel[chosen] = True

    # connectivity over induced edges
    seen = np.zeros(graph.num_vertices, dtype=bool)
    stack = [int(chosen[0])]
    seen[chosen[0]] = True
    count = 1
    while stack:
        v = stack.pop()
        for w in _neighbors_out(graph, v):
            if in_sel[w] and not seen[w]:
                seen[w] = True
                count += 1
                stack.append(int(w))
    if count != chosen.size:
        raise ContractError("restriction selected a disconnected interior")

    frontier_mask = np.zeros(graph.num_vertices, dtype=bool)
    for v in chosen:
        for w in _neighbors_out(graph, int(v)):
            if not in_sel[w]:
                frontier_mask[w] = True
    boundary = np.flatnonzero(frontier_mask)
    if boundary.size == 0:
        raise ContractError("restriction has an empty frontier (selected everything?)")
    return SubDomain(graph=graph, interior=chosen, boundary=boundary)

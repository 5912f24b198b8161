"""Horizontal vector-field frames and horizontal calculus on lattices.

A frame is a family X_1..X_m of smooth vector fields on R^n, given by
coefficient rows b_il(x) (X_i = sum_l b_il d/dx_l), declared to satisfy
the bracket-generating condition at some step k.  Three representatives
are built in:

* Euclidean(n): the coordinate frame, m = n, step 1.
* Heisenberg:   n = 3, m = 2, X1 = dx - (y/2) dz, X2 = dy + (x/2) dz.
* Grushin:      n = 2, m = 2, X1 = dx, X2 = x dy.

Each frame also declares its natural lattice spacings: the Heisenberg
vertical axis steps in units of h^2/2 and the Grushin second axis in
units of h^2, which makes every horizontal step between lattice points
land exactly on a lattice point (the step's displacement along the
anisotropic axis is an integer multiple of the fine spacing).  Without
this the snap-to-lattice of the graph builder would round away all
vertical motion at any usable resolution.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError


class Frame:
    """Base frame: subclasses fill n, m, step_k and coefficient rows."""

    n: int
    m: int
    step_k: int
    name: str = "frame"

    def coeff(self, x):
        """Coefficient rows at points x (k, n) -> (k, m, n)."""
        raise NotImplementedError

    def lattice_spacings(self, h: float) -> np.ndarray:
        return np.full(self.n, float(h))

    def __repr__(self):
        return f"<Frame {self.name} n={self.n} m={self.m} step={self.step_k}>"


class Euclidean(Frame):
    def __init__(self, n: int = 2):
        if n < 1:
            raise ContractError("ambient dimension must be >= 1")
        self.n = int(n)
        self.m = int(n)
        self.step_k = 1
        self.name = f"euclidean({n})"

    def coeff(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.broadcast_to(np.eye(self.n), (x.shape[0], self.n, self.n))


class Heisenberg(Frame):
    """First Heisenberg group frame; vertical reachable only via brackets."""

    def __init__(self):
        self.n = 3
        self.m = 2
        self.step_k = 2
        self.name = "heisenberg"

    def coeff(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        k = x.shape[0]
        b = np.zeros((k, 2, 3))
        b[:, 0, 0] = 1.0
        b[:, 0, 2] = -0.5 * x[:, 1]
        b[:, 1, 1] = 1.0
        b[:, 1, 2] = 0.5 * x[:, 0]
        return b

    def lattice_spacings(self, h):
        # a step h*(c1 X1 + c2 X2) from (i h, j h, k h^2/2) moves z by
        # (h/2)(c2 i - c1 j) h = integer * h^2/2: lattice-exact
        return np.array([h, h, h * h / 2.0])


class Grushin(Frame):
    """Grushin plane: X2 degenerates on the line x = 0."""

    def __init__(self):
        self.n = 2
        self.m = 2
        self.step_k = 2
        self.name = "grushin"

    def coeff(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        k = x.shape[0]
        b = np.zeros((k, 2, 2))
        b[:, 0, 0] = 1.0
        b[:, 1, 1] = x[:, 0]
        return b

    def lattice_spacings(self, h):
        return np.array([h, h * h])


_BUILTIN = {
    "heisenberg": Heisenberg,
    "grushin": Grushin,
}


def frame_by_name(name: str, n: int = 2) -> Frame:
    key = name.strip().lower()
    if key.startswith("euclidean"):
        if "(" in key:
            n = int(key.split("(")[1].rstrip(")"))
        return Euclidean(n)
    if key in _BUILTIN:
        return _BUILTIN[key]()
    raise ContractError(f"unknown frame {name!r}")


def horizontal_step(frame: Frame, x, c, h: float):
    """First-order horizontal move: x + h * (c^T . coeff(x)).

    ``c`` are frame coefficients (m,) or (k, m); h > 0 is the step length
    in coefficient time, so the move approximates flowing along
    sum_i c_i X_i for time h.
    """
    if h <= 0.0:
        raise ContractError("step length must be positive")
    x_arr = np.asarray(x, dtype=np.float64)
    scalar = x_arr.ndim == 1
    xb = np.atleast_2d(x_arr)
    cb = np.atleast_2d(np.asarray(c, dtype=np.float64))
    if cb.shape[1] != frame.m:
        raise ContractError(f"coefficient vector has dimension {cb.shape[1]}, expected {frame.m}")
    disp = np.einsum("km,kmn->kn", np.broadcast_to(cb, (xb.shape[0], frame.m)), frame.coeff(xb))
    out = xb + h * disp
    return out[0] if scalar else out


def horizontal_gradient(frame: Frame, domain, dense_values, vertex_ids=None):
    """Central differences of a field along the frame directions.

    For each requested vertex x and each i, evaluates the field at
    x +- h X_i(x) (multilinear interpolation for off-lattice targets,
    which only occurs on non-natural lattices) and forms the central
    difference.  Sides cut off by the domain (missing interpolation
    corners or a slit-blocked segment) fall back to a one-sided
    difference and flag the vertex; vertices with both sides missing get
    a zero component and are flagged.

    Returns (grad (k, m), flagged (k,) bool).
    """
    ids = domain.interior_ids if vertex_ids is None else np.asarray(vertex_ids, dtype=np.int64)
    pts = domain.coords[ids]
    k = ids.shape[0]
    h = domain.h
    coeffs = frame.coeff(pts)
    grad = np.zeros((k, frame.m))
    flagged = np.zeros(k, dtype=bool)
    center_vals = dense_values[ids]
    for i in range(frame.m):
        disp = h * coeffs[:, i, :]
        plus_pt = pts + disp
        minus_pt = pts - disp
        vp, okp = domain.interpolate(dense_values, plus_pt)
        vm, okm = domain.interpolate(dense_values, minus_pt)
        if domain.slit is not None:
            okp &= ~domain.blocks_segment(pts, plus_pt)
            okm &= ~domain.blocks_segment(pts, minus_pt)
        both = okp & okm
        grad[both, i] = (vp[both] - vm[both]) / (2.0 * h)
        only_p = okp & ~okm
        grad[only_p, i] = (vp[only_p] - center_vals[only_p]) / h
        only_m = okm & ~okp
        grad[only_m, i] = (center_vals[only_m] - vm[only_m]) / h
        flagged |= ~both
    return grad, flagged

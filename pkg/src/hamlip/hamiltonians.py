"""Hamiltonians H(x, p) and their sublevel-set geometry.

A Hamiltonian here is a nonnegative energy density on position x (in R^n)
and horizontal momentum coefficients p (in R^m) that vanishes at p = 0 and
is quasiconvex in p, so each sublevel set {p : H(x, p) <= lam} is convex
and contains the origin.  The geometry the metric layer consumes is:

* ``support(x, lam, q)``  -- the support function of the closed sublevel
  set in direction q.  This is the Finsler length density that prices a
  horizontal move with coefficient vector q.  The sup over an open
  sublevel set is not attained, so the closure's support function is used
  throughout (this is what makes the floor-of-norm example collapse to
  the unit-ball cost for every level below 1).
* ``radii(lam)``  -- the outer radius r_outer = sup{|p| : H <= lam} and
  inner radius r_inner = inf{|p| : H >= lam} of the level band, and
* ``lambda_h``  -- the smallest level at which r_inner becomes positive.

Built-ins cover the p-norm family, anisotropic quadratic energies,
the non-lower-semicontinuous floor-of-norm example, the asymmetric
half-disk example (whose sublevel set at level 1 is a half disk, making
leftward motion free), and a tabulated Hamiltonian backed by samples.

Vectorization contract: ``p``/``q`` may be a single vector (m,) or a
batch (k, m); ``x`` may be None (x-independent), a point (n,), or a batch
(k, n); ``lam`` is a scalar.  Results follow the batch shape.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError

_EPS = 1e-12


def _as_batch(v, dim, what):
    a = np.asarray(v, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
        scalar = True
    elif a.ndim == 2:
        scalar = False
    else:
        raise ContractError(f"{what} must be a vector or a batch of vectors, got shape {a.shape}")
    if a.shape[1] != dim:
        raise ContractError(f"{what} has dimension {a.shape[1]}, expected {dim}")
    return a, scalar


def _unbatch(values, scalar):
    return float(values[0]) if scalar else values


@dataclass(frozen=True)
class SublevelRadii:
    """Outer/inner Euclidean radii of the level band at ``lam``."""

    lam: float
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0.0 <= self.r_inner <= self.r_outer or np.isinf(self.r_inner)):
            raise ContractError(
                f"invalid radii at lam={self.lam}: r_inner={self.r_inner}, r_outer={self.r_outer}"
            )


class Hamiltonian:
    """Base class; subclasses implement value/support/radii.

    Attributes:
        m: horizontal dimension of p.
        name: descriptive name.
        lsc: declared lower semicontinuity in p (not verified numerically;
            it is a property of the definition, reported as such).
        x_dependent: whether H genuinely depends on x.
        scale_linear: True when support(x, lam, q) == lam * support(x, 1, q)
            exactly; enables closed-form level solves downstream.
    """

    m: int = 2
    name: str = "hamiltonian"
    lsc: bool = True
    x_dependent: bool = False
    scale_linear: bool = False

    def value(self, x, p):
        raise NotImplementedError

    def support(self, x, lam, q):
        raise NotImplementedError

    def radii(self, lam: float) -> SublevelRadii:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} m={self.m}>"


# ---------------------------------------------------------------------------
# built-ins
# ---------------------------------------------------------------------------


def _pnorm(a, expo):
    if np.isinf(expo):
        return np.max(np.abs(a), axis=-1)
    if expo == 2.0:
        return np.sqrt(np.sum(a * a, axis=-1))
    if expo == 1.0:
        return np.sum(np.abs(a), axis=-1)
    return np.sum(np.abs(a) ** expo, axis=-1) ** (1.0 / expo)


def _dual_exponent(expo):
    if expo == 1.0:
        return np.inf
    if np.isinf(expo):
        return 1.0
    return expo / (expo - 1.0)


class PNorm(Hamiltonian):
    """H(p) = scale * |p|_e for an exponent e in [1, inf]."""

    def __init__(self, exponent: float = 2.0, scale: float = 1.0, m: int = 2):
        if exponent < 1.0:
            raise ContractError("p-norm exponent must be >= 1")
        if scale <= 0.0:
            raise ContractError("scale must be positive")
        self.exponent = float(exponent)
        self.scale = float(scale)
        self.m = int(m)
        self.name = f"pnorm(e={exponent}, scale={scale})"
        self.lsc = True
        self.x_dependent = False
        self.scale_linear = True

    def value(self, x, p):
        p, scalar = _as_batch(p, self.m, "p")
        return _unbatch(self.scale * _pnorm(p, self.exponent), scalar)

    def support(self, x, lam, q):
        q, scalar = _as_batch(q, self.m, "q")
        rad = lam / self.scale
        return _unbatch(rad * _pnorm(q, _dual_exponent(self.exponent)), scalar)

    def radii(self, lam):
        rad = lam / self.scale
        e = self.exponent
        gap = 0.5 - (0.0 if np.isinf(e) else 1.0 / e)
        outer = rad * self.m ** max(0.0, gap)
        inner = rad * self.m ** min(0.0, gap)
        return SublevelRadii(lam, inner, outer)


class AnisotropicQuadratic(Hamiltonian):
    """H(x, p) = sqrt(p^T A(x) p) with A(x) symmetric positive definite.

    ``matrix`` is either a constant (m, m) array or a callable mapping a
    batch of points (k, n) to a stack (k, m, m).  For a callable matrix
    the global eigenvalue range must be supplied via ``eig_range``
    (needed for the level-band radii, which quantify over all x).
    """

    def __init__(self, matrix, m: int = 2, eig_range: tuple[float, float] | None = None):
        self.m = int(m)
        self.lsc = True
        self.scale_linear = True
        if callable(matrix):
            self._fn = matrix
            self._const = None
            self._const_inv = None
            self.x_dependent = True
            if eig_range is None:
                self._eig = None
            else:
                self._eig = (float(eig_range[0]), float(eig_range[1]))
            self.name = "anisotropic(A(x))"
        else:
            a = np.asarray(matrix, dtype=np.float64)
            if a.shape != (self.m, self.m):
                raise ContractError(f"A must be ({m}, {m}), got {a.shape}")
            if not np.allclose(a, a.T):
                raise ContractError("A must be symmetric")
            ev = np.linalg.eigvalsh(a)
            if ev[0] <= 0.0:
                raise ContractError("A must be positive definite")
            self._fn = None
            self._const = a
            self._const_inv = np.linalg.inv(a)
            self._eig = (float(ev[0]), float(ev[-1]))
            self.x_dependent = False
            self.name = f"anisotropic(diag-ish, eig in [{ev[0]:g}, {ev[-1]:g}])"

    def _mats(self, x, k):
        if self._const is not None:
            return np.broadcast_to(self._const, (k, self.m, self.m))
        if x is None:
            raise ContractError("x-dependent quadratic Hamiltonian requires x")
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        return np.asarray(self._fn(x), dtype=np.float64).reshape(k, self.m, self.m)

    def value(self, x, p):
        p, scalar = _as_batch(p, self.m, "p")
        a = self._mats(x, p.shape[0])
        quad = np.einsum("ki,kij,kj->k", p, a, p)
        return _unbatch(np.sqrt(np.maximum(quad, 0.0)), scalar)

    def support(self, x, lam, q):
        # support of the ellipsoid {p^T A p <= lam^2} is lam * sqrt(q^T A^-1 q)
        q, scalar = _as_batch(q, self.m, "q")
        if self._const_inv is not None:
            quad = np.einsum("ki,ij,kj->k", q, self._const_inv, q)
        else:
            a = self._mats(x, q.shape[0])
            sol = np.linalg.solve(a, q[:, :, None])[:, :, 0]
            quad = np.einsum("ki,ki->k", q, sol)
        return _unbatch(lam * np.sqrt(np.maximum(quad, 0.0)), scalar)

    def radii(self, lam):
        if self._eig is None:
            raise ContractError(
                "radii for an x-dependent quadratic Hamiltonian need eig_range at construction"
            )
        lo, hi = self._eig
        return SublevelRadii(lam, lam / np.sqrt(hi), lam / np.sqrt(lo))


class FloorNorm(Hamiltonian):
    """H(p) = floor(|p|): quasiconvex, vanishing at 0, not lower semicontinuous.

    The sublevel set {floor(|p|) <= lam} is the open ball of radius
    floor(lam) + 1; its closure prices every level in [0, 1) exactly like
    the unit ball, which is what the Rademacher-failure example exploits.
    """

    def __init__(self, m: int = 2):
        self.m = int(m)
        self.name = "floor-norm"
        self.lsc = False
        self.x_dependent = False
        self.scale_linear = False

    def value(self, x, p):
        p, scalar = _as_batch(p, self.m, "p")
        return _unbatch(np.floor(_pnorm(p, 2.0)), scalar)

    def support(self, x, lam, q):
        q, scalar = _as_batch(q, self.m, "q")
        rad = np.floor(lam) + 1.0
        return _unbatch(rad * _pnorm(q, 2.0), scalar)

    def radii(self, lam):
        outer = np.floor(lam) + 1.0
        inner = 0.0 if lam <= 0.0 else float(np.ceil(lam))
        return SublevelRadii(lam, inner, outer)


class HalfDisk(Hamiltonian):
    """H(p) = max(|p|, 2) for p1 < 0 and |p| for p1 >= 0, on R^2.

    Below level 2 the sublevel set is the closed right half-disk, so the
    support in any leftward direction ignores the horizontal component:
    moving left is free at level 1, and r_inner stays 0 up to level 2.
    """

    def __init__(self):
        self.m = 2
        self.name = "half-disk"
        self.lsc = True
        self.x_dependent = False
        self.scale_linear = False

    def value(self, x, p):
        p, scalar = _as_batch(p, self.m, "p")
        norms = _pnorm(p, 2.0)
        return _unbatch(np.where(p[:, 0] < 0.0, np.maximum(norms, 2.0), norms), scalar)

    def support(self, x, lam, q):
        q, scalar = _as_batch(q, self.m, "q")
        if lam >= 2.0:
            vals = lam * _pnorm(q, 2.0)
        else:
            # support of {p1 >= 0, |p| <= lam}: full norm for rightward q,
            # only the vertical component for leftward q
            vals = lam * np.where(q[:, 0] >= 0.0, _pnorm(q, 2.0), np.abs(q[:, 1]))
        return _unbatch(vals, scalar)

    def radii(self, lam):
        inner = 0.0 if lam <= 2.0 else lam
        return SublevelRadii(lam, inner, float(lam))


class Tabulated(Hamiltonian):
    """Hamiltonian backed by sampled (p, H) pairs, optionally per spatial cell.

    ``cells`` maps a cell index to (p_samples (S, m), values (S,)); the
    optional ``cell_of`` callable maps positions (k, n) to cell indices
    (constant 0 by default).  The support function is a direct
    maximization of p . q over the sampled sublevel set, so its accuracy
    is limited by the sample resolution; ``radii`` refuses to bound
    r_outer when the sublevel set reaches the outermost samples.
    """

    def __init__(self, cells, m: int = 2, cell_of: Callable | None = None, lsc: bool = True):
        self.m = int(m)
        self.name = "tabulated"
        self.lsc = bool(lsc)
        self.scale_linear = False
        self._cells = {}
        for idx, (samples, values) in cells.items():
            samples = np.asarray(samples, dtype=np.float64).reshape(-1, self.m)
            values = np.asarray(values, dtype=np.float64).reshape(-1)
            if samples.shape[0] != values.shape[0]:
                raise ContractError("sample/value count mismatch in tabulated Hamiltonian")
            if np.any(values < 0.0):
                raise ContractError("tabulated H values must be nonnegative")
            self._cells[int(idx)] = (samples, values)
        if not self._cells:
            raise ContractError("tabulated Hamiltonian needs at least one cell")
        self._cell_of = cell_of
        self.x_dependent = cell_of is not None and len(self._cells) > 1

    @classmethod
    def from_function(cls, fn, r_max: float, m: int = 2, n_theta: int = 721, n_r: int = 200):
        """Sample a 2-D Hamiltonian on a polar grid (origin included)."""
        if m != 2:
            raise ContractError("from_function only supports m=2")
        thetas = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
        rads = np.linspace(0.0, r_max, n_r + 1)[1:]
        pts = np.stack(
            [np.outer(rads, np.cos(thetas)).ravel(), np.outer(rads, np.sin(thetas)).ravel()],
            axis=1,
        )
        pts = np.vstack([np.zeros((1, 2)), pts])
        vals = np.asarray(fn(pts), dtype=np.float64).reshape(-1)
        return cls({0: (pts, vals)}, m=2)

    @classmethod
    def from_csv(cls, path, m: int = 2, cell_of: Callable | None = None):
        """Read rows ``cell, p1..pm, H`` (or ``p1..pm, H`` for a single cell)."""
        cells: dict[int, list] = {}
        with open(path, newline="") as f:
            for row in csv.reader(f):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                nums = [float(v) for v in row]
                if len(nums) == m + 2:
                    cell, payload = int(nums[0]), nums[1:]
                elif len(nums) == m + 1:
                    cell, payload = 0, nums
                else:
                    raise ContractError(f"bad tabulated row width {len(nums)} for m={m}")
                cells.setdefault(cell, []).append(payload)
        packed = {}
        for cell, rows in cells.items():
            arr = np.asarray(rows, dtype=np.float64)
            packed[cell] = (arr[:, :m], arr[:, m])
        return cls(packed, m=m, cell_of=cell_of)

    def _cell_ids(self, x, k):
        if self._cell_of is None or x is None:
            return np.zeros(k, dtype=np.int64)
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        return np.asarray(self._cell_of(x), dtype=np.int64).reshape(-1)

    def value(self, x, p):
        # nearest-sample lookup
        p, scalar = _as_batch(p, self.m, "p")
        ids = self._cell_ids(x, p.shape[0])
        out = np.empty(p.shape[0])
        for cell in np.unique(ids):
            samples, values = self._cells[int(cell)]
            rows = np.flatnonzero(ids == cell)
            d2 = np.sum((p[rows, None, :] - samples[None, :, :]) ** 2, axis=2)
            out[rows] = values[np.argmin(d2, axis=1)]
        return _unbatch(out, scalar)

    def support(self, x, lam, q):
        q, scalar = _as_batch(q, self.m, "q")
        ids = self._cell_ids(x, q.shape[0])
        out = np.zeros(q.shape[0])
        for cell in np.unique(ids):
            samples, values = self._cells[int(cell)]
            keep = values <= lam
            rows = np.flatnonzero(ids == cell)
            if not np.any(keep):
                out[rows] = 0.0  # sublevel collapses to {0} as far as samples say
                continue
            dots = q[rows] @ samples[keep].T
            out[rows] = np.maximum(np.max(dots, axis=1), 0.0)
        return _unbatch(out, scalar)

    def radii(self, lam):
        inner = np.inf
        outer = 0.0
        for samples, values in self._cells.values():
            norms = _pnorm(samples, 2.0)
            below = values <= lam
            above = values >= lam
            if np.any(below):
                r = float(np.max(norms[below]))
                if r >= float(np.max(norms)) - _EPS:
                    raise ContractError(
                        "unbounded sample: the sublevel set reaches the outermost "
                        "tabulated samples, so r_outer cannot be bounded"
                    )
                outer = max(outer, r)
            if np.any(above):
                inner = min(inner, float(np.min(norms[above])))
        return SublevelRadii(lam, inner, outer)


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def eval_h(h: Hamiltonian, x, p):
    """Evaluate H(x, p)."""
    return h.value(x, p)


def support_fn(h: Hamiltonian, x, lam: float, q):
    """Support function of the closed sublevel set {H(x, .) <= lam} at q."""
    if lam < 0.0:
        raise ContractError("support level must be >= 0")
    return h.support(x, float(lam), q)


def radii(h: Hamiltonian, lam: float) -> SublevelRadii:
    """Outer/inner Euclidean radii of the level band at lam."""
    if lam < 0.0:
        raise ContractError("level must be >= 0")
    return h.radii(float(lam))


def lambda_h(h: Hamiltonian, tol: float = 1e-9, cap: float = 2.0**16) -> float:
    """Smallest level at which r_inner becomes positive, by bisection.

    r_inner(0) = 0 always (p = 0 satisfies H >= 0), so 0 brackets from
    below; the upper bracket is found by doubling.  Fails with a
    ContractError when no positive r_inner shows up below ``cap``.
    """
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    hi = 1.0
    while h.radii(hi).r_inner <= 0.0:
        hi *= 2.0
        if hi > cap:
            raise ContractError(f"lambda_h undetectable: r_inner stayed 0 up to cap {cap}")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h.radii(mid).r_inner > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass
class SampleSpec:
    """Sampling plan for check_assumptions."""

    n_x: int = 16
    n_p: int = 64
    n_t: int = 8
    x_box: Sequence[Sequence[float]] | None = None  # per-axis (lo, hi); None -> unit box
    x_dim: int = 2
    p_radius: float = 4.0
    levels: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 4.0)
    seed: int = 0


@dataclass
class AssumptionReport:
    name: str
    lsc_flag: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_assumptions(h: Hamiltonian, spec: SampleSpec | None = None) -> AssumptionReport:
    """Sample-check quasiconvexity, H(x, 0) = 0, and support monotonicity.

    Lower semicontinuity cannot be certified from samples; the report
    carries the declared flag only.  Violations are report entries, not
    exceptions.
    """
    spec = spec or SampleSpec()
    rng = np.random.default_rng(spec.seed)
    if spec.x_box is None:
        box = np.array([[0.0, 1.0]] * spec.x_dim)
    else:
        box = np.asarray(spec.x_box, dtype=np.float64)
    xs = rng.uniform(box[:, 0], box[:, 1], size=(spec.n_x, box.shape[0]))
    report = AssumptionReport(name=h.name, lsc_flag=h.lsc)

    zeros = np.zeros((spec.n_x, h.m))
    at_zero = np.atleast_1d(h.value(xs, zeros))
    bad = np.flatnonzero(np.abs(at_zero) > _EPS)
    for i in bad:
        report.violations.append(
            {
                "assumption": "vanishes-at-zero",
                "x": xs[i].tolist(),
                "value_at_zero": float(at_zero[i]),
            }
        )

    for _ in range(spec.n_t):
        p = rng.uniform(-spec.p_radius, spec.p_radius, size=(spec.n_p, h.m))
        q = rng.uniform(-spec.p_radius, spec.p_radius, size=(spec.n_p, h.m))
        t = rng.uniform(0.0, 1.0)
        xi = xs[rng.integers(0, spec.n_x)]
        xb = np.broadcast_to(xi, (spec.n_p, box.shape[0]))
        lhs = np.atleast_1d(h.value(xb, t * p + (1.0 - t) * q))
        rhs = np.maximum(np.atleast_1d(h.value(xb, p)), np.atleast_1d(h.value(xb, q)))
        bad = np.flatnonzero(lhs > rhs + 1e-9)
        for i in bad[:4]:
            report.violations.append(
                {
                    "assumption": "quasiconvexity",
                    "x": xi.tolist(),
                    "p": p[i].tolist(),
                    "q": q[i].tolist(),
                    "t": float(t),
                    "excess": float(lhs[i] - rhs[i]),
                }
            )

    levels = sorted(spec.levels)
    dirs = rng.normal(size=(spec.n_p, h.m))
    xb = np.broadcast_to(xs[0], (spec.n_p, box.shape[0]))
    prev = None
    for lam in levels:
        cur = np.atleast_1d(h.support(xb, lam, dirs))
        if np.any(cur < -_EPS):
            report.violations.append({"assumption": "support>=0", "level": lam})
        if prev is not None and np.any(cur < prev - 1e-9):
            report.violations.append({"assumption": "support monotone in level", "level": lam})
        prev = cur
    return report

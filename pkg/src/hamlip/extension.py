"""Boundary compatibility, McShane extensions, and the minimizer algebra.

mu(g, boundary) is the least level at which the boundary data is
1-Lipschitz with respect to the subdomain's intrinsic distance:
g(y) - g(x) <= d_mu(x, y) over boundary pairs.  At that level the upper
and lower McShane envelopes

    S+(x) = min_y g(y) + d_mu(y, x)      S-(x) = max_y g(y) - d_mu(x, y)

extend g with optimal sup-norm energy, and convex combinations, maxima,
minima and subdomain gluings of extensions stay within the same energy
budget (that is the quasiconvexity of H doing its one job).

For Hamiltonians with exact level scaling (support(lam) = lam * support(1),
the 1-homogeneous family) mu has a closed form: the max boundary ratio
(g(y) - g(x)) / d_1(x, y).  Everything else bisects on the level, with
the upper bracket found by doubling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .domains import SubDomain
from .errors import ContractError
from .fields import BoundaryFunction, ScalarField
from .frames import horizontal_gradient
from .hamiltonians import Hamiltonian

_FEAS_GUARD = 1e-12
_DOUBLING_CAP = 2.0**20


def _sub_csr(sub: SubDomain):
    """Induced CSR over (interior, boundary) with locals in that order."""
    if "csr" not in sub.cache:
        verts = np.concatenate([sub.interior, sub.boundary])
        sub.cache["csr"] = sub.graph.subgraph(verts)
    return sub.cache["csr"]


def _sub_reverse(sub: SubDomain):
    if "rcsr" not in sub.cache:
        indptr, ldst, _eids, verts = _sub_csr(sub)
        lsrc = np.repeat(np.arange(verts.size), np.diff(indptr))
        order = np.argsort(ldst, kind="stable")  # local edge positions
        rindptr = np.zeros(verts.size + 1, dtype=np.int64)
        np.add.at(rindptr, ldst[order] + 1, 1)
        np.cumsum(rindptr, out=rindptr)
        sub.cache["rcsr"] = (rindptr, lsrc[order], order)
    return sub.cache["rcsr"]


def _boundary_locals(sub: SubDomain) -> np.ndarray:
    return np.arange(sub.interior.size, sub.interior.size + sub.boundary.size, dtype=np.int64)


def _align_boundary(sub: SubDomain, g: BoundaryFunction) -> np.ndarray:
    """g values reordered to sub.boundary order."""
    lookup = {int(v): float(x) for v, x in zip(g.vertex_ids, g.values)}
    try:
        return np.array([lookup[int(v)] for v in sub.boundary])
    except KeyError as e:
        raise ContractError(f"boundary data missing vertex {e.args[0]}") from None


@dataclass(frozen=True)
class CompatibilityResult:
    """Least compatible level with the pair that pins it down."""

    mu: float
    witness: tuple[int, int]
    iterations: int
    tol: float

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "witness": [int(self.witness[0]), int(self.witness[1])],
            "iterations": self.iterations,
            "tol": self.tol,
        }


def _boundary_matrix(sub: SubDomain, ham: Hamiltonian, lam: float, rule: str) -> np.ndarray:
    """d_lam between boundary vertices inside the subdomain."""
    indptr, ldst, eids, verts = _sub_csr(sub)
    costs = sub.graph.costs(ham, lam, rule)[eids]
    blocals = _boundary_locals(sub)
    mat = kernels().sssp_many(indptr, ldst, costs, blocals)
    return mat[:, blocals]


def mu_threshold(
    sub: SubDomain,
    ham: Hamiltonian,
    g: BoundaryFunction,
    tol: float = 1e-6,
    rule: str = "midpoint",
) -> CompatibilityResult:
    """Least level lam with g(y) - g(x) <= d_lam(x, y) on boundary pairs."""
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    if sub.boundary.size == 0:
        raise ContractError("subdomain has no boundary vertices")
    gv = _align_boundary(sub, g)
    dg = gv[None, :] - gv[:, None]  # dg[i, j] = g(j) - g(i)

    if ham.scale_linear:
        base = _boundary_matrix(sub, ham, 1.0, rule)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((dg > 0.0) & (base > 0.0), dg / base, 0.0)
        impossible = (dg > 0.0) & (base == 0.0)
        if impossible.any():
            i, j = np.argwhere(impossible)[0]
            raise ContractError(
                "incompatible boundary data: a zero-cost boundary pair has a "
                f"positive jump (vertices {int(sub.boundary[i])} -> {int(sub.boundary[j])})"
            )
        flat = int(np.argmax(ratio))
        i, j = np.unravel_index(flat, ratio.shape)
        mu = float(ratio[i, j])
        mu_safe = mu * (1.0 + _FEAS_GUARD)  # one-sided fp guard so S+- hit g exactly
        return CompatibilityResult(
            mu=mu_safe,
            witness=(int(sub.boundary[i]), int(sub.boundary[j])),
            iterations=0,
            tol=mu * _FEAS_GUARD,
        )

    guard = _FEAS_GUARD * max(1.0, float(np.max(np.abs(gv))))

    def slack(lam: float) -> np.ndarray:
        return dg - _boundary_matrix(sub, ham, lam, rule)

    def feasible(lam: float) -> bool:
        s = slack(lam)
        return bool(np.nanmax(np.where(np.isnan(s), -np.inf, s)) <= guard)

    iterations = 0
    if feasible(0.0):
        return CompatibilityResult(mu=0.0, witness=_witness(slack(0.0), sub), iterations=0, tol=0.0)
    hi = 1.0
    while not feasible(hi):
        hi *= 2.0
        iterations += 1
        if hi > _DOUBLING_CAP:
            raise ContractError(
                f"incompatible boundary data: infeasible up to level {_DOUBLING_CAP}"
            )
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        iterations += 1
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return CompatibilityResult(
        mu=hi, witness=_witness(slack(hi), sub), iterations=iterations, tol=hi - lo
    )


def _witness(slack: np.ndarray, sub: SubDomain) -> tuple[int, int]:
    s = np.where(np.isnan(slack) | np.isinf(slack), -np.inf, slack)
    np.fill_diagonal(s, -np.inf)
    if not np.isfinite(s).any():
        return (int(sub.boundary[0]), int(sub.boundary[0]))
    i, j = np.unravel_index(int(np.argmax(s)), s.shape)
    return (int(sub.boundary[i]), int(sub.boundary[j]))


def _mcshane(sub, ham, g, mu, rule, upper: bool) -> ScalarField:
    check_above_lambda_h(ham, mu)
    gv = _align_boundary(sub, g)
    indptr, ldst, eids, verts = _sub_csr(sub)
    costs = sub.graph.costs(ham, mu, rule)[eids]
    blocals = _boundary_locals(sub)
    ker = kernels()
    if upper:
        # min_y g(y) + d(y, x): multi-source run with potentials g
        vals = ker.sssp(indptr, ldst, costs, blocals, gv)
    else:
        # max_y g(y) - d(x, y): reversed run with potentials -g
        rindptr, rdst, remap = _sub_reverse(sub)
        vals = -ker.sssp(rindptr, rdst, costs[remap], blocals, -gv)
    side = "upper" if upper else "lower"
    if not np.all(np.isfinite(vals[: sub.interior.size])):
        raise ContractError(
            f"mcshane_{side}: some interior vertex is unreachable from every "
            "boundary vertex (graph connectivity violated)"
        )
    bvals = vals[blocals]
    agree = np.max(np.abs(bvals - gv)) if gv.size else 0.0
    if agree > 1e-9 * max(1.0, float(np.max(np.abs(gv)))):
        raise ContractError(
            f"mcshane_{side}: boundary values move by {agree:.3g}; "
            "the level is below the compatibility threshold"
        )
    vals[blocals] = gv  # exact boundary agreement
    return ScalarField(
        vertex_ids=verts.copy(),
        values=vals,
        provenance={
            "computed_by": f"mcshane_{side}",
            "mu": float(mu),
            "hamiltonian": ham.name,
        },
    )


def mcshane_upper(sub, ham, g, mu, rule: str = "midpoint") -> ScalarField:
    """Largest extension of g that is 1-Lipschitz for d_mu (equals g on the boundary)."""
    return _mcshane(sub, ham, g, mu, rule, upper=True)


def mcshane_lower(sub, ham, g, mu, rule: str = "midpoint") -> ScalarField:
    """Smallest such extension."""
    return _mcshane(sub, ham, g, mu, rule, upper=False)


@dataclass(frozen=True)
class EnergyReport:
    """sup-norm energy of a field: max_x H(x, Xu(x)) over the interior.

    The headline value excludes vertices where differencing fell back to
    one-sided stencils (domain cuts or missing neighbors); their separate
    max is reported alongside.
    """

    value: float
    flagged_value: float
    argmax_vertex: int
    n_interior: int
    n_flagged: int

    def __float__(self):
        return self.value


def energy(u: ScalarField, sub: SubDomain, ham: Hamiltonian) -> EnergyReport:
    graph = sub.graph
    dense = u.dense(graph.num_vertices)
    ids = np.asarray(sub.interior, dtype=np.int64)
    if not np.all(np.isfinite(dense[ids])):
        raise ContractError("energy needs finite values on the subdomain interior")
    grad, flagged = horizontal_gradient(graph.frame, graph.domain, dense, ids)
    vals = np.atleast_1d(ham.value(graph.coords[ids], grad))
    clean = ~flagged
    if clean.any():
        pos = int(np.argmax(np.where(clean, vals, -np.inf)))
        headline = float(vals[pos])
        argmax_vertex = int(ids[pos])
    else:
        headline, argmax_vertex = 0.0, -1
    flagged_max = float(np.max(vals[flagged])) if flagged.any() else 0.0
    return EnergyReport(
        value=headline,
        flagged_value=flagged_max,
        argmax_vertex=argmax_vertex,
        n_interior=int(ids.size),
        n_flagged=int(np.count_nonzero(flagged)),
    )


def _check_same_support(u: ScalarField, v: ScalarField):
    if not u.same_support(v):
        raise ContractError("fields live on different vertex sets")


def blend(u: ScalarField, v: ScalarField, t: float) -> ScalarField:
    if not 0.0 <= t <= 1.0:
        raise ContractError("blend weight must be in [0, 1]")
    _check_same_support(u, v)
    # fused form: exact when u == v
    return ScalarField(
        vertex_ids=u.vertex_ids.copy(),
        values=v.values + t * (u.values - v.values),
        provenance={"computed_by": "blend", "t": float(t),
                    "operands": [u.provenance.get("computed_by"), v.provenance.get("computed_by")]},
    )


def pointwise_max(u: ScalarField, v: ScalarField) -> ScalarField:
    _check_same_support(u, v)
    return ScalarField(
        vertex_ids=u.vertex_ids.copy(),
        values=np.maximum(u.values, v.values),
        provenance={"computed_by": "pointwise_max",
                    "operands": [u.provenance.get("computed_by"), v.provenance.get("computed_by")]},
    )


def pointwise_min(u: ScalarField, v: ScalarField) -> ScalarField:
    _check_same_support(u, v)
    return ScalarField(
        vertex_ids=u.vertex_ids.copy(),
        values=np.minimum(u.values, v.values),
        provenance={"computed_by": "pointwise_min",
                    "operands": [u.provenance.get("computed_by"), v.provenance.get("computed_by")]},
    )


def glue(u: ScalarField, sub_v: SubDomain, replacement: ScalarField, tol: float = 1e-9) -> ScalarField:
    """u outside V, replacement inside V; seams must agree within tol."""
    dense_u = u.dense(sub_v.graph.num_vertices)
    dense_r = replacement.dense(sub_v.graph.num_vertices)
    seam = np.asarray(sub_v.boundary, dtype=np.int64)
    if not np.all(np.isfinite(dense_r[np.concatenate([sub_v.interior, seam])])):
        raise ContractError("replacement does not cover the subdomain")
    gaps = np.abs(dense_u[seam] - dense_r[seam])
    if gaps.size and float(np.max(gaps)) > tol:
        k = int(np.argmax(gaps))
        raise ContractError(
            f"glue seam mismatch: max gap {float(np.max(gaps)):.3g} at vertex "
            f"{int(seam[k])} exceeds tol {tol:.3g}"
        )
    out = u.values.copy()
    order = np.argsort(u.vertex_ids, kind="stable")
    pos_sorted = np.searchsorted(u.vertex_ids[order], sub_v.interior)
    if np.any(pos_sorted >= order.size) or not np.array_equal(
        u.vertex_ids[order][pos_sorted], sub_v.interior
    ):
        raise ContractError("glue target does not cover the subdomain interior")
    out[order[pos_sorted]] = dense_r[sub_v.interior]
    return ScalarField(
        vertex_ids=u.vertex_ids.copy(),
        values=out,
        provenance={"computed_by": "glue", "base": u.provenance.get("computed_by"),
                    "patch": replacement.provenance.get("computed_by")},
    )


def check_above_lambda_h(ham: Hamiltonian, mu: float) -> None:
    """Reject positive levels at or below lambda_H (degenerate topology).

    r_inner(mu) = 0 with mu > 0 means mu <= lambda_H: zero-cost moves of
    positive Euclidean length exist, and the extension construction is
    not backed there.  mu = 0 (constant data) stays allowed.
    """
    try:
        r_in = ham.radii(mu).r_inner
    except ContractError:
        return  # sampled Hamiltonians may refuse to bound radii; no veto then
    if r_in <= 0.0 and mu > 0.0:
        from .hamiltonians import lambda_h

        lh = lambda_h(ham, tol=1e-9)
        raise ContractError(
            f"boundary data needs level {mu:.6g} <= lambda_H ~ {lh:.6g}; "
            "extensions below lambda_H are out of scope"
        )

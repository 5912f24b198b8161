"""hamlip: intrinsic pseudo-distances for quasiconvex Hamiltonians on lattices.

The library discretizes a domain as a directed horizontal-stencil graph,
turns the sublevel-set support function of a Hamiltonian H(x, p) into
edge costs, and computes the induced pseudo-distances d_lambda by shortest
paths.  On top of the metric layer it provides boundary-compatibility
thresholds, McShane extensions, the minimizer algebra, and a Perron-style
local-replacement solver for discrete absolute minimizers, plus a
verification suite reproducing the structural identities, bounds and
counterexamples the construction is built on.
"""

from .errors import ConfigError, ContractError, VerificationFailure
from .hamiltonians import (
    AnisotropicQuadratic,
    FloorNorm,
    HalfDisk,
    Hamiltonian,
    PNorm,
    SublevelRadii,
    Tabulated,
    check_assumptions,
    eval_h,
    lambda_h,
    radii,
    support_fn,
)
from .frames import Euclidean, Frame, Grushin, Heisenberg, horizontal_gradient, horizontal_step
from .domains import GridDomain, SubDomain, build_domain, restrict
from .fields import BoundaryFunction, DistanceField, ScalarField
from .graph import DirectedGraph, StencilSpec, build_graph, edge_cost
from .metric import all_pairs, cc_distance, dist_from, dist_to, midpoint_defect, path_length
from .extension import (
    CompatibilityResult,
    blend,
    energy,
    glue,
    mcshane_lower,
    mcshane_upper,
    mu_threshold,
    pointwise_max,
    pointwise_min,
)
from .amle import SolverParams, SolverReport, local_energy_profile, sandwich_check, solve_amle

__version__ = "0.1.0"

__all__ = [
    "AnisotropicQuadratic",
    "BoundaryFunction",
    "CompatibilityResult",
    "ConfigError",
    "ContractError",
    "DirectedGraph",
    "DistanceField",
    "Euclidean",
    "FloorNorm",
    "Frame",
    "GridDomain",
    "Grushin",
    "HalfDisk",
    "Hamiltonian",
    "Heisenberg",
    "PNorm",
    "ScalarField",
    "SolverParams",
    "SolverReport",
    "StencilSpec",
    "SubDomain",
    "SublevelRadii",
    "Tabulated",
    "VerificationFailure",
    "all_pairs",
    "blend",
    "build_domain",
    "build_graph",
    "cc_distance",
    "check_assumptions",
    "dist_from",
    "dist_to",
    "edge_cost",
    "energy",
    "eval_h",
    "glue",
    "horizontal_gradient",
    "horizontal_step",
    "lambda_h",
    "local_energy_profile",
    "mcshane_lower",
    "mcshane_upper",
    "midpoint_defect",
    "mu_threshold",
    "path_length",
    "pointwise_max",
    "pointwise_min",
    "radii",
    "restrict",
    "sandwich_check",
    "solve_amle",
    "support_fn",
]

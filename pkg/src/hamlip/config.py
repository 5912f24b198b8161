"""Run-configuration parsing and validation (TOML or JSON).

The schema is strict: unknown keys anywhere are rejected before any
computation starts, so a typo cannot silently fall back to a default.
Boundary data comes either from a CSV of (coordinates, value) rows or
from an arithmetic expression over the coordinates x1..xn evaluated with
a restricted numpy namespace.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amle import SolverParams
from .errors import ConfigError
from .frames import frame_by_name
from .hamiltonians import AnisotropicQuadratic, FloorNorm, HalfDisk, PNorm, Tabulated

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_TOP_KEYS = {
    "domain", "frame", "hamiltonian", "stencil_radius", "quadrature",
    "boundary", "solver", "lambda", "source", "target", "direction",
    "subset", "output_dir", "seed", "threads",
}
_DOMAIN_KEYS = {"shape", "box", "h", "radius", "center", "mask_csv"}
_HAM_KEYS = {"kind", "exponent", "scale", "m", "matrix", "csv", "r_max", "n_theta", "n_r"}
_BOUNDARY_KEYS = {"expression", "csv"}
_SOLVER_KEYS = {"radii", "sweep_order", "seed", "max_sweeps", "eps_res", "blend_rule", "mu_tol"}

_SAFE_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "hypot": np.hypot, "maximum": np.maximum,
    "minimum": np.minimum, "where": np.where, "pi": np.pi, "e": np.e,
    "arctan2": np.arctan2, "floor": np.floor, "ceil": np.ceil, "sign": np.sign,
}


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


@dataclass
class RunConfig:
    """Validated run configuration (construction happens lazily)."""

    domain: dict
    frame_name: str
    hamiltonian: dict
    stencil_radius: int = 1
    quadrature: str = "midpoint"
    boundary: dict | None = None
    solver: dict = field(default_factory=dict)
    lam: float | None = None
    source: list | None = None
    target: list | None = None
    direction: str = "from"
    subset: str = "boundary"
    output_dir: str = "out"
    seed: int = 0
    threads: int | None = None
    base_dir: Path = Path(".")

    def build_frame(self):
        n = len(self.domain["box"])
        return frame_by_name(self.frame_name, n=n)

    def build_hamiltonian(self, m: int):
        spec = self.hamiltonian
        kind = spec["kind"]
        if kind == "pnorm":
            return PNorm(spec.get("exponent", 2.0), spec.get("scale", 1.0), m=m)
        if kind == "anisotropic":
            return AnisotropicQuadratic(np.asarray(spec["matrix"], dtype=np.float64), m=m)
        if kind == "floor":
            return FloorNorm(m=m)
        if kind == "halfdisk":
            if m != 2:
                raise ConfigError("halfdisk Hamiltonian needs m = 2")
            return HalfDisk()
        if kind == "tabulated":
            return Tabulated.from_csv(self.base_dir / spec["csv"], m=spec.get("m", m))
        raise ConfigError(f"unknown hamiltonian kind {kind!r}")

    def build_domain(self, frame):
        from .domains import build_domain

        d = self.domain
        return build_domain(
            d["shape"],
            d["box"],
            d["h"],
            frame=frame,
            radius=d.get("radius"),
            center=d.get("center"),
            mask_points=_load_mask(self.base_dir / d["mask_csv"]) if "mask_csv" in d else None,
        )

    def build_solver_params(self) -> SolverParams:
        s = dict(self.solver)
        s.setdefault("seed", self.seed)
        return SolverParams(**s)

    def boundary_values(self, sub):
        from .fields import BoundaryFunction

        if self.boundary is None:
            raise ConfigError("this subcommand needs a [boundary] section")
        if "csv" in self.boundary:
            path = self.base_dir / self.boundary["csv"]
            if not path.exists():
                raise ConfigError(f"boundary CSV {path} does not exist")
            return BoundaryFunction.from_csv(sub, path)
        expr = self.boundary["expression"]
        n = len(self.domain["box"])

        def fn(coords):
            env = dict(_SAFE_FUNCS)
            for i in range(n):
                env[f"x{i + 1}"] = coords[:, i]
            try:
                vals = eval(expr, {"__builtins__": {}}, env)  # noqa: S307 - restricted namespace
            except Exception as e:
                raise ConfigError(f"boundary expression failed: {e}") from e
            return np.broadcast_to(np.asarray(vals, dtype=np.float64), (coords.shape[0],))

        return BoundaryFunction.from_callable(sub, fn)


def _load_mask(path: Path):
    import csv as _csv

    rows = []
    with open(path, newline="") as f:
        for row in _csv.reader(f):
            if row and not row[0].lstrip().startswith("#"):
                rows.append([float(v) for v in row])
    return np.asarray(rows, dtype=np.float64)


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(value)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        if path.suffix == ".json":
            raw = json.loads(path.read_text())
        elif path.suffix == ".toml":
            raw = tomllib.loads(path.read_text())
        else:
            raise ConfigError(f"config must be .toml or .json, got {path.suffix!r}")
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"config parse error: {e}") from e
    return validate_config(raw, base_dir=path.parent)


def validate_config(raw: dict, base_dir=Path(".")) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table/object")
    _reject_unknown(raw, _TOP_KEYS, "config root")
    if "domain" not in raw or "frame" not in raw or "hamiltonian" not in raw:
        raise ConfigError("config needs domain, frame and hamiltonian sections")

    dom = raw["domain"]
    _reject_unknown(dom, _DOMAIN_KEYS, "[domain]")
    if "shape" not in dom or "box" not in dom or "h" not in dom:
        raise ConfigError("[domain] needs shape, box and h")
    if dom["shape"] not in ("box", "disk", "slit-disk", "mask"):
        raise ConfigError(f"unknown domain shape {dom['shape']!r}")
    box = dom["box"]
    if not isinstance(box, list) or not all(isinstance(b, list) and len(b) == 2 for b in box):
        raise ConfigError("[domain].box must be a list of [lo, hi] pairs")
    h = _as_float(dom["h"], "[domain].h")
    if h <= 0:
        raise ConfigError("[domain].h must be positive")

    ham = raw["hamiltonian"]
    _reject_unknown(ham, _HAM_KEYS, "[hamiltonian]")
    if "kind" not in ham:
        raise ConfigError("[hamiltonian] needs a kind")

    boundary = raw.get("boundary")
    if boundary is not None:
        _reject_unknown(boundary, _BOUNDARY_KEYS, "[boundary]")
        if ("expression" in boundary) == ("csv" in boundary):
            raise ConfigError("[boundary] needs exactly one of expression or csv")

    solver = raw.get("solver", {})
    _reject_unknown(solver, _SOLVER_KEYS, "[solver]")

    quadrature = raw.get("quadrature", "midpoint")
    if quadrature not in ("midpoint", "trapezoid"):
        raise ConfigError("quadrature must be midpoint or trapezoid")
    direction = raw.get("direction", "from")
    if direction not in ("from", "to"):
        raise ConfigError("direction must be 'from' or 'to'")
    subset = raw.get("subset", "boundary")
    if subset not in ("boundary", "interior", "all"):
        raise ConfigError("subset must be boundary, interior or all")

    stencil_radius = raw.get("stencil_radius", 1)
    if not isinstance(stencil_radius, int) or stencil_radius < 1:
        raise ConfigError("stencil_radius must be a positive integer")

    lam = raw.get("lambda")
    if lam is not None:
        lam = _as_float(lam, "lambda")
        if lam < 0:
            raise ConfigError("lambda must be >= 0")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    threads = raw.get("threads")
    if threads is not None and (not isinstance(threads, int) or threads < 1):
        raise ConfigError("threads must be a positive integer")

    tuple(map(tuple, box))  # materialize to catch ragged rows early
    return RunConfig(
        domain=dom,
        frame_name=raw["frame"],
        hamiltonian=ham,
        stencil_radius=stencil_radius,
        quadrature=quadrature,
        boundary=boundary,
        solver=solver,
        lam=lam,
        source=raw.get("source"),
        target=raw.get("target"),
        direction=direction,
        subset=subset,
        output_dir=raw.get("output_dir", "out"),
        seed=seed,
        threads=threads,
        base_dir=Path(base_dir),
    )

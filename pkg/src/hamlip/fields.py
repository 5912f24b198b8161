"""Per-vertex fields, boundary data, and their on-disk formats.

Fields serialize as CSV with header ``x1,..,xn,value`` (one row per
vertex, +inf as the literal ``inf``) next to a JSON metadata sidecar.
Sidecars are deterministic: reruns with the same config and seed must
produce byte-identical outputs, so no wall-clock data goes in them.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError


def _fmt(v: float) -> str:
    if np.isposinf(v):
        return "inf"
    if np.isneginf(v):
        return "-inf"
    return repr(float(v))


@dataclass
class ScalarField:
    """Real values on an explicit vertex set of a graph."""

    vertex_ids: np.ndarray
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertex_ids = np.asarray(self.vertex_ids, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.vertex_ids.shape != self.values.shape:
            raise ContractError("vertex_ids and values must align")

    def dense(self, num_vertices: int) -> np.ndarray:
        out = np.full(num_vertices, np.nan)
        out[self.vertex_ids] = self.values
        return out

    def same_support(self, other: "ScalarField") -> bool:
        return np.array_equal(self.vertex_ids, other.vertex_ids)

    def value_at(self, vid: int) -> float:
        pos = np.searchsorted(self.vertex_ids, vid)
        if pos >= self.vertex_ids.size or self.vertex_ids[pos] != vid:
            raise ContractError(f"vertex {vid} is not in this field's support")
        return float(self.values[pos])


@dataclass
class DistanceField(ScalarField):
    """Asymmetric distance values from a source or to a target vertex."""

    anchor: int = -1
    direction: str = "from-source"  # or "to-target"
    lam: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.direction not in ("from-source", "to-target"):
            raise ContractError(f"bad direction tag {self.direction!r}")


@dataclass
class BoundaryFunction:
    """Finite values on every boundary vertex of a (sub)domain."""

    vertex_ids: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.vertex_ids = np.asarray(self.vertex_ids, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.vertex_ids.shape != self.values.shape:
            raise ContractError("boundary ids and values must align")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("boundary data must be finite")

    @classmethod
    def from_callable(cls, sub, fn) -> "BoundaryFunction":
        ids = np.asarray(sub.boundary, dtype=np.int64)
        coords = sub.graph.coords[ids]
        vals = np.asarray(fn(coords), dtype=np.float64).reshape(-1)
        if vals.shape[0] != ids.shape[0]:
            raise ContractError("boundary callable returned wrong length")
        return cls(ids, vals)

    @classmethod
    def from_csv(cls, sub, path) -> "BoundaryFunction":
        dom = sub.graph.domain
        rows = []
        with open(path, newline="") as f:
            for row in csv.reader(f):
                if not row or row[0].lstrip().startswith("#") or row[0].startswith("x1"):
                    continue
                rows.append([float(v) for v in row])
        arr = np.asarray(rows, dtype=np.float64)
        if arr.shape[1] != dom.n + 1:
            raise ContractError(f"boundary CSV needs {dom.n} coordinates plus value")
        ids = dom.vertex_at(dom.snap(arr[:, : dom.n]))
        if np.any(ids < 0):
            raise ContractError("boundary CSV row does not land on a domain vertex")
        lookup = dict(zip(ids.tolist(), arr[:, dom.n].tolist()))
        bids = np.asarray(sub.boundary, dtype=np.int64)
        missing = [int(v) for v in bids if int(v) not in lookup]
        if missing:
            raise ContractError(f"boundary CSV misses {len(missing)} boundary vertices")
        return cls(bids, np.array([lookup[int(v)] for v in bids]))


def write_field_csv(path, coords, values) -> None:
    coords = np.atleast_2d(coords)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"x{i + 1}" for i in range(coords.shape[1])] + ["value"])
        for row, v in zip(coords, values):
            w.writerow([_fmt(c) for c in row] + [_fmt(v)])


def write_matrix_csv(path, labels, matrix) -> None:
    matrix = np.atleast_2d(matrix)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["source\\target"] + [str(v) for v in labels])
        for lab, row in zip(labels, matrix):
            w.writerow([str(lab)] + [_fmt(v) for v in row])


def write_sidecar(path, meta: dict) -> None:
    Path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def read_field_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ContractError(f"empty field file {path}")
    header, data = rows[0], rows[1:]
    ncoord = len(header) - 1
    coords = np.array([[float(v) for v in r[:ncoord]] for r in data])
    values = np.array([float(r[ncoord]) for r in data])
    return coords, values

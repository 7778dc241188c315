"""Geometric features of an aligned face.

Each face yields 2307 numbers: the 2278 Euclidean distances between every
pair of landmarks, in lexicographic (i, j) order with i < j, followed by 29
interior angles read from an angle table. Features are z-scored against
statistics fitted on the training faces.
"""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist

from .alignment import N_LANDMARKS, AlignedLandmarks
from .errors import DegenerateGeometryError, InvalidInputError, ParseError

N_DISTANCES = N_LANDMARKS * (N_LANDMARKS - 1) // 2
N_ANGLES = 29
N_FEATURES = N_DISTANCES + N_ANGLES

REGIONS = ("outline", "brow", "eye", "mouth", "nose")
REGION_COUNTS = {"outline": 9, "brow": 6, "eye": 6, "mouth": 7, "nose": 1}

# stddev below this marks a feature as constant; it standardizes to 0
CONSTANT_TOL = 1e-12

TABLE_HEADER = ("name", "a", "vertex", "b", "region")


class AngleSpec(NamedTuple):
    name: str
    a: int
    vertex: int
    b: int
    region: str


def pair_index(i, j, n=N_LANDMARKS):
    """Position of the pair (i, j), i < j, in the flattened distance vector."""
    if not 0 <= i < j < n:
        raise InvalidInputError(f"need 0 <= i < j < {n}, got ({i}, {j})")
    return i * (2 * n - 1 - i) // 2 + (j - i - 1)


def feature_names(table=None):
    table = default_angle_table() if table is None else table
    names = [f"d_{i}_{j}" for i in range(N_LANDMARKS) for j in range(i + 1, N_LANDMARKS)]
    names.extend(f"angle_{spec.name}" for spec in table)
    return names


def _points(al):
    return al.points if isinstance(al, AlignedLandmarks) else np.asarray(al, dtype=np.float64)


def pairwise_distances(al):
    return pdist(_points(al))


def _angle(p_a, p_v, p_b):
    u = p_a - p_v
    w = p_b - p_v
    cross = u[0] * w[1] - u[1] * w[0]
    dot = u[0] * w[0] + u[1] * w[1]
    return np.arctan2(abs(cross), dot)


def facial_angles(al, table=None):
    """Interior angle at each table row's vertex, in [0, pi]."""
    table = default_angle_table() if table is None else table
    pts = _points(al)
    out = np.empty(len(table))
    for k, spec in enumerate(table):
        p_a, p_v, p_b = pts[spec.a], pts[spec.vertex], pts[spec.b]
        if np.array_equal(p_a, p_v) or np.array_equal(p_b, p_v):
            raise DegenerateGeometryError(f"angle {spec.name!r}: a ray from landmark {spec.vertex} has zero length")
        out[k] = _angle(p_a, p_v, p_b)
    return out


def featurize(al, table=None):
    return np.concatenate([pairwise_distances(al), facial_angles(al, table)])


@dataclass(frozen=True)
class FeatureStats:
    mean: np.ndarray
    stddev: np.ndarray
    n_fit: int

    @property
    def constant(self):
        return self.stddev < CONSTANT_TOL

    def to_dict(self):
        return {"mean": self.mean.tolist(), "stddev": self.stddev.tolist(), "n_fit": int(self.n_fit)}

    @classmethod
    def from_dict(cls, d):
        mean = np.asarray(d["mean"], dtype=np.float64)
        std = np.asarray(d["stddev"], dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise InvalidInputError("feature stats mean/stddev must be equal-length vectors")
        if np.any(std < 0):
            raise InvalidInputError("feature stats stddev must be non-negative")
        return cls(mean, std, int(d["n_fit"]))


def fit_stats(features):
    """Per-coordinate mean and population standard deviation."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[0] == 0:
        raise InvalidInputError("cannot fit feature statistics on an empty collection")
    mean = X.mean(axis=0)
    std = np.sqrt(((X - mean) ** 2).mean(axis=0))
    return FeatureStats(mean, std, X.shape[0])


def standardize(features, stats):
    """Z-score one vector or a matrix of row vectors; constant features map to 0."""
    X = np.asarray(features, dtype=np.float64)
    if X.shape[-1] != stats.mean.shape[0]:
        raise InvalidInputError(f"feature length {X.shape[-1]} does not match stats length {stats.mean.shape[0]}")
    const = stats.constant
    safe = np.where(const, 1.0, stats.stddev)
    return np.where(const, 0.0, (X - stats.mean) / safe)


# -- angle table file ----------------------------------------------------

def validate_angle_table(table, require_default_counts=True):
    if require_default_counts and len(table) != N_ANGLES:
        raise InvalidInputError(f"angle table must have {N_ANGLES} rows, got {len(table)}")
    counts = dict.fromkeys(REGIONS, 0)
    for spec in table:
        idx = (spec.a, spec.vertex, spec.b)
        if len(set(idx)) != 3:
            raise InvalidInputError(f"angle {spec.name!r}: indices must be distinct, got {idx}")
        if not all(0 <= i < N_LANDMARKS for i in idx):
            raise InvalidInputError(f"angle {spec.name!r}: indices must lie in 0..{N_LANDMARKS - 1}")
        if spec.region not in counts:
            raise InvalidInputError(f"angle {spec.name!r}: unknown region {spec.region!r}")
        counts[spec.region] += 1
    if require_default_counts and counts != REGION_COUNTS:
        raise InvalidInputError(f"angle table region counts {counts} differ from {REGION_COUNTS}")
    return counts


def parse_angle_table(text, path=None):
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and not r[0].startswith("#")]
    if not rows or tuple(c.strip() for c in rows[0]) != TABLE_HEADER:
        raise ParseError(f"angle table header must be {','.join(TABLE_HEADER)}", path, 1)
    table = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(TABLE_HEADER):
            raise ParseError(f"expected {len(TABLE_HEADER)} columns, got {len(row)}", path, lineno)
        name, a, v, b, region = (c.strip() for c in row)
        try:
            table.append(AngleSpec(name, int(a), int(v), int(b), region))
        except ValueError:
            raise ParseError("landmark indices must be integers", path, lineno) from None
    validate_angle_table(table)
    return tuple(table)


def format_angle_table(table):
    lines = [",".join(TABLE_HEADER)]
    lines.extend(f"{s.name},{s.a},{s.vertex},{s.b},{s.region}" for s in table)
    return "\n".join(lines) + "\n"


def table_digest(table):
    """sha256 of the table's canonical text form."""
    return hashlib.sha256(format_angle_table(table).encode("utf-8")).hexdigest()


def load_angle_table(path=None):
    if path is None:
        text = resources.files("emofuse").joinpath("data/angle_table.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_angle_table(text, path)


_DEFAULT_TABLE = None


def default_angle_table():
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = load_angle_table()
    return _DEFAULT_TABLE

"""Shared domain types and the correlation primitives.

Everything here is immutable after construction and safe to share across
threads; the two statistics functions are pure.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CoordinateOutOfRange,
    LengthMismatch,
    TooFewSamples,
    ZeroVariance,
)

EARTH_RADIUS_KM = 6371.0


def substream(seed: int, label: str) -> np.random.Generator:
    """Generator derived from (seed, label) so per-school randomness does
    not depend on iteration order. Labels are hashed with crc32 (stable
    across processes, unlike Python's salted str hash)."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), zlib.crc32(label.encode("utf-8"))])
    )


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float

    def __post_init__(self):
        lat, lon = self.latitude, self.longitude
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise CoordinateOutOfRange(f"non-finite coordinate ({lat}, {lon})")
        if not (-90.0 <= lat <= 90.0):
            raise CoordinateOutOfRange(f"latitude {lat} outside [-90, 90]")
        if not (-180.0 <= lon <= 180.0):
            raise CoordinateOutOfRange(f"longitude {lon} outside [-180, 180]")


@dataclass(frozen=True)
class School:
    id: str
    location: GeoPoint
    score: float  # mean graduate examination score (USE points)

    def __post_init__(self):
        if not math.isfinite(self.score) or self.score < 0:
            raise ValueError(f"school {self.id}: invalid score {self.score}")


@dataclass(frozen=True)
class Apartment:
    location: GeoPoint
    price_per_sqm: float  # rubles per square meter

    def __post_init__(self):
        if not math.isfinite(self.price_per_sqm) or self.price_per_sqm <= 0:
            raise ValueError(f"invalid price per sqm {self.price_per_sqm}")


class StudentGraph:
    """Undirected binary friendship relation plus student -> school map.

    Edges are stored as sorted id tuples; construction rejects self-loops
    and edges whose endpoints are not assigned to a school.
    """

    def __init__(self, assignment: dict[str, str], edges):
        self.assignment = dict(assignment)
        self.students = sorted(self.assignment)
        normalized = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop edge on student {a!r}")
            if a not in self.assignment or b not in self.assignment:
                raise ValueError(f"edge ({a!r}, {b!r}) has unassigned endpoint")
            normalized.add((a, b) if a < b else (b, a))
        self.edges = frozenset(normalized)

    def __eq__(self, other):
        return (
            isinstance(other, StudentGraph)
            and self.assignment == other.assignment
            and self.edges == other.edges
        )

    def __repr__(self):
        return f"StudentGraph({len(self.students)} students, {len(self.edges)} edges)"


class SchoolNetwork:
    """Symmetric weighted school x school tie-count matrix.

    kind is one of 'raw-count', 'min-symmetrized', 'binary'. The diagonal
    is always zero: intra-school ties are excluded from the inter-school
    network and reported separately by the ingest summary.
    """

    KINDS = ("raw-count", "min-symmetrized", "binary")

    def __init__(self, schools: list[str], weights, kind: str):
        if kind not in self.KINDS:
            raise ValueError(f"unknown network kind {kind!r}")
        w = np.asarray(weights)
        n = len(schools)
        if w.shape != (n, n):
            raise ValueError(f"weight matrix shape {w.shape} != ({n}, {n})")
        if not np.issubdtype(w.dtype, np.integer):
            if not np.all(w == np.floor(w)):
                raise ValueError("weights must be integers")
            w = w.astype(np.int64)
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if np.any(w != w.T):
            raise ValueError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("diagonal must be zero")
        self.schools = list(schools)
        self.weights = w
        self.weights.setflags(write=False)
        self.kind = kind
        self.index = {s: i for i, s in enumerate(self.schools)}

    def __len__(self):
        return len(self.schools)

    def nonzero_pairs(self):
        """Upper-triangle (school_a, school_b, weight) with weight > 0."""
        rows, cols = np.nonzero(np.triu(self.weights, k=1))
        for r, c in zip(rows.tolist(), cols.tolist()):
            yield self.schools[r], self.schools[c], int(self.weights[r, c])


@dataclass
class DecayCurve:
    """Binned tie probability vs distance; probabilities are NaN in bins
    with no school pairs."""

    bin_edges: np.ndarray  # strictly increasing, starts at 0, len = bins + 1
    probabilities: np.ndarray
    pair_counts: np.ndarray
    fitted_exponent: float | None = None
    fitted_prefactor: float | None = None

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        if edges[0] != 0.0 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must start at 0 and strictly increase")
        p = np.asarray(self.probabilities, dtype=float)
        c = np.asarray(self.pair_counts, dtype=np.int64)
        if len(p) != len(edges) - 1 or len(c) != len(p):
            raise ValueError("probabilities/pair_counts length mismatch")
        occupied = c > 0
        if np.any(np.isnan(p[occupied])):
            raise ValueError("probability undefined in an occupied bin")
        if np.any((p[occupied] < 0) | (p[occupied] > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        self.bin_edges = edges
        self.probabilities = p
        self.pair_counts = c

    @property
    def midpoints(self) -> np.ndarray:
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2.0


@dataclass(frozen=True)
class SegregationReport:
    statistic_name: str
    value: float
    sample_size: int
    p_value: float | None = None
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        if not -1.0 <= self.value <= 1.0:
            raise ValueError(f"correlation {self.value} outside [-1, 1]")
        if self.sample_size < 3:
            raise ValueError(f"sample_size {self.sample_size} < 3")
        if self.p_value is not None and not 0.0 < self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside (0, 1]")

    def to_dict(self) -> dict:
        return {
            "statistic_name": self.statistic_name,
            "value": self.value,
            "sample_size": self.sample_size,
            "p_value": self.p_value,
            "settings": dict(self.settings),
        }


def _as_checked_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"lengths {x.shape} vs {y.shape}")
    if len(x) < 3:
        raise TooFewSamples(f"need >= 3 samples, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    return x, y


def pearson(x, y) -> float:
    """Sample Pearson correlation, clipped to [-1, 1].

    Raises ZeroVariance for constant input, LengthMismatch, TooFewSamples.
    """
    x, y = _as_checked_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0:
        raise ZeroVariance("x is constant")
    if sy == 0.0:
        raise ZeroVariance("y is constant")
    r = float(xc @ yc) / (sx * sy)
    return min(1.0, max(-1.0, r))


def permutation_p_value(x, y, permutations: int, seed: int) -> float:
    """Two-sided permutation p-value for pearson(x, y).

    Permutes y with a seeded generator; returns
    (1 + #{permuted |r| >= |r_observed|}) / (permutations + 1), so the
    result is never zero. Deterministic for a fixed seed.
    """
    if permutations < 100:
        raise ValueError(f"need >= 100 permutations, got {permutations}")
    r_obs = abs(pearson(x, y))
    x, y = _as_checked_pair(x, y)
    xc = x - x.mean()
    xc /= math.sqrt(float(xc @ xc))
    yc = y - y.mean()
    yc /= math.sqrt(float(yc @ yc))
    rng = np.random.default_rng(seed)
    # ties at |r_obs| must count; tolerance absorbs permutation round-off
    threshold = r_obs - 1e-12
    hits = 0
    for _ in range(permutations):
        r = float(xc @ rng.permutation(yc))
        if abs(r) >= threshold:
            hits += 1
    return (1 + hits) / (permutations + 1)

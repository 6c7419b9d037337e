"""Geodesic distances, neighbor orderings, and the geographic segregation
measures (neighborhood affluence and center-distance correlations)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KOutOfRange, TooFewSamples, TooFewSchools
from .model import (
    EARTH_RADIUS_KM,
    Apartment,
    GeoPoint,
    School,
    SegregationReport,
    pearson,
    permutation_p_value,
    substream,
)


def _haversine_km(lat1, lon1, lat2, lon2):
    """Vectorized great-circle distance in km (mean Earth radius)."""
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = np.sin(dlat / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
    return EARTH_RADIUS_KM * 2 * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in km."""
    if (a.latitude, a.longitude) == (b.latitude, b.longitude):
        return 0.0
    return float(_haversine_km(a.latitude, a.longitude, b.latitude, b.longitude))


@dataclass(frozen=True)
class DistanceMatrix:
    ids: list[str]
    distances: np.ndarray  # km, symmetric, zero diagonal

    def __post_init__(self):
        d = self.distances
        n = len(self.ids)
        if d.shape != (n, n):
            raise ValueError(f"distance matrix shape {d.shape} != ({n}, {n})")
        d.setflags(write=False)

    def index_of(self, school_id: str) -> int:
        return self.ids.index(school_id)


def _latlon_arrays(roster: list[School]):
    lat = np.array([s.location.latitude for s in roster])
    lon = np.array([s.location.longitude for s in roster])
    return lat, lon


def school_distance_matrix(roster: list[School]) -> DistanceMatrix:
    """Pairwise great-circle distances between schools, in roster order."""
    if len(roster) < 2:
        raise TooFewSchools(f"need >= 2 schools, got {len(roster)}")
    lat, lon = _latlon_arrays(roster)
    d = _haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    d = (d + d.T) / 2.0  # exact symmetry despite float round-off
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(ids=[s.id for s in roster], distances=d)


def _ranked_prefix(keys: np.ndarray, candidates: np.ndarray, k: int,
                   rng: np.random.Generator) -> list[int]:
    """First k candidate indices ordered by key, exact ties broken by a
    uniform random jitter. The full jittered order makes neighbors(k) a
    prefix of neighbors(k+1) for the same generator state."""
    jitter = rng.random(len(candidates))
    order = np.lexsort((jitter, keys))
    return candidates[order[:k]].tolist()


def geographic_neighbors(dm: DistanceMatrix, school_id: str, k: int,
                         seed: int) -> list[str]:
    """The k geographically closest schools to school_id, excluding itself.

    Exact distance ties are broken by a seeded uniform choice among the
    tied candidates, with a per-school substream so results do not depend
    on the order schools are processed in.
    """
    n = len(dm.ids)
    if not 1 <= k <= n - 1:
        raise KOutOfRange(f"k={k} outside [1, {n - 1}]")
    i = dm.index_of(school_id)
    candidates = np.array([j for j in range(n) if j != i])
    rng = substream(seed, school_id)
    picked = _ranked_prefix(dm.distances[i, candidates], candidates, k, rng)
    return [dm.ids[j] for j in picked]


def school_apartment_distances(roster: list[School],
                               apartments: list[Apartment]) -> np.ndarray:
    """(n_schools, n_apartments) great-circle distance matrix in km."""
    slat, slon = _latlon_arrays(roster)
    alat = np.array([a.location.latitude for a in apartments])
    alon = np.array([a.location.longitude for a in apartments])
    return _haversine_km(slat[:, None], slon[:, None], alat[None, :], alon[None, :])


def neighborhood_affluence_segregation(
    roster: list[School],
    apartments: list[Apartment],
    radius_km: float,
    permutations: int = 0,
    seed: int = 0,
) -> SegregationReport:
    """Correlation between school scores and mean apartment price per sqm
    within radius_km (strict inequality). Schools with no apartment in
    radius are excluded; the exclusion count is recorded in settings.
    """
    if radius_km <= 0:
        raise ValueError(f"radius must be positive, got {radius_km}")
    d = school_apartment_distances(roster, apartments)
    within = d < radius_km
    counts = within.sum(axis=1)
    eligible = counts > 0
    if eligible.sum() < 3:
        raise TooFewSamples(
            f"only {int(eligible.sum())} schools have an apartment within "
            f"{radius_km} km"
        )
    prices = np.array([a.price_per_sqm for a in apartments])
    mean_price = (within[eligible] @ prices) / counts[eligible]
    scores = np.array([s.score for s in roster])[eligible]
    value = pearson(scores, mean_price)
    p = (
        permutation_p_value(scores, mean_price, permutations, seed)
        if permutations
        else None
    )
    return SegregationReport(
        statistic_name="neighborhood_affluence_segregation",
        value=value,
        sample_size=int(eligible.sum()),
        p_value=p,
        settings={
            "radius_km": radius_km,
            "excluded_schools": int((~eligible).sum()),
            "permutations": permutations,
            "seed": seed,
        },
    )


def center_distance_correlation(
    roster: list[School],
    center: GeoPoint,
    permutations: int = 0,
    seed: int = 0,
) -> SegregationReport:
    """Correlation between school scores and their distance from center."""
    if len(roster) < 3:
        raise TooFewSamples(f"need >= 3 schools, got {len(roster)}")
    lat, lon = _latlon_arrays(roster)
    d = _haversine_km(lat, lon, center.latitude, center.longitude)
    scores = np.array([s.score for s in roster])
    value = pearson(scores, d)
    p = permutation_p_value(scores, d, permutations, seed) if permutations else None
    return SegregationReport(
        statistic_name="center_distance_correlation",
        value=value,
        sample_size=len(roster),
        p_value=p,
        settings={
            "center_lat": center.latitude,
            "center_lon": center.longitude,
            "permutations": permutations,
            "seed": seed,
        },
    )

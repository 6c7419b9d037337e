"""Digital neighbor ordering and the core segregation measures S_g(k),
S_d(k), plus the degree-outcome correlation.

Digital distance is the reciprocal of the tie weight, so ordering by
descending weight is identical and avoids dividing by zero; schools with
no tie are unreachable. A single seed drives all tie-breaks in a report,
with per-school substreams so results do not depend on iteration order.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import InsufficientNeighbors, KOutOfRange, TooFewSamples
from .geo import DistanceMatrix, _ranked_prefix, geographic_neighbors
from .model import (
    School,
    SchoolNetwork,
    SegregationReport,
    pearson,
    permutation_p_value,
    substream,
)


def digital_neighbors(net: SchoolNetwork, school_id: str, k: int,
                      seed: int) -> list[str]:
    """The k schools with the largest tie weight to school_id. Equal
    weights are broken by a seeded uniform choice among the tied
    candidates; deterministic for a fixed seed."""
    if k < 1:
        raise KOutOfRange(f"k={k} must be >= 1")
    i = net.index[school_id]
    row = net.weights[i]
    candidates = np.nonzero(row > 0)[0]
    if len(candidates) < k:
        raise InsufficientNeighbors(
            f"school {school_id!r} has degree {len(candidates)} < k={k}"
        )
    rng = substream(seed, school_id)
    picked = _ranked_prefix(-row[candidates], candidates, k, rng)
    return [net.schools[j] for j in picked]


def _score_map(roster: list[School]) -> dict[str, float]:
    return {s.id: s.score for s in roster}


def geographic_segregation(
    roster: list[School],
    dm: DistanceMatrix,
    k: int,
    seed: int,
    permutations: int = 0,
) -> SegregationReport:
    """S_g(k): correlation of each school's score with the mean score of
    its k nearest schools by great-circle distance."""
    if len(roster) < 3:
        raise TooFewSamples(f"need >= 3 schools, got {len(roster)}")
    scores = _score_map(roster)
    own, neighbor_mean = [], []
    for school in roster:
        neighbors = geographic_neighbors(dm, school.id, k, seed)
        own.append(school.score)
        neighbor_mean.append(sum(scores[j] for j in neighbors) / k)
    value = pearson(own, neighbor_mean)
    p = (
        permutation_p_value(own, neighbor_mean, permutations, seed)
        if permutations
        else None
    )
    return SegregationReport(
        statistic_name="geographic_segregation",
        value=value,
        sample_size=len(roster),
        p_value=p,
        settings={"k": k, "seed": seed, "permutations": permutations},
    )


def digital_segregation(
    roster: list[School],
    net: SchoolNetwork,
    k: int,
    seed: int,
    permutations: int = 0,
) -> SegregationReport:
    """S_d(k): correlation of each school's score with the mean score of
    its k digital neighbors. Schools with degree < k are excluded and the
    exclusion count recorded in settings."""
    scores = _score_map(roster)
    degrees = (net.weights > 0).sum(axis=1)
    own, neighbor_mean = [], []
    excluded = 0
    for school in roster:
        if degrees[net.index[school.id]] < k:
            excluded += 1
            continue
        neighbors = digital_neighbors(net, school.id, k, seed)
        own.append(school.score)
        neighbor_mean.append(sum(scores[j] for j in neighbors) / k)
    if len(own) < 3:
        raise TooFewSamples(f"only {len(own)} schools have degree >= {k}")
    value = pearson(own, neighbor_mean)
    p = (
        permutation_p_value(own, neighbor_mean, permutations, seed)
        if permutations
        else None
    )
    return SegregationReport(
        statistic_name="digital_segregation",
        value=value,
        sample_size=len(own),
        p_value=p,
        settings={
            "k": k,
            "seed": seed,
            "permutations": permutations,
            "excluded_schools": excluded,
        },
    )


def degree_outcome_correlation(
    roster: list[School],
    net: SchoolNetwork,
    permutations: int = 0,
    seed: int = 0,
) -> SegregationReport:
    """Correlation between school scores and degree centrality."""
    if len(roster) < 3:
        raise TooFewSamples(f"need >= 3 schools, got {len(roster)}")
    degrees = (net.weights > 0).sum(axis=1)
    own = [s.score for s in roster]
    deg = [int(degrees[net.index[s.id]]) for s in roster]
    value = pearson(own, deg)
    p = permutation_p_value(own, deg, permutations, seed) if permutations else None
    return SegregationReport(
        statistic_name="degree_outcome_correlation",
        value=value,
        sample_size=len(roster),
        p_value=p,
        settings={"permutations": permutations, "seed": seed},
    )


def segregation_profile(
    roster: list[School],
    dm: DistanceMatrix,
    net: SchoolNetwork,
    k_values,
    seed: int,
    permutations: int = 0,
) -> list[tuple[SegregationReport, SegregationReport]]:
    """(S_g(k), S_d(k)) report pairs for each k."""
    return [
        (
            geographic_segregation(roster, dm, k, seed, permutations),
            digital_segregation(roster, net, k, seed, permutations),
        )
        for k in k_values
    ]


def write_profile_csv(profile, path) -> None:
    """k, s_g, s_d, excluded_digital, p_g, p_d rows."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["k", "s_g", "s_d", "excluded_digital", "p_g", "p_d"])
        for geo_rep, dig_rep in profile:
            writer.writerow([
                geo_rep.settings["k"],
                repr(geo_rep.value),
                repr(dig_rep.value),
                dig_rep.settings["excluded_schools"],
                "" if geo_rep.p_value is None else repr(geo_rep.p_value),
                "" if dig_rep.p_value is None else repr(dig_rep.p_value),
            ])

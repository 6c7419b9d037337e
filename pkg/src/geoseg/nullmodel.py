"""Geography-preserving random-graph null model and the Monte Carlo
significance test for digital segregation.

Each unordered school pair gets an independent Bernoulli tie with the
decay-curve probability of its distance bin. Generated graphs are binary,
so every neighbor is equidistant and the k digital neighbors of a school
are a uniform random k-subset of its graph neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateNull, UncoveredDistance
from .geo import DistanceMatrix
from .model import DecayCurve, School, SchoolNetwork, pearson

UNCOVERED_POLICIES = ("zero", "clamp")


@dataclass(frozen=True)
class NullModelResult:
    observed: float
    simulated_mean: float
    simulated_sd: float
    simulated_max: float
    simulations: int
    empirical_p: float  # (1 + #{sim >= observed}) / (simulations + 1)
    seed: int
    k: int = 1
    discarded: int = 0
    uncovered_pairs: int = 0
    extension: bool = False  # True when k > 1 (beyond the reference analysis)
    samples: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "observed": self.observed,
            "simulated_mean": self.simulated_mean,
            "simulated_sd": self.simulated_sd,
            "simulated_max": self.simulated_max,
            "simulations": self.simulations,
            "empirical_p": self.empirical_p,
            "seed": self.seed,
            "k": self.k,
            "discarded": self.discarded,
            "uncovered_pairs": self.uncovered_pairs,
            "extension": self.extension,
        }


def _pair_probabilities(curve: DecayCurve, dm: DistanceMatrix,
                        uncovered: str = "zero"):
    """Upper-triangle tie probabilities from the binned curve.

    Pairs whose distance falls beyond the last bin, or in a bin with no
    defined probability, are resolved by policy: 'zero' (no tie) or
    'clamp' (last defined bin's probability). Returns (iu, probs,
    uncovered_count).
    """
    if uncovered not in UNCOVERED_POLICIES:
        raise UncoveredDistance(f"unknown uncovered-distance policy {uncovered!r}")
    n = len(dm.ids)
    iu = np.triu_indices(n, k=1)
    d = dm.distances[iu]
    idx = np.searchsorted(curve.bin_edges, d, side="right") - 1
    defined = ~np.isnan(curve.probabilities)
    in_range = (idx >= 0) & (idx < len(curve.probabilities))
    covered = in_range & defined[np.clip(idx, 0, len(curve.probabilities) - 1)]
    probs = np.zeros(len(d))
    probs[covered] = curve.probabilities[idx[covered]]
    n_uncovered = int((~covered).sum())
    if n_uncovered and uncovered == "clamp":
        last_defined = np.nonzero(defined)[0]
        if len(last_defined) == 0:
            raise UncoveredDistance("curve has no defined probability at all")
        probs[~covered] = curve.probabilities[last_defined[-1]]
    return iu, probs, n_uncovered


def generate_null_graph(curve: DecayCurve, dm: DistanceMatrix, seed: int,
                        uncovered: str = "zero") -> SchoolNetwork:
    """One binary random network with the curve's per-bin tie probability."""
    iu, probs, _ = _pair_probabilities(curve, dm, uncovered)
    rng = np.random.default_rng(seed)
    n = len(dm.ids)
    w = np.zeros((n, n), dtype=np.int64)
    ties = rng.random(len(probs)) < probs
    w[iu[0][ties], iu[1][ties]] = 1
    w += w.T
    return SchoolNetwork(list(dm.ids), w, kind="binary")


def _s_d_on_binary(adj: np.ndarray, scores: np.ndarray, k: int,
                   rng: np.random.Generator) -> float | None:
    """S_d(k) on a binary adjacency matrix: the k-set of each school is a
    uniform random k-subset of its neighbors. Returns None when fewer than
    3 schools are eligible or a correlation input is constant."""
    degrees = adj.sum(axis=1)
    eligible = np.nonzero(degrees >= k)[0]
    if len(eligible) < 3:
        return None
    # random ranking per row: smallest k jitters among neighbors = uniform k-subset
    jitter = rng.random(adj.shape)
    jitter[~adj] = np.inf
    rows = jitter[eligible]
    if k == 1:
        chosen = np.argmin(rows, axis=1)
        neighbor_mean = scores[chosen]
    else:
        top = np.argpartition(rows, k - 1, axis=1)[:, :k]
        neighbor_mean = scores[top].mean(axis=1)
    own = scores[eligible]
    if np.all(own == own[0]) or np.all(neighbor_mean == neighbor_mean[0]):
        return None
    return pearson(own, neighbor_mean)


def null_distribution_s_d(
    roster: list[School],
    dm: DistanceMatrix,
    curve: DecayCurve,
    k: int,
    simulations: int,
    seed: int,
    observed: float,
    uncovered: str = "zero",
) -> NullModelResult:
    """Monte Carlo null distribution of S_d(k) under the geography-
    preserving random graph, compared against the observed value.

    Per-simulation seeds derive from (master seed, simulation index), so
    execution order cannot change the result. Simulations with fewer than
    3 eligible schools are discarded and re-drawn; DegenerateNull if more
    than half are discarded.
    """
    if simulations < 100:
        raise ValueError(f"need >= 100 simulations, got {simulations}")
    if [s.id for s in roster] != list(dm.ids):
        raise ValueError("roster and distance matrix school lists differ")
    iu, probs, n_uncovered = _pair_probabilities(curve, dm, uncovered)
    scores = np.array([s.score for s in roster])
    n = len(roster)
    samples = np.empty(simulations)
    collected = 0
    discarded = 0
    index = 0
    while collected < simulations:
        if discarded > simulations // 2:
            raise DegenerateNull(
                f"{discarded} of {collected + discarded} simulations discarded"
            )
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        index += 1
        adj = np.zeros((n, n), dtype=bool)
        ties = rng.random(len(probs)) < probs
        adj[iu[0][ties], iu[1][ties]] = True
        adj |= adj.T
        value = _s_d_on_binary(adj, scores, k, rng)
        if value is None:
            discarded += 1
            continue
        samples[collected] = value
        collected += 1
    return NullModelResult(
        observed=float(observed),
        simulated_mean=float(samples.mean()),
        simulated_sd=float(samples.std(ddof=1)),
        simulated_max=float(samples.max()),
        simulations=simulations,
        empirical_p=float((1 + (samples >= observed).sum()) / (simulations + 1)),
        seed=seed,
        k=k,
        discarded=discarded,
        uncovered_pairs=n_uncovered,
        extension=k > 1,
        samples=samples,
    )


def write_null_samples_csv(result: NullModelResult, path) -> None:
    """One simulated S value per row, for external plotting."""
    with open(path, "w", newline="") as f:
        f.write("s_d_null\n")
        for v in result.samples:
            f.write(f"{float(v)!r}\n")

"""Empirical tie-probability-vs-distance curve and its power-law fit."""

from __future__ import annotations

import csv

import numpy as np

from .errors import DegenerateFit, MismatchedIds, TooFewBins
from .geo import DistanceMatrix
from .model import DecayCurve, SchoolNetwork

DEFAULT_BIN_WIDTH_KM = 1.0
DEFAULT_MIN_PAIRS_PER_BIN = 30


def tie_probability_curve(
    net: SchoolNetwork, dm: DistanceMatrix, bin_width_km: float = DEFAULT_BIN_WIDTH_KM
) -> DecayCurve:
    """Per distance bin [m*w, (m+1)*w): fraction of unordered school pairs
    with at least one tie. Trailing empty bins are trimmed."""
    if net.schools != dm.ids:
        raise MismatchedIds("network and distance matrix school lists differ")
    if bin_width_km <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width_km}")
    iu = np.triu_indices(len(net.schools), k=1)
    d = dm.distances[iu]
    tied = net.weights[iu] > 0
    bins = np.floor(d / bin_width_km).astype(np.int64)
    n_bins = int(bins.max()) + 1 if len(bins) else 1
    pair_counts = np.bincount(bins, minlength=n_bins)
    tie_counts = np.bincount(bins[tied], minlength=n_bins)
    last = int(np.max(np.nonzero(pair_counts))) if pair_counts.any() else 0
    pair_counts = pair_counts[: last + 1]
    tie_counts = tie_counts[: last + 1]
    probs = np.full(len(pair_counts), np.nan)
    occupied = pair_counts > 0
    probs[occupied] = tie_counts[occupied] / pair_counts[occupied]
    edges = np.arange(len(pair_counts) + 1) * bin_width_km
    return DecayCurve(bin_edges=edges, probabilities=probs, pair_counts=pair_counts)


def fit_power_law(
    curve: DecayCurve,
    d_min_km: float | None = None,
    min_pairs_per_bin: int = DEFAULT_MIN_PAIRS_PER_BIN,
):
    """Pair-count-weighted least squares of log(probability) on
    log(bin midpoint) over bins beyond d_min_km. Returns (exponent,
    prefactor) and stores both on the curve.

    d_min_km defaults to the first bin's upper edge: the short-range
    plateau is excluded from the power-law regime. Zero-probability bins
    cannot enter the fit (log undefined).
    """
    if d_min_km is None:
        d_min_km = float(curve.bin_edges[1])
    mids = curve.midpoints
    eligible = (
        (mids > d_min_km)
        & (curve.pair_counts >= min_pairs_per_bin)
        & ~np.isnan(curve.probabilities)
        & (curve.probabilities > 0)
    )
    if eligible.sum() < 3:
        raise TooFewBins(
            f"only {int(eligible.sum())} bins eligible beyond {d_min_km} km"
        )
    x = np.log(mids[eligible])
    if np.all(x == x[0]):
        raise DegenerateFit("all eligible bin midpoints coincide")
    y = np.log(curve.probabilities[eligible])
    # polyfit weights multiply residuals; sqrt gives pair_count-weighted OLS
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(curve.pair_counts[eligible]))
    curve.fitted_exponent = float(slope)
    curve.fitted_prefactor = float(np.exp(intercept))
    return curve.fitted_exponent, curve.fitted_prefactor


def write_curve_csv(curve: DecayCurve, path) -> None:
    """Plot-ready bin_mid_km, probability, pair_count rows."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["bin_mid_km", "probability", "pair_count"])
        for mid, p, c in zip(curve.midpoints, curve.probabilities, curve.pair_counts):
            writer.writerow([repr(float(mid)), "" if np.isnan(p) else repr(float(p)), int(c)])

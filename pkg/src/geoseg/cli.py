"""Command-line entry point.

Subcommands:
  analyze  ingest -> networks -> decay -> segregation -> null model -> report
  synth    generate a synthetic city in the ingest CSV schemas

Exit codes: 0 ok, 2 input/validation error, 3 internal error. All
randomness flows from --seed; GEOSEG_THREADS caps parallelism (the
current implementation is sequential, which is the degenerate cap).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import decay, geo, ingest, network, nullmodel, segregation, synth
from .errors import GeosegError, TooFewBins, DegenerateFit
from .model import GeoPoint

REPORT_SCHEMA_VERSION = 1


def _write_json(path, payload) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _threads() -> int:
    raw = os.environ.get("GEOSEG_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise GeosegError(f"GEOSEG_THREADS={raw!r} is not an integer")
    if value < 1:
        raise GeosegError(f"GEOSEG_THREADS={value} must be >= 1")
    return value


def run_analyze(args) -> None:
    _threads()  # validated; execution is sequential either way
    for path in (args.students, args.edges, args.schools, args.apartments):
        if not os.path.exists(path):
            raise GeosegError(f"input file not found: {path}")
    os.makedirs(args.out_dir, exist_ok=True)

    raw = ingest.parse_inputs(args.students, args.edges, args.schools,
                              args.apartments)
    config = ingest.FilterConfig(
        max_cohort=args.max_cohort,
        excluded_school_ids=tuple(args.exclude_school),
    )
    graph, roster, filter_report = ingest.apply_filters(raw, config)
    _write_json(os.path.join(args.out_dir, "filter_report.json"),
                filter_report.to_dict())

    net_a, intra = network.build_count_network(graph, roster)
    net_ahat = network.build_min_symmetrized_network(graph, roster)
    network.write_edge_list_csv(net_a, os.path.join(args.out_dir, "network_a.csv"))
    network.write_edge_list_csv(net_ahat,
                                os.path.join(args.out_dir, "network_ahat.csv"))

    dm = geo.school_distance_matrix(roster)
    curve = decay.tie_probability_curve(network.binarize(net_a), dm, args.bin_km)
    fit_payload = {"bin_km": args.bin_km, "min_pairs_per_bin": args.min_pairs_per_bin}
    try:
        exponent, prefactor = decay.fit_power_law(
            curve, min_pairs_per_bin=args.min_pairs_per_bin
        )
        fit_payload.update({"exponent": exponent, "prefactor": prefactor})
    except (TooFewBins, DegenerateFit) as exc:
        # fit is optional curve metadata; the null model needs only the bins
        fit_payload.update({"exponent": None, "prefactor": None, "error": str(exc)})
    decay.write_curve_csv(curve, os.path.join(args.out_dir, "decay_curve.csv"))
    _write_json(os.path.join(args.out_dir, "decay_fit.json"), fit_payload)

    center = GeoPoint(args.center_lat, args.center_lon)
    reports = {
        "neighborhood_affluence_segregation": geo.neighborhood_affluence_segregation(
            roster, raw.apartments, args.radius_km, args.permutations, args.seed
        ).to_dict(),
        "center_distance_correlation": geo.center_distance_correlation(
            roster, center, args.permutations, args.seed
        ).to_dict(),
        "geographic_segregation": segregation.geographic_segregation(
            roster, dm, args.k, args.seed, args.permutations
        ).to_dict(),
        "digital_segregation": segregation.digital_segregation(
            roster, net_a, args.k, args.seed, args.permutations
        ).to_dict(),
        "degree_outcome_correlation": segregation.degree_outcome_correlation(
            roster, net_a, args.permutations, args.seed
        ).to_dict(),
    }

    profile = segregation.segregation_profile(
        roster, dm, net_a, range(1, args.k + 1), args.seed
    )
    segregation.write_profile_csv(
        profile, os.path.join(args.out_dir, "segregation_profile.csv")
    )

    observed = segregation.digital_segregation(
        roster, net_a, args.null_k, args.seed
    ).value
    null_result = nullmodel.null_distribution_s_d(
        roster, dm, curve, args.null_k, args.simulations, args.seed, observed
    )
    nullmodel.write_null_samples_csv(
        null_result, os.path.join(args.out_dir, "null_distribution.csv")
    )

    _write_json(os.path.join(args.out_dir, "report.json"), {
        "schema_version": REPORT_SCHEMA_VERSION,
        "seed": args.seed,
        "settings": {
            "k": args.k,
            "null_k": args.null_k,
            "radius_km": args.radius_km,
            "bin_km": args.bin_km,
            "simulations": args.simulations,
            "permutations": args.permutations,
            "max_cohort": args.max_cohort,
            "center_lat": args.center_lat,
            "center_lon": args.center_lon,
        },
        "filter_report": filter_report.to_dict(),
        "intra_school_edges": intra,
        "decay_fit": fit_payload,
        "segregation": reports,
        "null_model": null_result.to_dict(),
    })


def run_synth(args) -> None:
    cfg = synth.SynthConfig(
        n_schools=args.n_schools,
        city_radius_km=args.city_radius,
        decay_prefactor=args.p0,
        decay_exponent=args.alpha,
        plateau_distance_km=args.d0,
        homophily_scale=args.homophily,
        degree_boost=args.degree_boost,
        spatial_score_gradient=args.gradient,
        seed=args.seed,
    )
    roster, net, truth = synth.generate_city(cfg)
    apartments = synth.generate_apartments(
        cfg, roster, args.n_apartments, args.price_coupling, args.seed
    )
    truth["n_apartments"] = args.n_apartments
    truth["price_coupling"] = args.price_coupling
    truth["students_per_school"] = args.students_per_school
    synth.emit_city(
        args.out_dir, roster, net, truth, apartments,
        seed=args.seed, students_per_school=args.students_per_school,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoseg",
        description="School-network segregation analysis pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full pipeline on input files")
    p.add_argument("--students", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--schools", required=True)
    p.add_argument("--apartments", required=True)
    p.add_argument("--center-lat", type=float, required=True)
    p.add_argument("--center-lon", type=float, required=True)
    p.add_argument("--bin-km", type=float, default=1.0)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--null-k", type=int, default=1,
                   help="neighbor count for the null model (k > 1 is an extension)")
    p.add_argument("--radius-km", type=float, default=1.0)
    p.add_argument("--simulations", type=int, default=1000)
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--min-pairs-per-bin", type=int,
                   default=decay.DEFAULT_MIN_PAIRS_PER_BIN)
    p.add_argument("--max-cohort", type=int, default=ingest.DEFAULT_MAX_COHORT)
    p.add_argument("--exclude-school", action="append", default=[])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=run_analyze)

    p = sub.add_parser("synth", help="generate a synthetic city as CSV files")
    p.add_argument("--n-schools", type=int, default=600)
    p.add_argument("--city-radius", type=float, default=15.0)
    p.add_argument("--p0", type=float, default=0.75)
    p.add_argument("--alpha", type=float, default=-0.62)
    p.add_argument("--d0", type=float, default=1.0)
    p.add_argument("--homophily", type=float, default=0.0)
    p.add_argument("--degree-boost", type=float, default=0.0)
    p.add_argument("--gradient", type=float, default=0.0)
    p.add_argument("--n-apartments", type=int, default=2000)
    p.add_argument("--price-coupling", type=float, default=0.0)
    p.add_argument("--students-per-school", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=run_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (GeosegError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

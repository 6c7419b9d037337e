#!/usr/bin/env python3
"""End-to-end round trip on a synthetic city.

Generates a homophilous city, runs the full analyze pipeline on the
emitted CSV files, and prints recovered statistics next to the planted
ground truth.
"""

import argparse
import json
import tempfile
from pathlib import Path

from geoseg.cli import main as cli_main


def run(n_schools, homophily, seed, workdir):
    city = workdir / "city"
    out = workdir / "results"
    assert cli_main([
        "synth",
        "--n-schools", str(n_schools),
        "--homophily", str(homophily),
        "--seed", str(seed),
        "--out-dir", str(city),
    ]) == 0
    assert cli_main([
        "analyze",
        "--students", str(city / "students.csv"),
        "--edges", str(city / "edges.csv"),
        "--schools", str(city / "schools.csv"),
        "--apartments", str(city / "apartments.csv"),
        "--center-lat", "0", "--center-lon", "0",
        "--k", "20", "--radius-km", "3",
        "--simulations", "1000",
        "--seed", str(seed),
        "--out-dir", str(out),
    ]) == 0

    truth = json.loads((city / "ground_truth.json").read_text())
    report = json.loads((out / "report.json").read_text())
    seg = report["segregation"]
    null = report["null_model"]
    print(f"planted decay exponent : {truth['config']['decay_exponent']}")
    print(f"recovered exponent     : {report['decay_fit']['exponent']:.3f}")
    print(f"planted homophily scale: {truth['config']['homophily_scale']}")
    print(f"S_d(20) = {seg['digital_segregation']['value']:.3f} "
          f"(p = {seg['digital_segregation']['p_value']:.4g})")
    print(f"S_g(20) = {seg['geographic_segregation']['value']:.3f} "
          f"(p = {seg['geographic_segregation']['p_value']:.4g})")
    print(f"null S_d(1): mean {null['simulated_mean']:.4f}, "
          f"sd {null['simulated_sd']:.4f}, max {null['simulated_max']:.4f}, "
          f"observed {null['observed']:.4f}, p {null['empirical_p']:.4g}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-schools", type=int, default=600)
    parser.add_argument("--homophily", type=float, default=5.0)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--keep", type=Path, default=None,
                        help="directory to keep outputs in (default: temp)")
    args = parser.parse_args()
    if args.keep:
        args.keep.mkdir(parents=True, exist_ok=True)
        run(args.n_schools, args.homophily, args.seed, args.keep)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            run(args.n_schools, args.homophily, args.seed, Path(tmp))

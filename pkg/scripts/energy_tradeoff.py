"""Scan energy and detection delay of adaptive scanning versus a fixed fast scan.

Sweeps the slow-scan ceiling i_max and the simulated hour of day, comparing each
against the always-i_min baseline on the same world, incidents and seeds.

    python3 scripts/energy_tradeoff.py --out results/energy.csv
"""
import argparse
import csv
import statistics
from pathlib import Path

from shield.simulator import SimConfig, run

WORLD = {"type": "synthetic", "n_nodes": 40, "n_communities": 4, "n_locations": 20,
         "sim_duration_s": 2 * 86400, "rng_seed": 7}


def config(hour: int, seed: int, i_min: float, i_max: float) -> SimConfig:
    start = 86400 + hour * 3600
    return SimConfig.from_dict({
        "world": WORLD, "start_s": start, "duration_s": 2 * 3600, "seed": seed,
        "scan": {"i_min_s": i_min, "i_max_s": i_max, "emergency_s": 1},
        "incidents": [{"time_s": start + 900 * k + 97, "location": (3 * k) % 20, "severity": 40}
                      for k in range(8)],
    })


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--i-min", type=float, default=10.0)
    ap.add_argument("--i-max", type=float, nargs="+", default=[10, 30, 60, 120, 240])
    ap.add_argument("--hours", type=int, nargs="+", default=[2, 14])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--out", default="results/energy.csv")
    args = ap.parse_args()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "i_max_s", "seed", "energy", "baseline_energy", "ratio",
                    "mean_delay_s", "baseline_delay_s", "availability"])
        for hour in args.hours:
            for i_max in args.i_max:
                ratios = []
                for seed in range(args.seeds):
                    adaptive = run(config(hour, seed, args.i_min, i_max))
                    base = run(config(hour, seed, args.i_min, args.i_min))
                    ratio = adaptive.total_energy / base.total_energy
                    ratios.append(ratio)
                    w.writerow([hour, i_max, seed, f"{adaptive.total_energy:.2f}", f"{base.total_energy:.2f}",
                                f"{ratio:.4f}", adaptive.mean_response_time_s, base.mean_response_time_s,
                                adaptive.availability])
                print(f"hour {hour:2d} i_max {i_max:5.0f}s energy ratio {statistics.fmean(ratios):.3f}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

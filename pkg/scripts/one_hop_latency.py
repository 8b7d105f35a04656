"""One-hop delivery time against distance for isolated friend pairs.

    python3 scripts/one_hop_latency.py --pairs 2000 --out results/one_hop.csv
"""
import argparse
import csv
import statistics
from pathlib import Path

import numpy as np

from shield.simulator import SimConfig, Simulation, StaticWorld


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--max-distance", type=float, default=60.0, help="beyond 50 m nothing is delivered")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="results/one_hop.csv")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    dist = rng.uniform(0.0, args.max_distance, args.pairs)
    positions, locations, history = {}, {}, []
    for k, d in enumerate(dist):
        positions[2 * k], positions[2 * k + 1] = (1000.0 * k, 0.0), (1000.0 * k + d, 0.0)
        locations[2 * k] = locations[2 * k + 1] = k
        history.append((2 * k, 2 * k + 1, 10, 3600))
    cfg = SimConfig.from_dict({"incidents": [{"time_s": 0, "location": k, "victim": 2 * k}
                                             for k in range(args.pairs)],
                               "duration_s": 60, "seed": args.seed})
    cfg.world = StaticWorld(positions, locations, history)
    result = Simulation(cfg).run()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["distance_m", "response_s"])
        for d, inc in zip(dist, result.report.incidents):
            rt = inc["response_time_s"]
            w.writerow([f"{d:.3f}", "" if rt is None else f"{rt:.3f}"])
    rts = result.report.response_times_s
    print(f"delivered {len(rts)}/{args.pairs}; mean {statistics.fmean(rts):.2f}s, "
          f"min {min(rts):.2f}s, max {max(rts):.2f}s")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Run N randomized safety scenarios and report the verdict tally.

Each run draws random grants and incumbent activations over a 10-cell,
6-LSA-channel cluster and checks the post-run scanners (exclusivity,
evacuation safety/compliance, conservation).
"""

import argparse
import os
from concurrent.futures import ProcessPoolExecutor

from lsasim.experiments import run_randomized_safety


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed0", type=int, default=0)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args()

    seeds = list(range(args.seed0, args.seed0 + args.runs))
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(run_randomized_safety, seeds, chunksize=8))
    else:
        results = [run_randomized_safety(s) for s in seeds]

    checks = ("exclusivity", "evac_safety", "evac_compliance", "conservation")
    bad = [r for r in results if not all(r[c] for c in checks)]
    suspensions = sum(r["suspensions"] for r in results)
    grants = sum(r["grants"] for r in results)
    print(f"runs={len(results)} grants={grants} suspensions={suspensions} failures={len(bad)}")
    for r in bad:
        print(f"  seed {r['seed']}: " + ", ".join(c for c in checks if not r[c]))
        for p in r["problems"]:
            print(f"    {p}")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())

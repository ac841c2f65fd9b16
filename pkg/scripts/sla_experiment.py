#!/usr/bin/env python3
"""Shared-vs-standalone comparison over seeds: per-operator goodput ratio and
p95 delay-to-serve, using the bundled mocn_shared / standalone_A/B scenarios.

An operator's traffic realization is identical between its standalone run and
the shared run at the same seed, so each row is a paired comparison.
"""

import argparse
import os
from concurrent.futures import ProcessPoolExecutor

from lsasim.experiments import run_sla_pair


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--seed0", type=int, default=201)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args()

    seeds = list(range(args.seed0, args.seed0 + args.seeds))
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(run_sla_pair, seeds))

    print(f"{'seed':>6} {'op':>4} {'alone Mb/s':>11} {'shared Mb/s':>12} "
          f"{'ratio':>6} {'alone p95':>9} {'shared p95':>10}")
    ordered = 0
    for r in results:
        seed_ok = True
        for op in ("opA", "opB"):
            row = r[op]
            ratio = row["shared_goodput_bps"] / max(row["standalone_goodput_bps"], 1.0)
            print(f"{r['seed']:>6} {op:>4} {row['standalone_goodput_bps']/1e6:>11.1f} "
                  f"{row['shared_goodput_bps']/1e6:>12.1f} {ratio:>6.3f} "
                  f"{row['standalone_delay_p95']:>9} {row['shared_delay_p95']:>10}")
            if row["shared_delay_p95"] > row["standalone_delay_p95"]:
                seed_ok = False
        ordered += seed_ok
    print(f"\nseeds with shared p95 <= standalone for both operators: {ordered}/{len(results)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Reaction-time contrast between the per-TTI (Layer-2) reporting interface
and slow batch reporting, on the bundled batch_vs_realtime scenario."""

import argparse

from lsasim.experiments import run_latency_pair


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--seed0", type=int, default=301)
    args = parser.parse_args()

    print(f"{'seed':>6} {'realtime mean':>14} {'batch mean':>11} {'batch period':>13}")
    for seed in range(args.seed0, args.seed0 + args.seeds):
        r = run_latency_pair(seed)
        print(f"{seed:>6} {r['realtime']['mean']:>14.1f} {r['batch']['mean']:>11.1f} "
              f"{r['batch_period']:>13}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Experiment drivers behind the acceptance suite and the scripts/ wrappers.

Includes the randomized safety-scenario generator (random grants and
incumbent activations over a 10-cell, 6-LSA-channel cluster) and the paired
shared-vs-standalone and batch-vs-realtime comparison runners.
"""

import dataclasses
import json
from importlib import resources

from .engine import RngStream
from .scenario import Scenario, parse_scenario
from .simulation import RunResult, run_scenario

RANDOMIZED_HORIZON = 10_000
RANDOMIZED_CELLS = 10
RANDOMIZED_LSA_CHANNELS = 6


def load_corpus_scenario(name: str) -> Scenario:
    text = resources.files("lsasim").joinpath(f"corpus/{name}.json").read_text(encoding="utf-8")
    return parse_scenario(text)


def with_sensing_mode(scenario: Scenario, mode: str) -> Scenario:
    return dataclasses.replace(scenario, sensing=dataclasses.replace(scenario.sensing, mode=mode))


def make_randomized_scenario(seed: int) -> Scenario:
    """Random grants/activations over 10 cells and 6 LSA channels.

    Activations are announced with a lead of evacuation_deadline + control
    path latency + margin, the advance notice the repository contractually
    has; every other element (zones, windows, channel subsets, request
    times) is drawn from the seed.
    """
    rng = RngStream(seed, "scenario")
    horizon = RANDOMIZED_HORIZON
    evac_deadline = 100
    repo_latency = 2
    control_latency = 1
    lead = evac_deadline + repo_latency + 2 * control_latency + 10

    channels = [
        {
            "id": i + 1,
            "center_freq_mhz": 3505.0 + 10.0 * i,
            "bandwidth_mhz": 10.0,
            "regime": "lsa",
            "max_eirp_dbm": 30.0,
            "rat": "5G-NR",
        }
        for i in range(RANDOMIZED_LSA_CHANNELS)
    ]
    channels.append(
        {"id": 101, "center_freq_mhz": 2110.0, "bandwidth_mhz": 10.0, "regime": "licensed",
         "operator": "opA", "max_eirp_dbm": 30.0, "rat": "5G-NR"}
    )
    channels.append(
        {"id": 102, "center_freq_mhz": 2130.0, "bandwidth_mhz": 10.0, "regime": "licensed",
         "operator": "opB", "max_eirp_dbm": 30.0, "rat": "5G-NR"}
    )

    def rect_zone(zid: str, x0: float, y0: float, x1: float, y1: float) -> dict:
        return {"id": zid, "polygon": [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]}

    zones = [
        rect_zone("west", 0.0, 0.0, 480.0, 600.0),
        rect_zone("east", 520.0, 0.0, 1000.0, 600.0),
        rect_zone("all", 0.0, 0.0, 1000.0, 600.0),
    ]
    zone_ids = [z["id"] for z in zones]

    cells = []
    for i in range(RANDOMIZED_CELLS):
        x = 50.0 + 100.0 * (i % 5) + 400.0 * (i // 5)
        y = 150.0 + 300.0 * (i % 2)
        cells.append(
            {
                "id": f"cell{i:02d}",
                "position": [x, y],
                "rats": ["5G-NR"],
                "eirp_dbm": {"5G-NR": 24.0},
                "operators": ["opA", "opB"],
                "max_lsa_channels": None,
            }
        )

    grant_requests = []
    n_grants = 5 + rng.next_below(5)
    for _ in range(n_grants):
        licensee = "opA" if rng.next_below(2) == 0 else "opB"
        n_ch = 1 + rng.next_below(3)
        chans = sorted({1 + rng.next_below(RANDOMIZED_LSA_CHANNELS) for _ in range(n_ch)})
        start = rng.next_below(horizon // 2)
        end = min(horizon, start + 2000 + rng.next_below(horizon - start))
        grant_requests.append(
            {
                "licensee": licensee,
                "channels": chans,
                "zone": zone_ids[rng.next_below(len(zone_ids))],
                "window": [start, end],
                "request_at": max(0, start - rng.next_below(500)),
            }
        )

    activations = []
    n_acts = 3 + rng.next_below(5)
    for k in range(n_acts):
        start = lead + rng.next_below(horizon - lead - 500)
        end = min(horizon, start + 400 + rng.next_below(2000))
        n_ch = 1 + rng.next_below(2)
        chans = sorted({1 + rng.next_below(RANDOMIZED_LSA_CHANNELS) for _ in range(n_ch)})
        activations.append(
            {
                "id": f"act{k:02d}",
                "incumbent": "radar",
                "channels": chans,
                "zone": zone_ids[rng.next_below(len(zone_ids))],
                "window": [start, end],
                "announce_at": start - lead,
                "protection_dbm": -110.0,
            }
        )

    doc = {
        "schema": "lsasim-scenario-1",
        "name": f"randomized-{seed}",
        "horizon_ttis": horizon,
        "master_seed": seed,
        "region": [0.0, 0.0, 1000.0, 600.0],
        "channels": channels,
        "zones": zones,
        "operators": [
            {"id": "opA", "sync_offset_ttis": 0, "sla_baseline_bps": 0.0},
            {"id": "opB", "sync_offset_ttis": 0, "sla_baseline_bps": 0.0},
        ],
        "mocn": {"enabled": False},
        "cells": cells,
        "sharing_rules": {
            "max_lsa_channels_per_licensee": 6,
            "evacuation_deadline_ttis": evac_deadline,
        },
        "repositories": [{"id": "repo-1", "latency_ttis": repo_latency}],
        "control_latency_ttis": control_latency,
        "grant_requests": grant_requests,
        "incumbent_activations": activations,
        "propagation": {
            "pl0_db": 38.0,
            "exponent": 3.7,
            "noise_density_dbm_per_hz": -174.0,
            "shadowing_sigma_db": 0.0,
        },
        "sensing": {"mode": "off"},
        "crrm": {"t_dca_ttis": 50, "beta_dca": 0.9, "min_rsrp_dbm": -120.0},
        "coverage_map": None,
        "traffic": [
            {
                "operator": "opA",
                "arrival_rate_per_s": 0.4,
                "holding_time_mean_s": 2.0,
                "kind": "best_effort",
                "rate_bps": 2000000,
                "activity_factor": 0.5,
                "burst_mean_s": 0.3,
            },
            {
                "operator": "opB",
                "arrival_rate_per_s": 0.4,
                "holding_time_mean_s": 2.0,
                "kind": "best_effort",
                "rate_bps": 2000000,
                "activity_factor": 0.5,
                "burst_mean_s": 0.3,
            },
        ],
        "metrics": {"window_ttis": 1000},
    }
    return parse_scenario(json.dumps(doc))


def run_randomized_safety(seed: int) -> dict:
    """One randomized run; returns the safety verdicts (worker-safe)."""
    result = run_scenario(make_randomized_scenario(seed))
    return {
        "seed": seed,
        "exclusivity": result.verdicts["exclusivity_safety"]["pass"],
        "evac_safety": result.verdicts["evacuation_safety"]["pass"],
        "evac_compliance": result.verdicts["evacuation_compliance"]["pass"],
        "conservation": result.verdicts["conservation"]["pass"],
        "problems": sorted(
            p
            for v in result.verdicts.values()
            for p in v["problems"]
        )[:5],
        "suspensions": len(result.controller.evacuation_ledger),
        "grants": len(result.controller.grants),
    }


def run_sla_pair(seed: int) -> dict:
    """Shared vs standalone goodput and delay for one seed (paired traffic)."""
    shared = run_scenario(load_corpus_scenario("mocn_shared"), seed_override=seed)
    alone_a = run_scenario(load_corpus_scenario("standalone_A"), seed_override=seed)
    alone_b = run_scenario(load_corpus_scenario("standalone_B"), seed_override=seed)
    out = {
        "seed": seed,
        "verdicts_pass": shared.all_pass and alone_a.all_pass and alone_b.all_pass,
        "conservation_pass": all(
            r.verdicts["conservation"]["pass"] for r in (shared, alone_a, alone_b)
        ),
    }
    for op, alone in (("opA", alone_a), ("opB", alone_b)):
        s = shared.summary_dict()["per_operator"][op]
        a = alone.summary_dict()["per_operator"][op]
        out[op] = {
            "shared_goodput_bps": s["goodput_bps"],
            "standalone_goodput_bps": a["goodput_bps"],
            "shared_delay_p95": s["delay_p95_ttis"] or 0,
            "standalone_delay_p95": a["delay_p95_ttis"] or 0,
        }
    return out


def run_latency_pair(seed: int) -> dict:
    """Mean reaction time under realtime vs batch reporting for one seed."""
    base = load_corpus_scenario("batch_vs_realtime")
    rt = run_scenario(with_sensing_mode(base, "realtime"), seed_override=seed)
    batch = run_scenario(with_sensing_mode(base, "batch"), seed_override=seed)

    def reaction_stats(result: RunResult) -> dict:
        delays = [r.delay_ttis for r in result.metrics.reactions]
        return {
            "count": len(delays),
            "mean": sum(delays) / len(delays) if delays else None,
            "min": min(delays) if delays else None,
        }

    return {
        "seed": seed,
        "realtime": reaction_stats(rt),
        "batch": reaction_stats(batch),
        "batch_period": base.sensing.batch_period_ttis,
    }

import json

import pytest

from lsasim.cli import CORPUS_SCENARIOS, corpus_text
from lsasim.scenario import ScenarioValidationError, parse_scenario

MINIMAL = {
    "schema": "lsasim-scenario-1",
    "name": "minimal",
    "horizon_ttis": 1000,
    "master_seed": 1,
    "region": [0.0, 0.0, 100.0, 100.0],
    "channels": [
        {"id": 1, "center_freq_mhz": 3505.0, "bandwidth_mhz": 10.0, "regime": "lsa"}
    ],
    "zones": [{"id": "z", "polygon": [[0, 0], [100, 0], [100, 100], [0, 100]]}],
    "operators": [{"id": "opA"}],
    "cells": [
        {"id": "c1", "position": [50.0, 50.0], "rats": ["5G-NR"],
         "eirp_dbm": {"5G-NR": 24.0}, "operators": ["opA"]}
    ],
}


def doc(**overrides):
    d = json.loads(json.dumps(MINIMAL))
    d.update(overrides)
    return d


def test_minimal_scenario_parses():
    sc = parse_scenario(json.dumps(MINIMAL))
    assert sc.name == "minimal"
    assert sc.horizon_ttis == 1000
    assert len(sc.channels) == 1 and len(sc.cells) == 1


def test_json_syntax_error_reports_line():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario("{\n  broken\n}")
    assert any(err.startswith("syntax: line 2") for err in exc.value.errors)


def test_unknown_zone_reference_named():
    d = doc(grant_requests=[{
        "licensee": "opA", "channels": [1], "zone": "atlantis",
        "window": [0, 100], "request_at": 0,
    }])
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(json.dumps(d))
    assert any("reference" in e and "atlantis" in e for e in exc.value.errors)


def test_bandwidth_over_100mhz_is_range_error():
    d = doc(channels=[{"id": 1, "center_freq_mhz": 3550.0, "bandwidth_mhz": 120.0, "regime": "lsa"}])
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(json.dumps(d))
    assert any("range" in e and "exceeds 100" in e for e in exc.value.errors)


def test_all_errors_reported_in_one_pass():
    d = doc(
        horizon_ttis=-5,
        channels=[{"id": 1, "center_freq_mhz": 3550.0, "bandwidth_mhz": 0.0, "regime": "lsa"}],
        traffic=[{"operator": "ghost", "rate_bps": -1, "kind": "gbr",
                  "arrival_rate_per_s": 1.0, "holding_time_mean_s": 1.0}],
    )
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(json.dumps(d))
    errors = "\n".join(exc.value.errors)
    assert "horizon_ttis" in errors
    assert "non-positive bandwidth" in errors
    assert "ghost" in errors
    assert "rate_bps" in errors
    assert len(exc.value.errors) >= 4


def test_out_of_range_values_never_silently_defaulted():
    d = doc(crrm={"beta_dca": 1.5})
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(json.dumps(d))
    assert any("beta_dca" in e for e in exc.value.errors)


def test_self_intersecting_zone_rejected():
    d = doc(zones=[{"id": "bow", "polygon": [[0, 0], [10, 10], [10, 0], [0, 10]]}])
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(json.dumps(d))
    assert any("self-intersecting" in e for e in exc.value.errors)


def test_band_limits_enforced_when_present():
    d = doc(band_limits_mhz=[3400.0, 3508.0])
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(json.dumps(d))
    assert any("outside band plan" in e for e in exc.value.errors)


def test_fixed_sessions_parse_and_validate():
    d = doc(sessions=[{
        "id": "pin-1", "operator": "opA", "arrival_tti": 0, "departure_tti": 500,
        "kind": "best_effort", "rate_bps": 1_000_000, "activity_factor": 1.0,
        "position": [10.0, 10.0],
    }])
    sc = parse_scenario(json.dumps(d))
    assert sc.fixed_sessions[0].session_id == "pin-1"
    d["sessions"][0]["departure_tti"] = 0
    with pytest.raises(ScenarioValidationError):
        parse_scenario(json.dumps(d))


@pytest.mark.parametrize("name", sorted(CORPUS_SCENARIOS))
def test_corpus_scenarios_parse_and_round_trip(name):
    """Parse -> print -> parse is a fixed point for every bundled scenario."""
    first = parse_scenario(corpus_text(name))
    second = parse_scenario(first.to_json())
    assert first == second
    assert second.to_json() == first.to_json()


def test_minimal_round_trip_fixed_point():
    first = parse_scenario(json.dumps(MINIMAL))
    assert parse_scenario(first.to_json()) == first

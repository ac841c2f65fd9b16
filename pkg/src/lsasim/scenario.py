"""Scenario configuration: parsing, validation (all errors in one pass),
serialization, and the typed Scenario object the simulation consumes.

One JSON document = one reproducible experiment. Errors are prefixed with
their category: "syntax:" (malformed document), "reference:" (dangling id),
"range:" (invariant breach).
"""

import json
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .crrm import CrrmParams, ExternalInterferer, SmallCell
from .controller import SharingRules
from .radio import PropagationParams
from .spectrum import (
    Channel,
    GeoZone,
    IncumbentActivation,
    Regime,
    Window,
    make_zone,
    validate_band_limits,
    validate_channel_plan,
)
from .traffic import MobilityConfig, PlannedSession, TrafficProfile

SCHEMA_VERSION = "lsasim-scenario-1"


class ScenarioValidationError(Exception):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class OperatorConfig:
    id: str
    sync_offset_ttis: int = 0
    sla_baseline_bps: float = 0.0


@dataclass(frozen=True)
class RepositoryConfig:
    id: str
    latency_ttis: int = 1


@dataclass(frozen=True)
class GrantRequest:
    licensee: str
    channels: frozenset[int]
    zone: str
    window: Window
    request_at: int


@dataclass(frozen=True)
class ActivationSchedule:
    activation: IncumbentActivation
    announce_at: int


@dataclass(frozen=True)
class SensingConfig:
    mode: str = "realtime"  # "realtime" | "batch" | "off"
    period_ttis: int = 10
    batch_period_ttis: int = 1000
    delivery_latency_ttis: int = 1
    beta_map: float = 0.9


@dataclass(frozen=True)
class DebugConfig:
    inject_post_deadline_tx: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    horizon_ttis: int
    master_seed: int
    region: tuple[float, float, float, float]
    channels: tuple[Channel, ...]
    zones: tuple[GeoZone, ...]
    operators: tuple[OperatorConfig, ...]
    mocn_enabled: bool
    cells: tuple[SmallCell, ...]
    sharing_rules: SharingRules
    repositories: tuple[RepositoryConfig, ...]
    control_latency_ttis: int
    grant_requests: tuple[GrantRequest, ...]
    activations: tuple[ActivationSchedule, ...]
    propagation: PropagationParams
    sensing: SensingConfig
    crrm: CrrmParams
    coverage_map_pitch_m: Optional[float]
    traffic: tuple[TrafficProfile, ...]
    external_interferers: tuple[ExternalInterferer, ...]
    metrics_window_ttis: int
    fixed_sessions: tuple[PlannedSession, ...] = ()
    band_limits_mhz: Optional[tuple[float, float]] = None
    debug: DebugConfig = DebugConfig()

    def channel_map(self) -> dict[int, Channel]:
        return {c.id: c for c in self.channels}

    def zone_map(self) -> dict[str, GeoZone]:
        return {z.id: z for z in self.zones}

    def to_dict(self) -> dict:
        """Canonical JSON-compatible form; parse(dumps(to_dict())) == self."""
        out: dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "horizon_ttis": self.horizon_ttis,
            "master_seed": self.master_seed,
            "region": list(self.region),
            "channels": [
                {
                    "id": c.id,
                    "center_freq_mhz": c.center_freq_mhz,
                    "bandwidth_mhz": c.bandwidth_mhz,
                    "regime": c.regime.value,
                    **({"operator": c.operator} if c.operator else {}),
                    "max_eirp_dbm": c.max_eirp_dbm,
                    "rat": c.rat,
                }
                for c in self.channels
            ],
            "zones": [
                {
                    "id": z.id,
                    "polygon": [list(p) for p in z.polygon],
                    **({"tags": sorted(z.tags)} if z.tags else {}),
                    **(
                        {"reference_point": list(z.reference_point)}
                        if z.reference_point is not None
                        else {}
                    ),
                }
                for z in self.zones
            ],
            "operators": [
                {
                    "id": o.id,
                    "sync_offset_ttis": o.sync_offset_ttis,
                    "sla_baseline_bps": o.sla_baseline_bps,
                }
                for o in self.operators
            ],
            "mocn": {"enabled": self.mocn_enabled},
            "cells": [
                {
                    "id": c.cell_id,
                    "position": list(c.position),
                    "rats": list(c.rats),
                    "eirp_dbm": dict(sorted(c.eirp_dbm.items())),
                    "operators": sorted(c.operators),
                    "max_lsa_channels": c.max_lsa_channels,
                    "cluster": c.cluster,
                }
                for c in self.cells
            ],
            "sharing_rules": {
                "max_lsa_channels_per_licensee": self.sharing_rules.max_lsa_channels_per_licensee,
                "evacuation_deadline_ttis": self.sharing_rules.evacuation_deadline_ttis,
                **(
                    {
                        "eligible_zones": {
                            op: sorted(zs)
                            for op, zs in sorted(self.sharing_rules.eligible_zones.items())
                        }
                    }
                    if self.sharing_rules.eligible_zones
                    else {}
                ),
            },
            "repositories": [
                {"id": r.id, "latency_ttis": r.latency_ttis} for r in self.repositories
            ],
            "control_latency_ttis": self.control_latency_ttis,
            "grant_requests": [
                {
                    "licensee": g.licensee,
                    "channels": sorted(g.channels),
                    "zone": g.zone,
                    "window": [g.window.start, g.window.end],
                    "request_at": g.request_at,
                }
                for g in self.grant_requests
            ],
            "incumbent_activations": [
                {
                    "id": a.activation.activation_id,
                    "incumbent": a.activation.incumbent,
                    "channels": sorted(a.activation.channels),
                    "zone": a.activation.zone,
                    "window": [a.activation.window.start, a.activation.window.end],
                    "announce_at": a.announce_at,
                    "protection_dbm": a.activation.protection_dbm,
                }
                for a in self.activations
            ],
            "propagation": {
                "pl0_db": self.propagation.pl0_db,
                "exponent": self.propagation.exponent,
                "noise_density_dbm_per_hz": self.propagation.noise_density_dbm_per_hz,
                "shadowing_sigma_db": self.propagation.shadowing_sigma_db,
            },
            "sensing": {
                "mode": self.sensing.mode,
                "period_ttis": self.sensing.period_ttis,
                "batch_period_ttis": self.sensing.batch_period_ttis,
                "delivery_latency_ttis": self.sensing.delivery_latency_ttis,
                "beta_map": self.sensing.beta_map,
            },
            "crrm": {
                "t_dca_ttis": self.crrm.t_dca_ttis,
                "beta_dca": self.crrm.beta_dca,
                "min_rsrp_dbm": self.crrm.min_rsrp_dbm,
                "hysteresis_db": self.crrm.hysteresis_db,
                "ttt_ttis": self.crrm.ttt_ttis,
                "w_max": self.crrm.w_max,
                "sla_window_ttis": self.crrm.sla_window_ttis,
                "sync_tolerance_ttis": self.crrm.sync_tolerance_ttis,
                "decision_latency_ttis": self.crrm.decision_latency_ttis,
                "icic_threshold_dbm": self.crrm.icic_threshold_dbm,
            },
            "coverage_map": (
                {"pitch_m": self.coverage_map_pitch_m}
                if self.coverage_map_pitch_m is not None
                else None
            ),
            "traffic": [
                {
                    "operator": t.operator,
                    "arrival_rate_per_s": t.arrival_rate_per_s,
                    "holding_time_mean_s": t.holding_time_mean_s,
                    "kind": t.kind,
                    "rate_bps": t.rate_bps,
                    "activity_factor": t.activity_factor,
                    "burst_mean_s": t.burst_mean_s,
                    "mobility": {
                        "kind": t.mobility.kind,
                        "speed_mps": t.mobility.speed_mps,
                        "pause_s": t.mobility.pause_s,
                    },
                }
                for t in self.traffic
            ],
            "external_interferers": [
                {
                    "id": e.interferer_id,
                    "position": list(e.position),
                    "channel": e.channel_id,
                    "eirp_dbm": e.eirp_dbm,
                    "window": [e.window.start, e.window.end],
                }
                for e in self.external_interferers
            ],
            "metrics": {"window_ttis": self.metrics_window_ttis},
        }
        if self.fixed_sessions:
            out["sessions"] = [
                {
                    "id": s.session_id,
                    "operator": s.operator,
                    "arrival_tti": s.arrival_tti,
                    "departure_tti": s.departure_tti,
                    "kind": s.kind,
                    "rate_bps": s.rate_bps,
                    "activity_factor": s.activity_factor,
                    "burst_mean_s": s.burst_mean_s,
                    "position": list(s.position),
                }
                for s in self.fixed_sessions
            ]
        if self.band_limits_mhz is not None:
            out["band_limits_mhz"] = list(self.band_limits_mhz)
        if self.debug.inject_post_deadline_tx:
            out["debug"] = {"inject_post_deadline_tx": True}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _get(doc: Mapping, key: str, typ, path: str, errors: list[str], default=None, required=False):
    if key not in doc:
        if required:
            errors.append(f"syntax: {path}.{key} missing")
        return default
    value = doc[key]
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, typ) or isinstance(value, bool) and typ is not bool:
        errors.append(f"syntax: {path}.{key} must be {getattr(typ, '__name__', typ)}")
        return default
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document; every problem is reported in
    one pass via ScenarioValidationError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError([f"syntax: line {exc.lineno}: {exc.msg}"]) from exc
    if not isinstance(doc, dict):
        raise ScenarioValidationError(["syntax: top level must be an object"])

    errors: list[str] = []
    schema = doc.get("schema")
    if schema != SCHEMA_VERSION:
        errors.append(f"syntax: schema must be {SCHEMA_VERSION!r}, got {schema!r}")

    name = _get(doc, "name", str, "$", errors, default="unnamed")
    horizon = _get(doc, "horizon_ttis", int, "$", errors, required=True, default=1)
    if horizon is not None and horizon <= 0:
        errors.append("range: horizon_ttis must be positive")
        horizon = 1
    seed = _get(doc, "master_seed", int, "$", errors, default=0)

    region_raw = doc.get("region", [0.0, 0.0, 1000.0, 1000.0])
    region = (0.0, 0.0, 1000.0, 1000.0)
    if (
        not isinstance(region_raw, list)
        or len(region_raw) != 4
        or not all(isinstance(v, (int, float)) for v in region_raw)
    ):
        errors.append("syntax: region must be [x_min, y_min, x_max, y_max]")
    else:
        region = tuple(float(v) for v in region_raw)
        if region[0] >= region[2] or region[1] >= region[3]:
            errors.append("range: region must have positive extent")

    # channels -----------------------------------------------------------
    channels: list[Channel] = []
    for i, raw in enumerate(doc.get("channels", [])):
        path = f"channels[{i}]"
        cid = _get(raw, "id", int, path, errors, required=True, default=-1)
        freq = _get(raw, "center_freq_mhz", float, path, errors, required=True, default=0.0)
        bw = _get(raw, "bandwidth_mhz", float, path, errors, required=True, default=1.0)
        regime_raw = _get(raw, "regime", str, path, errors, required=True, default="lsa")
        try:
            regime = Regime(regime_raw)
        except ValueError:
            errors.append(f"range: {path}.regime {regime_raw!r} not one of licensed/unlicensed/lsa")
            regime = Regime.LSA
        channels.append(
            Channel(
                id=cid,
                center_freq_mhz=freq,
                bandwidth_mhz=bw,
                regime=regime,
                operator=raw.get("operator"),
                max_eirp_dbm=_get(raw, "max_eirp_dbm", float, path, errors, default=30.0),
                rat=_get(raw, "rat", str, path, errors, default="5G-NR"),
            )
        )
    if not channels:
        errors.append("syntax: at least one channel required")
    for violation in validate_channel_plan(channels):
        errors.append(f"range: {violation}")
    band_limits = None
    if "band_limits_mhz" in doc:
        raw = doc["band_limits_mhz"]
        if isinstance(raw, list) and len(raw) == 2:
            band_limits = (float(raw[0]), float(raw[1]))
            for violation in validate_band_limits(channels, *band_limits):
                errors.append(f"range: {violation}")
        else:
            errors.append("syntax: band_limits_mhz must be [low, high]")
    channel_ids = {c.id for c in channels}

    # zones ----------------------------------------------------------------
    zones: list[GeoZone] = []
    for i, raw in enumerate(doc.get("zones", [])):
        path = f"zones[{i}]"
        zid = _get(raw, "id", str, path, errors, required=True, default=f"zone{i}")
        poly = raw.get("polygon")
        if not isinstance(poly, list) or len(poly) < 3:
            errors.append(f"range: {path}.polygon needs at least 3 vertices")
            continue
        try:
            zones.append(make_zone(zid, poly, raw.get("tags", ()), raw.get("reference_point")))
        except (ValueError, TypeError) as exc:
            errors.append(f"range: {exc}")
    zone_ids = {z.id for z in zones}
    if len(zone_ids) != len(zones):
        errors.append("range: duplicate zone id")

    # operators --------------------------------------------------------------
    operators: list[OperatorConfig] = []
    for i, raw in enumerate(doc.get("operators", [])):
        path = f"operators[{i}]"
        operators.append(
            OperatorConfig(
                id=_get(raw, "id", str, path, errors, required=True, default=f"op{i}"),
                sync_offset_ttis=_get(raw, "sync_offset_ttis", int, path, errors, default=0),
                sla_baseline_bps=_get(raw, "sla_baseline_bps", float, path, errors, default=0.0),
            )
        )
    operator_ids = {o.id for o in operators}
    if not operators:
        errors.append("syntax: at least one operator required")
    if len(operator_ids) != len(operators):
        errors.append("range: duplicate operator id")
    for c in channels:
        if c.operator is not None and c.operator not in operator_ids:
            errors.append(f"reference: channel {c.id} names unknown operator {c.operator!r}")

    mocn_enabled = bool(doc.get("mocn", {}).get("enabled", False))

    # cells --------------------------------------------------------------------
    cells: list[SmallCell] = []
    for i, raw in enumerate(doc.get("cells", [])):
        path = f"cells[{i}]"
        cell_id = _get(raw, "id", str, path, errors, required=True, default=f"cell{i}")
        pos = raw.get("position")
        if not isinstance(pos, list) or len(pos) != 2:
            errors.append(f"syntax: {path}.position must be [x, y]")
            pos = [0.0, 0.0]
        rats = raw.get("rats", ["5G-NR"])
        if not isinstance(rats, list) or not rats:
            errors.append(f"range: {path}.rats must name at least one RAT")
            rats = ["5G-NR"]
        eirp = raw.get("eirp_dbm", {})
        if not isinstance(eirp, dict) or not all(r in eirp for r in rats):
            errors.append(f"range: {path}.eirp_dbm must cover every RAT in rats")
            eirp = {r: 24.0 for r in rats}
        ops = raw.get("operators", [])
        for op in ops:
            if op not in operator_ids:
                errors.append(f"reference: {path} serves unknown operator {op!r}")
        if not ops:
            errors.append(f"range: {path} must serve at least one operator")
        max_lsa = raw.get("max_lsa_channels")
        if max_lsa is not None and (not isinstance(max_lsa, int) or max_lsa < 1):
            errors.append(f"range: {path}.max_lsa_channels must be null or >= 1")
            max_lsa = None
        cells.append(
            SmallCell(
                cell_id=cell_id,
                position=(float(pos[0]), float(pos[1])),
                rats=tuple(rats),
                eirp_dbm={str(k): float(v) for k, v in eirp.items()},
                operators=frozenset(ops),
                max_lsa_channels=max_lsa,
                cluster=raw.get("cluster", "edge"),
            )
        )
    if len({c.cell_id for c in cells}) != len(cells):
        errors.append("range: duplicate cell id")

    # sharing rules ---------------------------------------------------------------
    rules_raw = doc.get("sharing_rules", {})
    quota = _get(rules_raw, "max_lsa_channels_per_licensee", int, "sharing_rules", errors, default=8)
    evac = _get(rules_raw, "evacuation_deadline_ttis", int, "sharing_rules", errors, default=100)
    if evac is not None and evac <= 0:
        errors.append("range: sharing_rules.evacuation_deadline_ttis must be positive")
        evac = 100
    eligible: dict[str, frozenset[str]] = {}
    for op, zs in rules_raw.get("eligible_zones", {}).items():
        if op not in operator_ids:
            errors.append(f"reference: sharing_rules.eligible_zones names unknown operator {op!r}")
        for z in zs:
            if z not in zone_ids:
                errors.append(f"reference: sharing_rules.eligible_zones[{op}] names unknown zone {z!r}")
        eligible[op] = frozenset(zs)
    sharing_rules = SharingRules(quota, evac, eligible)

    # repositories -------------------------------------------------------------------
    repositories: list[RepositoryConfig] = []
    for i, raw in enumerate(doc.get("repositories", [{"id": "repo-1", "latency_ttis": 1}])):
        path = f"repositories[{i}]"
        latency = _get(raw, "latency_ttis", int, path, errors, default=1)
        if latency is not None and latency < 0:
            errors.append(f"range: {path}.latency_ttis must be >= 0")
            latency = 0
        repositories.append(
            RepositoryConfig(_get(raw, "id", str, path, errors, required=True, default=f"repo{i}"), latency)
        )
    control_latency = _get(doc, "control_latency_ttis", int, "$", errors, default=1)
    if control_latency < 0:
        errors.append("range: control_latency_ttis must be >= 0")
        control_latency = 0

    # grant requests --------------------------------------------------------------------
    def parse_window(raw, path) -> Window:
        if (
            not isinstance(raw, list)
            or len(raw) != 2
            or not all(isinstance(v, int) for v in raw)
        ):
            errors.append(f"syntax: {path}.window must be [start_tti, end_tti]")
            return Window(0, 1)
        if raw[0] >= raw[1]:
            errors.append(f"range: {path}.window start must precede end")
            return Window(raw[0], raw[0] + 1)
        return Window(raw[0], raw[1])

    grant_requests: list[GrantRequest] = []
    for i, raw in enumerate(doc.get("grant_requests", [])):
        path = f"grant_requests[{i}]"
        licensee = _get(raw, "licensee", str, path, errors, required=True, default="")
        if licensee and licensee not in operator_ids:
            errors.append(f"reference: {path} names unknown licensee {licensee!r}")
        ch_list = raw.get("channels", [])
        for ch in ch_list:
            if ch not in channel_ids:
                errors.append(f"reference: {path} names unknown channel {ch}")
        zone = _get(raw, "zone", str, path, errors, required=True, default="")
        if zone and zone not in zone_ids:
            errors.append(f"reference: {path} names unknown zone {zone!r}")
        request_at = _get(raw, "request_at", int, path, errors, default=0)
        grant_requests.append(
            GrantRequest(licensee, frozenset(ch_list), zone, parse_window(raw.get("window"), path), request_at)
        )

    # incumbent activations -------------------------------------------------------------
    activations: list[ActivationSchedule] = []
    for i, raw in enumerate(doc.get("incumbent_activations", [])):
        path = f"incumbent_activations[{i}]"
        act_id = _get(raw, "id", str, path, errors, required=True, default=f"act{i}")
        ch_list = raw.get("channels", [])
        for ch in ch_list:
            if ch not in channel_ids:
                errors.append(f"reference: {path} names unknown channel {ch}")
        zone = _get(raw, "zone", str, path, errors, required=True, default="")
        if zone and zone not in zone_ids:
            errors.append(f"reference: {path} names unknown zone {zone!r}")
        window = parse_window(raw.get("window"), path)
        announce = raw.get("announce_at", window.start)
        if not isinstance(announce, int) or announce < 0:
            errors.append(f"range: {path}.announce_at must be a TTI index >= 0")
            announce = max(0, window.start)
        activations.append(
            ActivationSchedule(
                IncumbentActivation(
                    activation_id=act_id,
                    incumbent=_get(raw, "incumbent", str, path, errors, default="incumbent"),
                    channels=frozenset(ch_list),
                    zone=zone,
                    window=window,
                    protection_dbm=_get(raw, "protection_dbm", float, path, errors, default=-100.0),
                ),
                announce,
            )
        )
    if len({a.activation.activation_id for a in activations}) != len(activations):
        errors.append("range: duplicate activation id")

    # propagation / sensing / crrm -----------------------------------------------------
    prop_raw = doc.get("propagation", {})
    pl0 = _get(prop_raw, "pl0_db", float, "propagation", errors, default=38.0)
    exponent = _get(prop_raw, "exponent", float, "propagation", errors, default=3.7)
    sigma = _get(prop_raw, "shadowing_sigma_db", float, "propagation", errors, default=0.0)
    if pl0 <= 0:
        errors.append("range: propagation.pl0_db must be positive")
        pl0 = 38.0
    if exponent < 2.0:
        errors.append("range: propagation.exponent must be >= 2")
        exponent = 2.0
    if sigma < 0:
        errors.append("range: propagation.shadowing_sigma_db must be >= 0")
        sigma = 0.0
    propagation = PropagationParams(
        pl0_db=pl0,
        exponent=exponent,
        noise_density_dbm_per_hz=_get(prop_raw, "noise_density_dbm_per_hz", float, "propagation", errors, default=-174.0),
        shadowing_sigma_db=sigma,
    )

    sens_raw = doc.get("sensing", {})
    mode = _get(sens_raw, "mode", str, "sensing", errors, default="realtime")
    if mode not in ("realtime", "batch", "off"):
        errors.append(f"range: sensing.mode {mode!r} not one of realtime/batch/off")
        mode = "off"
    beta_map = _get(sens_raw, "beta_map", float, "sensing", errors, default=0.9)
    if not 0.0 < beta_map < 1.0:
        errors.append("range: sensing.beta_map must lie in (0, 1)")
        beta_map = 0.9
    sensing = SensingConfig(
        mode=mode,
        period_ttis=max(1, _get(sens_raw, "period_ttis", int, "sensing", errors, default=10)),
        batch_period_ttis=max(1, _get(sens_raw, "batch_period_ttis", int, "sensing", errors, default=1000)),
        delivery_latency_ttis=max(0, _get(sens_raw, "delivery_latency_ttis", int, "sensing", errors, default=1)),
        beta_map=beta_map,
    )

    crrm_raw = doc.get("crrm", {})
    beta_dca = _get(crrm_raw, "beta_dca", float, "crrm", errors, default=0.9)
    if not 0.0 < beta_dca < 1.0:
        errors.append("range: crrm.beta_dca must lie in (0, 1)")
        beta_dca = 0.9
    t_dca = _get(crrm_raw, "t_dca_ttis", int, "crrm", errors, default=50)
    if t_dca <= 0:
        errors.append("range: crrm.t_dca_ttis must be positive")
        t_dca = 50
    w_max = _get(crrm_raw, "w_max", float, "crrm", errors, default=8.0)
    if w_max < 1.0:
        errors.append("range: crrm.w_max must be >= 1")
        w_max = 8.0
    icic_raw = crrm_raw.get("icic_threshold_dbm")
    crrm_params = CrrmParams(
        t_dca_ttis=t_dca,
        beta_dca=beta_dca,
        min_rsrp_dbm=_get(crrm_raw, "min_rsrp_dbm", float, "crrm", errors, default=-110.0),
        hysteresis_db=_get(crrm_raw, "hysteresis_db", float, "crrm", errors, default=3.0),
        ttt_ttis=max(1, _get(crrm_raw, "ttt_ttis", int, "crrm", errors, default=16)),
        w_max=w_max,
        sla_window_ttis=max(1, _get(crrm_raw, "sla_window_ttis", int, "crrm", errors, default=1000)),
        sync_tolerance_ttis=_get(crrm_raw, "sync_tolerance_ttis", int, "crrm", errors, default=1),
        decision_latency_ttis=max(0, _get(crrm_raw, "decision_latency_ttis", int, "crrm", errors, default=1)),
        icic_threshold_dbm=float(icic_raw) if isinstance(icic_raw, (int, float)) else None,
        pf_window_ttis=max(1, _get(crrm_raw, "pf_window_ttis", int, "crrm", errors, default=100)),
    )

    cov_raw = doc.get("coverage_map")
    pitch = None
    if isinstance(cov_raw, dict):
        pitch = _get(cov_raw, "pitch_m", float, "coverage_map", errors, default=50.0)
        if pitch is not None and pitch <= 0:
            errors.append("range: coverage_map.pitch_m must be positive")
            pitch = 50.0

    # traffic -----------------------------------------------------------------------
    traffic: list[TrafficProfile] = []
    for i, raw in enumerate(doc.get("traffic", [])):
        path = f"traffic[{i}]"
        op = _get(raw, "operator", str, path, errors, required=True, default="")
        if op and op not in operator_ids:
            errors.append(f"reference: {path} names unknown operator {op!r}")
        kind = _get(raw, "kind", str, path, errors, default="best_effort")
        if kind not in ("gbr", "best_effort"):
            errors.append(f"range: {path}.kind {kind!r} not one of gbr/best_effort")
            kind = "best_effort"
        rate = _get(raw, "rate_bps", int, path, errors, required=True, default=1)
        if rate <= 0:
            errors.append(f"range: {path}.rate_bps must be positive")
            rate = 1
        arrival = _get(raw, "arrival_rate_per_s", float, path, errors, default=0.0)
        if arrival < 0:
            errors.append(f"range: {path}.arrival_rate_per_s must be >= 0")
            arrival = 0.0
        activity = _get(raw, "activity_factor", float, path, errors, default=1.0)
        if not 0.0 < activity <= 1.0:
            errors.append(f"range: {path}.activity_factor must lie in (0, 1]")
            activity = 1.0
        burst = _get(raw, "burst_mean_s", float, path, errors, default=0.5)
        if burst <= 0:
            errors.append(f"range: {path}.burst_mean_s must be positive")
            burst = 0.5
        holding = _get(raw, "holding_time_mean_s", float, path, errors, default=10.0)
        if holding <= 0:
            errors.append(f"range: {path}.holding_time_mean_s must be positive")
            holding = 10.0
        mob_raw = raw.get("mobility", {})
        mob_kind = mob_raw.get("kind", "static")
        if mob_kind not in ("static", "waypoint"):
            errors.append(f"range: {path}.mobility.kind {mob_kind!r} not one of static/waypoint")
            mob_kind = "static"
        traffic.append(
            TrafficProfile(
                operator=op,
                arrival_rate_per_s=arrival,
                holding_time_mean_s=holding,
                kind=kind,
                rate_bps=rate,
                activity_factor=activity,
                burst_mean_s=burst,
                mobility=MobilityConfig(
                    kind=mob_kind,
                    speed_mps=float(mob_raw.get("speed_mps", 0.0)),
                    pause_s=float(mob_raw.get("pause_s", 0.0)),
                ),
            )
        )

    # external interferers ----------------------------------------------------------
    externals: list[ExternalInterferer] = []
    for i, raw in enumerate(doc.get("external_interferers", [])):
        path = f"external_interferers[{i}]"
        ch = _get(raw, "channel", int, path, errors, required=True, default=-1)
        if ch not in channel_ids:
            errors.append(f"reference: {path} names unknown channel {ch}")
        pos = raw.get("position", [0.0, 0.0])
        if not isinstance(pos, list) or len(pos) != 2:
            errors.append(f"syntax: {path}.position must be [x, y]")
            pos = [0.0, 0.0]
        externals.append(
            ExternalInterferer(
                interferer_id=_get(raw, "id", str, path, errors, required=True, default=f"ext{i}"),
                position=(float(pos[0]), float(pos[1])),
                channel_id=ch,
                eirp_dbm=_get(raw, "eirp_dbm", float, path, errors, default=20.0),
                window=parse_window(raw.get("window"), path),
            )
        )

    metrics_window = _get(doc.get("metrics", {}), "window_ttis", int, "metrics", errors, default=1000)
    if metrics_window <= 0:
        errors.append("range: metrics.window_ttis must be positive")
        metrics_window = 1000

    # explicit pinned sessions (deterministic fixtures) -------------------------------
    fixed_sessions: list[PlannedSession] = []
    for i, raw in enumerate(doc.get("sessions", [])):
        path = f"sessions[{i}]"
        op = _get(raw, "operator", str, path, errors, required=True, default="")
        if op and op not in operator_ids:
            errors.append(f"reference: {path} names unknown operator {op!r}")
        kind = _get(raw, "kind", str, path, errors, default="best_effort")
        if kind not in ("gbr", "best_effort"):
            errors.append(f"range: {path}.kind {kind!r} not one of gbr/best_effort")
            kind = "best_effort"
        arrival = _get(raw, "arrival_tti", int, path, errors, default=0)
        departure = _get(raw, "departure_tti", int, path, errors, default=horizon)
        if arrival >= departure:
            errors.append(f"range: {path} arrival_tti must precede departure_tti")
            departure = arrival + 1
        rate = _get(raw, "rate_bps", int, path, errors, required=True, default=1)
        if rate <= 0:
            errors.append(f"range: {path}.rate_bps must be positive")
            rate = 1
        activity = _get(raw, "activity_factor", float, path, errors, default=1.0)
        if not 0.0 < activity <= 1.0:
            errors.append(f"range: {path}.activity_factor must lie in (0, 1]")
            activity = 1.0
        pos = raw.get("position", [0.0, 0.0])
        if not isinstance(pos, list) or len(pos) != 2:
            errors.append(f"syntax: {path}.position must be [x, y]")
            pos = [0.0, 0.0]
        fixed_sessions.append(
            PlannedSession(
                session_id=_get(raw, "id", str, path, errors, required=True, default=f"fixed-{i}"),
                operator=op,
                arrival_tti=arrival,
                departure_tti=departure,
                kind=kind,
                rate_bps=rate,
                activity_factor=activity,
                burst_mean_s=_get(raw, "burst_mean_s", float, path, errors, default=0.5),
                position=(float(pos[0]), float(pos[1])),
            )
        )

    debug_raw = doc.get("debug", {})
    debug = DebugConfig(inject_post_deadline_tx=bool(debug_raw.get("inject_post_deadline_tx", False)))

    if errors:
        raise ScenarioValidationError(errors)

    return Scenario(
        name=name,
        horizon_ttis=horizon,
        master_seed=seed,
        region=region,
        channels=tuple(channels),
        zones=tuple(zones),
        operators=tuple(operators),
        mocn_enabled=mocn_enabled,
        cells=tuple(cells),
        sharing_rules=sharing_rules,
        repositories=tuple(repositories),
        control_latency_ttis=control_latency,
        grant_requests=tuple(grant_requests),
        activations=tuple(activations),
        propagation=propagation,
        sensing=sensing,
        crrm=crrm_params,
        coverage_map_pitch_m=pitch,
        traffic=tuple(traffic),
        external_interferers=tuple(externals),
        metrics_window_ttis=metrics_window,
        fixed_sessions=tuple(fixed_sessions),
        band_limits_mhz=band_limits,
        debug=debug,
    )

"""KPI accumulation and post-run verdicts.

The safety scanners re-derive exclusivity and evacuation compliance from the
raw run log (transmission spans, grant/activation lifecycle records), never
from RRM internals, so they stay independent oracles of the code under test.
"""

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .geometry import Point, point_in_polygon

TTIS_PER_SECOND = 1000


class IncompleteRun(Exception):
    pass


@dataclass(frozen=True)
class ReactionTimeRecord:
    stimulus: str
    stimulus_tti: int
    action_tti: int

    @property
    def delay_ttis(self) -> int:
        return self.action_tti - self.stimulus_tti


class DelayHistogram:
    """Bits-weighted integer-delay histogram with deterministic percentiles."""

    def __init__(self):
        self._bits: dict[int, int] = {}
        self.total_bits = 0

    def add(self, delay_ttis: int, bits: int) -> None:
        if bits <= 0:
            return
        self._bits[delay_ttis] = self._bits.get(delay_ttis, 0) + bits
        self.total_bits += bits

    def percentile(self, q: float) -> Optional[int]:
        if self.total_bits == 0:
            return None
        target = q * self.total_bits
        cum = 0
        for delay in sorted(self._bits):
            cum += self._bits[delay]
            if cum >= target:
                return delay
        return max(self._bits)

    def mean(self) -> Optional[float]:
        if self.total_bits == 0:
            return None
        return sum(d * b for d, b in self._bits.items()) / self.total_bits


class SinrHistogram:
    """0.25 dB-binned SINR samples for percentile reporting."""

    BIN = 0.25

    def __init__(self):
        self._counts: dict[int, int] = {}
        self.total = 0
        self._sum = 0.0

    def add(self, sinr_db: float) -> None:
        self._counts[math.floor(sinr_db / self.BIN)] = (
            self._counts.get(math.floor(sinr_db / self.BIN), 0) + 1
        )
        self.total += 1
        self._sum += sinr_db

    def percentile(self, q: float) -> Optional[float]:
        if self.total == 0:
            return None
        target = q * self.total
        cum = 0
        for b in sorted(self._counts):
            cum += self._counts[b]
            if cum >= target:
                return b * self.BIN
        return max(self._counts) * self.BIN

    def mean(self) -> Optional[float]:
        return self._sum / self.total if self.total else None


@dataclass
class KpiWindow:
    index: int
    end_tti: int
    goodput_bits: dict[str, int] = field(default_factory=dict)
    outage_ttis: dict[str, int] = field(default_factory=dict)
    alive_ttis: dict[str, int] = field(default_factory=dict)
    sinr_sum: dict[str, float] = field(default_factory=dict)
    sinr_count: dict[str, int] = field(default_factory=dict)
    handovers: dict[str, int] = field(default_factory=dict)
    evacs: dict[str, int] = field(default_factory=dict)
    evac_violations: dict[str, int] = field(default_factory=dict)


class MetricsCollector:
    """Per-window KPI accumulator; windows partition [0, horizon)."""

    def __init__(self, window_ttis: int, operators: Sequence[str]):
        if window_ttis <= 0:
            raise ValueError("window must be positive")
        self.window_ttis = window_ttis
        self.operators = sorted(operators)
        self.windows: list[KpiWindow] = []
        self.delay = {op: DelayHistogram() for op in self.operators}
        self.sinr = {op: SinrHistogram() for op in self.operators}
        self.reactions: list[ReactionTimeRecord] = []

    def _window(self, tti: int) -> KpiWindow:
        index = tti // self.window_ttis
        while len(self.windows) <= index:
            i = len(self.windows)
            self.windows.append(KpiWindow(i, (i + 1) * self.window_ttis))
        return self.windows[index]

    def record(self, kind: str, value, tti: int, operator: str = "") -> None:
        w = self._window(tti)
        if kind == "goodput_bits":
            w.goodput_bits[operator] = w.goodput_bits.get(operator, 0) + int(value)
        elif kind == "outage_ttis":
            w.outage_ttis[operator] = w.outage_ttis.get(operator, 0) + int(value)
        elif kind == "alive_ttis":
            w.alive_ttis[operator] = w.alive_ttis.get(operator, 0) + int(value)
        elif kind == "sinr_db":
            w.sinr_sum[operator] = w.sinr_sum.get(operator, 0.0) + float(value)
            w.sinr_count[operator] = w.sinr_count.get(operator, 0) + 1
            self.sinr[operator].add(float(value))
        elif kind == "handover":
            w.handovers[operator] = w.handovers.get(operator, 0) + int(value)
        elif kind == "evac":
            w.evacs[operator] = w.evacs.get(operator, 0) + int(value)
        elif kind == "evac_violation":
            w.evac_violations[operator] = w.evac_violations.get(operator, 0) + int(value)
        else:
            raise ValueError(f"unknown sample kind {kind!r}")

    def record_delay(self, operator: str, delay_ttis: int, bits: int) -> None:
        self.delay[operator].add(delay_ttis, bits)

    def ensure_windows(self, horizon_ttis: int) -> None:
        """Materialize every window up to the horizon so none is omitted."""
        if horizon_ttis > 0:
            self._window(horizon_ttis - 1)

    def kpi_rows(self, baselines_bps: Mapping[str, float]) -> list[dict]:
        rows = []
        for w in self.windows:
            window_s = self.window_ttis / TTIS_PER_SECOND
            for op in self.operators:
                count = w.sinr_count.get(op, 0)
                mean_sinr = w.sinr_sum.get(op, 0.0) / count if count else float("nan")
                alive = w.alive_ttis.get(op, 0)
                outage = w.outage_ttis.get(op, 0)
                rows.append(
                    {
                        "window_end_tti": w.end_tti,
                        "operator": op,
                        "goodput_bps": w.goodput_bits.get(op, 0) / window_s,
                        "sla_baseline_bps": float(baselines_bps.get(op, 0.0)),
                        "outage_ratio": outage / alive if alive else 0.0,
                        "mean_sinr_db": mean_sinr,
                        "handover_count": w.handovers.get(op, 0),
                        "evac_count": w.evacs.get(op, 0),
                        "evac_violations": w.evac_violations.get(op, 0),
                    }
                )
        return rows


# -- post-run scanners -------------------------------------------------------


def build_tx_spans(records: Sequence[dict], horizon: int) -> list[dict]:
    """Reconstruct transmission spans [start, end) from tx_start/tx_end records."""
    open_spans: dict[tuple[str, int], dict] = {}
    spans: list[dict] = []
    for rec in records:
        if rec["kind"] == "tx_start":
            key = (rec["cell"], rec["channel"])
            open_spans[key] = {
                "cell": rec["cell"],
                "channel": rec["channel"],
                "start": rec["tti"],
                "grant_id": rec.get("grant_id", ""),
                "operators": rec.get("operators", []),
            }
        elif rec["kind"] == "tx_end":
            key = (rec["cell"], rec["channel"])
            span = open_spans.pop(key, None)
            if span is not None:
                span["end"] = rec["tti"]
                spans.append(span)
    for span in open_spans.values():
        span["end"] = horizon
        spans.append(span)
    spans.sort(key=lambda s: (s["start"], s["cell"], s["channel"]))
    return spans


def scan_exclusivity(
    records: Sequence[dict],
    spans: Sequence[dict],
    zone_polygons: Mapping[str, Sequence[Point]],
    cell_positions: Mapping[str, Point],
    horizon: Optional[int] = None,
    lsa_channels: Optional[set] = None,
) -> list[str]:
    """Conflicts between incumbent activations and licensee transmissions,
    between concurrently active grants of different licensees, and LSA
    transmissions with no covering grant at all."""
    conflicts: list[str] = []
    if lsa_channels:
        for span in spans:
            if span["channel"] in lsa_channels and not span["grant_id"]:
                conflicts.append(
                    f"uncovered LSA transmission: cell {span['cell']} ch {span['channel']} "
                    f"over [{span['start']}, {span['end']})"
                )
    activations = [r for r in records if r["kind"] == "activation_registered"]
    for act in activations:
        act_channels = set(act["channels"])
        a_start, a_end = act["window"]
        ring = zone_polygons[act["zone"]]
        for span in spans:
            if span["channel"] not in act_channels:
                continue
            if not (span["start"] < a_end and a_start < span["end"]):
                continue
            if point_in_polygon(cell_positions[span["cell"]], ring):
                conflicts.append(
                    f"activation {act['activation_id']} vs cell {span['cell']} "
                    f"ch {span['channel']} over [{max(span['start'], a_start)}, "
                    f"{min(span['end'], a_end)})"
                )

    # grant-vs-grant: reconstruct per-grant active intervals from the log
    grants: dict[str, dict] = {}
    active_intervals: dict[str, list[list[int]]] = {}
    for rec in records:
        gid = rec.get("grant_id")
        if rec["kind"] == "grant_issued":
            grants[gid] = rec
            active_intervals[gid] = [[rec["tti"], None]]
        elif rec["kind"] in ("grant_suspended", "grant_revoked") and gid in active_intervals:
            ivs = active_intervals[gid]
            if ivs and ivs[-1][1] is None:
                ivs[-1][1] = rec["tti"]
        elif rec["kind"] == "grant_reinstated" and gid in active_intervals:
            active_intervals[gid].append([rec["tti"], None])
    if horizon is None:
        horizon = max((s["end"] for s in spans), default=0)
        for rec in records:
            horizon = max(horizon, rec["tti"] + 1)
    for gid, ivs in active_intervals.items():
        # the exclusivity right exists only inside the grant's own window
        w_start, w_end = grants[gid]["window"]
        clipped = []
        for start, end in ivs:
            if end is None:
                end = horizon
            start, end = max(start, w_start), min(end, w_end)
            if start < end:
                clipped.append([start, end])
        active_intervals[gid] = clipped
    gids = sorted(grants)
    for i, ga in enumerate(gids):
        for gb in gids[i + 1 :]:
            a, b = grants[ga], grants[gb]
            if a["licensee"] == b["licensee"]:
                continue
            if not set(a["channels"]) & set(b["channels"]):
                continue
            if a["zone"] != b["zone"]:
                from .geometry import polygons_intersect

                if not polygons_intersect(zone_polygons[a["zone"]], zone_polygons[b["zone"]]):
                    continue
            for s1, e1 in active_intervals[ga]:
                for s2, e2 in active_intervals[gb]:
                    if s1 < e2 and s2 < e1:
                        conflicts.append(f"grants {ga}/{gb} both active in [{max(s1,s2)}, {min(e1,e2)})")
    return conflicts


def scan_evacuations(records: Sequence[dict], spans: Sequence[dict]) -> tuple[list[str], list[str]]:
    """Returns (safety violations, compliance violations).

    Safety: no transmission rides a suspended grant at any TTI past the
    deadline (until reinstatement). Compliance: every suspend is confirmed
    exactly once, at or before its deadline.
    """
    safety: list[str] = []
    compliance: list[str] = []
    suspends: dict[str, list[dict]] = {}
    confirms: dict[str, list[dict]] = {}
    reinstates: dict[str, list[int]] = {}
    for rec in records:
        if rec["kind"] == "grant_suspended":
            suspends.setdefault(rec["grant_id"], []).append(rec)
        elif rec["kind"] == "evac_confirmed":
            confirms.setdefault(rec["grant_id"], []).append(rec)
        elif rec["kind"] == "grant_reinstated":
            reinstates.setdefault(rec["grant_id"], []).append(rec["tti"])

    horizon = max((s["end"] for s in spans), default=0)
    for rec in records:
        horizon = max(horizon, rec["tti"] + 1)

    for gid in sorted(suspends):
        orders = suspends[gid]
        acks = confirms.get(gid, [])
        if len(acks) != len(orders):
            compliance.append(f"grant {gid}: {len(orders)} suspends but {len(acks)} confirmations")
        for k, order in enumerate(orders):
            deadline = order["deadline"]
            if k < len(acks) and acks[k]["confirmed_at"] > deadline:
                compliance.append(
                    f"grant {gid}: confirmed at {acks[k]['confirmed_at']} after deadline {deadline}"
                )
            later = [t for t in reinstates.get(gid, []) if t > order["tti"]]
            clear_until = min(later) if later else horizon
            for span in spans:
                if span["grant_id"] != gid:
                    continue
                lo = max(span["start"], deadline + 1)
                hi = min(span["end"], clear_until)
                if lo < hi:
                    safety.append(
                        f"grant {gid}: transmission by {span['cell']} ch {span['channel']} "
                        f"in [{lo}, {hi}) past deadline {deadline}"
                    )
    return safety, compliance


def scan_conservation(records: Sequence[dict]) -> list[str]:
    """offered == served + buffered, exact integers, per session at close-out."""
    problems = []
    for rec in records:
        if rec["kind"] != "session_final":
            continue
        if rec["offered_bits"] != rec["served_bits"] + rec["buffered_bits"]:
            problems.append(
                f"session {rec['session_id']}: offered {rec['offered_bits']} != "
                f"served {rec['served_bits']} + buffered {rec['buffered_bits']}"
            )
    return problems


def derive_reactions(records: Sequence[dict]) -> list[ReactionTimeRecord]:
    """Stimulus -> first corrective action, from the raw log.

    Interference onsets react via the first DCA reassignment or muting change
    at or after the onset; activation registrations react via the first
    applied suspension.
    """
    actions_dca = sorted(
        r["tti"] for r in records if r["kind"] in ("dca_reassign", "icic_mute")
    )
    actions_evac = sorted(
        r["tti"] for r in records if r["kind"] == "suspend_applied"
    )
    out = []
    for rec in records:
        if rec["kind"] == "interferer_on":
            t = rec["tti"]
            nxt = next((a for a in actions_dca if a >= t), None)
            if nxt is not None:
                out.append(ReactionTimeRecord(rec["interferer_id"], t, nxt))
        elif rec["kind"] == "activation_registered":
            t = rec["tti"]
            nxt = next((a for a in actions_evac if a >= t), None)
            if nxt is not None:
                out.append(ReactionTimeRecord(rec["activation_id"], t, nxt))
    return out


def scan_aggregation(records: Sequence[dict], windows_total_bits: int) -> list[str]:
    served = sum(r["served_bits"] for r in records if r["kind"] == "session_final")
    if served != windows_total_bits:
        return [f"window goodput sum {windows_total_bits} != served total {served}"]
    return []

"""Centralized RRM for a cluster of multi-RAT small cells.

Single point of interaction with the LSA controller: applies grant commands,
runs interference-aware dynamic channel assignment over EWMA tables, schedules
every TTI with weighted proportional fairness plus GBR reservations and ICIC
muting, and enforces the multi-operator SLA floor through per-operator weight
multipliers.

Spectral efficiency is Shannon capped at 8.0 bits/s/Hz (256-QAM); all power
averaging is linear-domain.
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .controller import CommandKind, GrantCommand
from .engine import keyed_normal
from .geometry import Point, point_in_polygon
from .radio import PropagationParams, dbm_to_mw, mw_to_dbm, pathloss_db
from .spectrum import Channel, GeoZone, Regime, Window

SPECTRAL_EFFICIENCY_CAP = 8.0  # log2(256), the 256-QAM ceiling
TTIS_PER_SECOND = 1000
_PF_EPS = 1.0


class UnknownGrant(KeyError):
    pass


class NoAdmissibleChannel(Exception):
    """A cell holds no grant-covered or licensed channel. Scheduling treats
    this as the stall condition (sessions buffer and count outage TTIs)
    rather than a fault; the class names the condition for callers that want
    to assert against it."""


@dataclass
class SmallCell:
    cell_id: str
    position: Point
    rats: tuple[str, ...]
    eirp_dbm: Mapping[str, float]
    operators: frozenset[str]
    max_lsa_channels: Optional[int] = None  # None = aggregate all admissible
    cluster: str = "edge"

    def best_eirp(self) -> float:
        return max(self.eirp_dbm.values())

    def eirp_for(self, rat: str) -> float:
        return self.eirp_dbm.get(rat, self.best_eirp())


@dataclass(frozen=True)
class CrrmParams:
    t_dca_ttis: int = 50
    beta_dca: float = 0.9
    min_rsrp_dbm: float = -110.0
    hysteresis_db: float = 3.0
    ttt_ttis: int = 16
    w_max: float = 8.0
    sla_window_ttis: int = 1000
    sync_tolerance_ttis: int = 1
    decision_latency_ttis: int = 1
    icic_threshold_dbm: Optional[float] = None
    pf_window_ttis: int = 100


@dataclass(frozen=True)
class ExternalInterferer:
    interferer_id: str
    position: Point
    channel_id: int
    eirp_dbm: float
    window: Window


@dataclass
class GrantView:
    """The cRRM's view of a grant, driven purely by controller commands."""

    grant_id: str
    licensee: str
    channels: frozenset[int]
    zone: str
    window: Window
    max_eirp_dbm: float
    usable: bool = True  # False once suspended or revoked
    revoked: bool = False


@dataclass
class SessionState:
    session_id: str
    operator: str
    kind: str  # "gbr" | "best_effort"
    rate_bps: int
    position: Point
    serving_cell: str
    channel_set: tuple[int, ...] = ()
    # FIFO of [offer_tti, bits] chunks; all integers
    buffer: deque = field(default_factory=deque)
    buffered_bits: int = 0
    offered_bits: int = 0
    served_bits: int = 0
    outage_ttis: int = 0
    active_ttis: int = 0
    avg_tput: float = 0.0  # PF average, bits per TTI
    ho_candidate: Optional[str] = None
    ho_streak: int = 0


@dataclass(frozen=True)
class AdmissionResult:
    admitted: bool
    reason: str = ""  # "", "no_coverage", "admission_denied"
    cell_id: Optional[str] = None
    rat: Optional[str] = None
    channels: tuple[int, ...] = ()


@dataclass(frozen=True)
class TtiAllocation:
    tti: int
    # (cell_id, channel_id) -> {session_id: fraction}
    entries: Mapping[tuple[str, int], Mapping[str, float]]
    muted: frozenset[tuple[str, int]]


def capacity_bits_per_tti(sinr_db: float, bandwidth_hz: float) -> float:
    """Shannon capacity per TTI, capped at 8 bits/s/Hz (256-QAM ceiling)."""
    sinr_lin = 10.0 ** (sinr_db / 10.0)
    se = min(math.log2(1.0 + sinr_lin), SPECTRAL_EFFICIENCY_CAP)
    return bandwidth_hz * se / TTIS_PER_SECOND


def _waterfill(budget: float, entries: Mapping[str, tuple[float, float]]) -> dict[str, float]:
    """Split `budget` across entries in proportion to weight, capped per entry.

    entries maps key -> (weight, cap); excess above a cap is redistributed to
    the still-unsatisfied entries until the budget or the demand runs out.
    """
    out = {k: 0.0 for k in entries}
    active = [k for k in sorted(entries) if entries[k][0] > 0.0 and entries[k][1] > 0.0]
    while budget > 1e-12 and active:
        total_w = sum(entries[k][0] for k in active)
        spent = 0.0
        still = []
        for k in active:
            weight, cap = entries[k]
            give = min(budget * weight / total_w, cap - out[k])
            out[k] += give
            spent += give
            if out[k] < cap - 1e-12:
                still.append(k)
        budget -= spent
        if spent <= 1e-15:
            break
        active = still
    return out


def check_sync(offsets_ttis: Mapping[str, int], tolerance_ttis: int) -> bool:
    """Sharing enabled iff the max pairwise clock offset is within tolerance."""
    values = list(offsets_ttis.values())
    if len(values) < 2:
        return True
    return max(values) - min(values) <= tolerance_ttis


def select_band_rat(
    kind: str, candidates: Sequence[tuple[int, Regime, float]]
) -> list[int]:
    """Deterministic channel preference.

    GBR: licensed first, then granted LSA, unlicensed last and never alone.
    Best effort: least loaded first across all regimes. Ties break to the
    lower channel id.
    """
    if kind == "gbr":
        rank = {Regime.LICENSED: 0, Regime.LSA: 1, Regime.UNLICENSED: 2}
        ordered = sorted(candidates, key=lambda c: (rank[c[1]], c[0]))
        if all(c[1] is Regime.UNLICENSED for c in candidates):
            return []
        return [c[0] for c in ordered]
    ordered = sorted(candidates, key=lambda c: (c[2], c[0]))
    return [c[0] for c in ordered]


def handover_decision(
    measurements: Mapping[str, float],
    serving_cell: str,
    hysteresis_db: float,
    ttt_ttis: int,
    candidate: Optional[str],
    streak: int,
) -> tuple[Optional[str], Optional[str], int]:
    """One time-to-trigger evaluation step.

    Returns (handover_target_or_None, new_candidate, new_streak). The target
    fires only after the best candidate has exceeded serving + hysteresis for
    ttt consecutive evaluations.
    """
    serving = measurements[serving_cell]
    best_id, best_rsrp = None, -math.inf
    for cid in sorted(measurements):
        if cid == serving_cell:
            continue
        if measurements[cid] > best_rsrp:
            best_id, best_rsrp = cid, measurements[cid]
    if best_id is None or best_rsrp <= serving + hysteresis_db:
        return None, None, 0
    if best_id != candidate:
        return None, best_id, 1
    streak += 1
    if streak >= ttt_ttis:
        return best_id, None, 0
    return None, best_id, streak


class Crrm:
    def __init__(
        self,
        cells: Iterable[SmallCell],
        channels: Mapping[int, Channel],
        zones: Mapping[str, GeoZone],
        params: CrrmParams,
        propagation: PropagationParams,
        operators: Sequence[str],
        mocn_enabled: bool,
        sync_offsets_ttis: Mapping[str, int],
        sla_baselines_bps: Mapping[str, float],
        master_seed: int = 0,
        external_interferers: Sequence[ExternalInterferer] = (),
    ):
        self.cells = {c.cell_id: c for c in cells}
        self.channels = dict(channels)
        self.zones = dict(zones)
        self.params = params
        self.propagation = propagation
        self.operators = tuple(operators)
        self.master_seed = master_seed
        self.externals = tuple(external_interferers)

        self.sharing_enabled = mocn_enabled and check_sync(
            sync_offsets_ttis, params.sync_tolerance_ttis
        )
        # operator -> pool of operators whose grants its sessions may ride
        if self.sharing_enabled:
            pool = frozenset(operators)
            self.pools = {op: pool for op in operators}
        else:
            self.pools = {op: frozenset((op,)) for op in operators}

        self.grants: dict[str, GrantView] = {}
        # (cell_id, channel_id) -> linear-mW EWMA of reported interference
        self.interference_table: dict[tuple[str, int], float] = {}
        self.cell_lsa: dict[str, tuple[int, ...]] = {c: () for c in self.cells}
        self.muted: set[tuple[str, int]] = set()
        self.sessions: dict[str, SessionState] = {}
        self._cell_sessions: dict[str, set[str]] = {c: set() for c in self.cells}
        self.op_weights: dict[str, float] = {op: 1.0 for op in operators}
        self.sla_baselines_bps = dict(sla_baselines_bps)
        self.window_served_bits: dict[str, int] = {op: 0 for op in operators}
        self.gbr_reserved: dict[tuple[str, int], float] = {}
        self.prev_load: dict[tuple[str, int], float] = {}
        self.total_served_bits: dict[str, int] = {op: 0 for op in operators}
        self.total_offered_bits: dict[str, int] = {op: 0 for op in operators}
        self.op_outage_ttis: dict[str, int] = {op: 0 for op in operators}
        self.op_alive_ttis: dict[str, int] = {op: 0 for op in operators}
        # channel_id -> tuple of cell ids that transmitted last TTI
        self._prev_tx_cells: dict[int, tuple[str, ...]] = {}
        self._epoch = 0  # bumped on any admissibility or transmitter-set change
        self._sinr_epoch: tuple = (0, ())
        self._sinr_cache: dict[tuple[str, int], tuple[tuple, float]] = {}
        self._pl_cache: dict[tuple[str, float, float], float] = {}
        self._eirp_cache: dict[tuple[str, int], tuple[int, float]] = {}
        self.counters = {
            "admitted": 0,
            "no_coverage": 0,
            "admission_denied": 0,
            "handovers": 0,
            "dca_reassignments": 0,
        }

    # -- radio helpers -------------------------------------------------------

    def _pathloss(self, cell: SmallCell, pos: Point) -> float:
        key = (cell.cell_id, pos[0], pos[1])
        pl = self._pl_cache.get(key)
        if pl is None:
            shadow = None
            if self.propagation.shadowing_sigma_db > 0.0:
                shadow = keyed_normal(
                    self.master_seed, "shadow", cell.cell_id,
                    round(pos[0], 1), round(pos[1], 1),
                )
            pl = pathloss_db(cell.position, pos, self.propagation, shadow)
            self._pl_cache[key] = pl
        return pl

    def rsrp_dbm(self, cell: SmallCell, pos: Point) -> float:
        return cell.best_eirp() - self._pathloss(cell, pos)

    def tx_eirp_dbm(self, cell_id: str, ch_id: int, tti: int) -> float:
        """Transmit EIRP on a channel: the cell's RAT power capped by the
        channel limit and, on LSA channels, by the covering grant's QoS
        condition."""
        key = (cell_id, ch_id)
        hit = self._eirp_cache.get(key)
        if hit is not None and hit[0] == self._epoch:
            return hit[1]
        cell = self.cells[cell_id]
        ch = self.channels[ch_id]
        eirp = min(cell.eirp_for(ch.rat), ch.max_eirp_dbm)
        if ch.regime is Regime.LSA:
            gid = self.covering_grant(cell_id, ch_id, tti)
            if gid:
                eirp = min(eirp, self.grants[gid].max_eirp_dbm)
        self._eirp_cache[key] = (self._epoch, eirp)
        return eirp

    def _interference_mw_at(self, pos: Point, channel: Channel, tti: int, exclude_cell: str) -> float:
        total = 0.0
        for ch_id, cell_ids in self._prev_tx_cells.items():
            other = self.channels[ch_id]
            if not (channel.low_mhz < other.high_mhz and other.low_mhz < channel.high_mhz):
                continue
            for cid in cell_ids:
                if cid == exclude_cell:
                    continue
                cell = self.cells[cid]
                total += dbm_to_mw(self.tx_eirp_dbm(cid, ch_id, tti) - self._pathloss(cell, pos))
        for ext in self.externals:
            if not ext.window.contains(tti):
                continue
            other = self.channels[ext.channel_id]
            if channel.low_mhz < other.high_mhz and other.low_mhz < channel.high_mhz:
                pl = pathloss_db(ext.position, pos, self.propagation)
                total += dbm_to_mw(ext.eirp_dbm - pl)
        return total

    def session_sinr_db(self, session: SessionState, ch_id: int, tti: int) -> float:
        """SINR of the session's downlink on one channel, using last TTI's
        transmitter set (1-TTI-delayed CQI)."""
        cache_key = (session.session_id, ch_id)
        hit = self._sinr_cache.get(cache_key)
        if hit is not None and hit[0] == self._sinr_epoch:
            return hit[1]
        cell = self.cells[session.serving_cell]
        ch = self.channels[ch_id]
        signal_mw = dbm_to_mw(
            self.tx_eirp_dbm(cell.cell_id, ch_id, tti) - self._pathloss(cell, session.position)
        )
        noise_mw = dbm_to_mw(self.propagation.noise_dbm(ch.bandwidth_hz))
        interference = self._interference_mw_at(session.position, ch, tti, cell.cell_id)
        sinr = 10.0 * math.log10(signal_mw / (noise_mw + interference))
        self._sinr_cache[cache_key] = (self._sinr_epoch, sinr)
        return sinr

    def _refresh_sinr_epoch(self, tti: int) -> None:
        ext_sig = tuple(e.interferer_id for e in self.externals if e.window.contains(tti))
        self._sinr_epoch = (self._epoch, ext_sig)

    def link_bits_per_tti(self, session: SessionState, ch_id: int, tti: int) -> float:
        return capacity_bits_per_tti(
            self.session_sinr_db(session, ch_id, tti), self.channels[ch_id].bandwidth_hz
        )

    def true_interference_dbm(self, cell_id: str, ch_id: int, tti: int) -> float:
        """Perfect-sensor measurement at a cell: aggregate co-channel power,
        floored at the channel noise power so estimates stay finite."""
        cell = self.cells[cell_id]
        ch = self.channels[ch_id]
        mw = self._interference_mw_at(cell.position, ch, tti, cell_id)
        noise_mw = dbm_to_mw(self.propagation.noise_dbm(ch.bandwidth_hz))
        return mw_to_dbm(max(mw, noise_mw))

    # -- grant admissibility ---------------------------------------------------

    def _cell_in_zone(self, cell: SmallCell, zone_id: str) -> bool:
        return point_in_polygon(cell.position, self.zones[zone_id].polygon)

    def _granted_channels(self, cell: SmallCell, pool: frozenset[str], tti: int) -> dict[int, str]:
        """channel_id -> covering grant id, for usable grants of the pool
        whose zone covers the cell and whose window contains tti."""
        out: dict[int, str] = {}
        for gid in sorted(self.grants):
            g = self.grants[gid]
            if not g.usable or g.licensee not in pool:
                continue
            if not g.window.contains(tti):
                continue
            if not self._cell_in_zone(cell, g.zone):
                continue
            for ch in g.channels:
                out.setdefault(ch, gid)
        return out

    def _cell_pool(self, cell: SmallCell) -> frozenset[str]:
        pool: set[str] = set()
        for op in cell.operators:
            pool |= self.pools.get(op, frozenset((op,)))
        return frozenset(pool)

    def admissible_channels(self, cell: SmallCell, operator: str, tti: int) -> list[tuple[int, Regime, str]]:
        """(channel, regime, covering grant id or '') usable by the operator's
        sessions on this cell right now."""
        out = []
        for ch_id in sorted(self.channels):
            ch = self.channels[ch_id]
            if ch.regime is Regime.LICENSED:
                if ch.operator == operator and operator in cell.operators:
                    out.append((ch_id, ch.regime, ""))
            elif ch.regime is Regime.UNLICENSED:
                out.append((ch_id, ch.regime, ""))
        granted = self._granted_channels(cell, self.pools.get(operator, frozenset((operator,))), tti)
        assigned = set(self.cell_lsa.get(cell.cell_id, ()))
        for ch_id in sorted(granted):
            if ch_id in assigned:
                out.append((ch_id, Regime.LSA, granted[ch_id]))
        return sorted(out)

    # -- session admission -----------------------------------------------------

    def admit_session(self, session: SessionState, tti: int) -> AdmissionResult:
        self._refresh_sinr_epoch(tti)
        best_cell, best_rsrp = None, -math.inf
        for cid in sorted(self.cells):
            cell = self.cells[cid]
            if session.operator not in cell.operators:
                continue
            rsrp = self.rsrp_dbm(cell, session.position)
            if rsrp > best_rsrp:
                best_cell, best_rsrp = cid, rsrp
        if best_cell is None or best_rsrp < self.params.min_rsrp_dbm:
            self.counters["no_coverage"] += 1
            return AdmissionResult(False, "no_coverage")

        session.serving_cell = best_cell
        cell = self.cells[best_cell]
        candidates = self.admissible_channels(cell, session.operator, tti)
        cand_tuples = [
            (ch, regime, self.prev_load.get((best_cell, ch), 0.0))
            for ch, regime, _gid in candidates
        ]
        ranking = select_band_rat(session.kind, cand_tuples)

        if session.kind == "gbr":
            projected = 0.0
            for ch_id in ranking:
                if self.channels[ch_id].regime is Regime.UNLICENSED:
                    continue
                free = max(0.0, 1.0 - self.gbr_reserved.get((best_cell, ch_id), 0.0))
                projected += free * self.link_bits_per_tti(session, ch_id, tti) * TTIS_PER_SECOND
            if projected < session.rate_bps or not ranking:
                self.counters["admission_denied"] += 1
                return AdmissionResult(False, "admission_denied")
            needed_bps = float(session.rate_bps)
            for ch_id in ranking:
                if needed_bps <= 0.0 or self.channels[ch_id].regime is Regime.UNLICENSED:
                    continue
                rate_bps = self.link_bits_per_tti(session, ch_id, tti) * TTIS_PER_SECOND
                if rate_bps <= 0.0:
                    continue
                key = (best_cell, ch_id)
                free = max(0.0, 1.0 - self.gbr_reserved.get(key, 0.0))
                take = min(free, needed_bps / rate_bps)
                self.gbr_reserved[key] = self.gbr_reserved.get(key, 0.0) + take
                needed_bps -= take * rate_bps

        session.channel_set = tuple(ranking)
        self.sessions[session.session_id] = session
        self._cell_sessions[best_cell].add(session.session_id)
        self.counters["admitted"] += 1
        rat = self.channels[ranking[0]].rat if ranking else cell.rats[0]
        return AdmissionResult(True, cell_id=best_cell, rat=rat, channels=tuple(ranking))

    def remove_session(self, session_id: str) -> Optional[SessionState]:
        session = self.sessions.pop(session_id, None)
        if session is None:
            return None
        self._cell_sessions[session.serving_cell].discard(session_id)
        if session.kind == "gbr":
            # release reservations proportionally (approximate: recompute from scratch)
            self._rebuild_gbr_reservations()
        return session

    def _rebuild_gbr_reservations(self) -> None:
        self.gbr_reserved.clear()
        for sid in sorted(self.sessions):
            s = self.sessions[sid]
            if s.kind != "gbr":
                continue
            needed_bps = float(s.rate_bps)
            for ch_id in s.channel_set:
                if needed_bps <= 0.0 or self.channels[ch_id].regime is Regime.UNLICENSED:
                    continue
                rate_bps = self.link_bits_per_tti(s, ch_id, 0) * TTIS_PER_SECOND
                if rate_bps <= 0.0:
                    continue
                key = (s.serving_cell, ch_id)
                free = max(0.0, 1.0 - self.gbr_reserved.get(key, 0.0))
                take = min(free, needed_bps / rate_bps)
                self.gbr_reserved[key] = self.gbr_reserved.get(key, 0.0) + take
                needed_bps -= take * rate_bps

    # -- dynamic channel assignment ---------------------------------------------

    def table_mw(self, cell_id: str, ch_id: int) -> float:
        noise = dbm_to_mw(self.propagation.noise_dbm(self.channels[ch_id].bandwidth_hz))
        return self.interference_table.get((cell_id, ch_id), noise)

    def ingest_interference_report(self, cell_id: str, ch_id: int, dbm: float) -> None:
        """Linear-domain EWMA update of the per-(cell, channel) table."""
        key = (cell_id, ch_id)
        new_mw = dbm_to_mw(dbm)
        old = self.interference_table.get(key)
        beta = self.params.beta_dca
        self.interference_table[key] = new_mw if old is None else beta * old + (1.0 - beta) * new_mw

    def dca_step(self, tti: int) -> list[tuple[str, tuple[int, ...], tuple[int, ...]]]:
        """Reassign each cell to its lowest-interference admissible channels.

        Cells are processed in descending order of their current channels'
        average interference. Being centralized, the step projects each
        reassignment it has already made onto the remaining cells' table views
        (predicted received power from the known topology); without that,
        symmetric clusters herd onto the same argmin channel forever instead
        of segregating. A reassignment is emitted only when the selected set
        differs from the current one; ties keep the current channel, then
        prefer the lower id. Returns (cell, old, new) tuples.
        """
        def current_metric(cid: str) -> float:
            chans = self.cell_lsa.get(cid, ())
            if not chans:
                return math.inf
            return max(self.table_mw(cid, ch) for ch in chans)

        order = sorted(self.cells, key=lambda c: (-current_metric(c), c))
        # working copy of the tables this step mutates via projections
        working: dict[tuple[str, int], float] = {}

        def view(cid: str, ch: int) -> float:
            key = (cid, ch)
            if key in working:
                return working[key]
            return self.table_mw(cid, ch)

        def project(mover: str, removed, added) -> None:
            if not self._cell_sessions.get(mover):
                return  # idle cells contribute no interference worth projecting
            mover_cell = self.cells[mover]
            for cid in order:
                if cid == mover:
                    continue
                rx_mw = dbm_to_mw(
                    mover_cell.best_eirp() - self._pathloss(mover_cell, self.cells[cid].position)
                )
                for ch in removed:
                    working[(cid, ch)] = max(view(cid, ch) - rx_mw, 0.0)
                for ch in added:
                    working[(cid, ch)] = view(cid, ch) + rx_mw

        reassignments = []
        for cid in order:
            cell = self.cells[cid]
            granted = self._granted_channels(cell, self._cell_pool(cell), tti)
            current = self.cell_lsa.get(cid, ())
            if not granted:
                if current:
                    self.cell_lsa[cid] = ()
                    reassignments.append((cid, current, ()))
                continue
            k = cell.max_lsa_channels if cell.max_lsa_channels is not None else len(granted)
            current_set = set(current)
            ordered = sorted(
                granted,
                key=lambda ch: (view(cid, ch), 0 if ch in current_set else 1, ch),
            )
            selection = tuple(sorted(ordered[:k]))
            if selection != current:
                self.cell_lsa[cid] = selection
                reassignments.append((cid, current, selection))
                project(cid, set(current) - set(selection), set(selection) - current_set)
        if reassignments:
            self.counters["dca_reassignments"] += len(reassignments)
            self._epoch += 1
            self._refresh_session_channels(tti)  # migration takes effect next TTI
        self._refresh_muting(tti)
        return reassignments

    def _refresh_muting(self, tti: int) -> None:
        threshold = self.params.icic_threshold_dbm
        old = set(self.muted)
        self.muted.clear()
        if threshold is not None:
            threshold_mw = dbm_to_mw(threshold)
            by_channel: dict[int, list[str]] = {}
            for cid in sorted(self.cells):
                for ch in self.cell_lsa.get(cid, ()):
                    by_channel.setdefault(ch, []).append(cid)
            for ch, cids in sorted(by_channel.items()):
                if len(cids) < 2:
                    continue
                if max(self.table_mw(c, ch) for c in cids) <= threshold_mw:
                    continue
                # mute the cheapest aggressor: fewest attached sessions, tie to lower id
                quiet = min(cids, key=lambda c: (len(self._cell_sessions[c]), c))
                self.muted.add((quiet, ch))
        if self.muted != old:
            self._epoch += 1

    def dca_converged_locally(self) -> bool:
        """True when no single cell can strictly lower its max table value by
        a unilateral change of its selected channel set (checked directly)."""
        for cid in sorted(self.cells):
            cell = self.cells[cid]
            granted = self._granted_channels(cell, self._cell_pool(cell), 0)
            current = self.cell_lsa.get(cid, ())
            if not current or not granted:
                continue
            k = len(current)
            value = max(self.table_mw(cid, ch) for ch in current)
            for combo in itertools.combinations(sorted(granted), k):
                if max(self.table_mw(cid, ch) for ch in combo) < value:
                    return False
        return True

    # -- grant command handling ----------------------------------------------

    def apply_grant_update(self, cmd: GrantCommand, now: int) -> dict:
        """Apply a controller command; returns a vacate report for Suspend.

        Suspension takes effect before this TTI's scheduling pass (command
        priority band precedes the scheduler), so transmissions on the grant's
        channels cease at `now`; the report carries the confirm timestamp.
        """
        if cmd.kind is CommandKind.ISSUE:
            g = cmd.grant
            assert g is not None
            self.grants[cmd.grant_id] = GrantView(
                g.grant_id, g.licensee, g.channels, g.zone, g.window, g.max_eirp_dbm
            )
            self._epoch += 1
            self._refresh_cell_assignments(now)
            return {"kind": "issue", "grant_id": cmd.grant_id}
        view = self.grants.get(cmd.grant_id)
        if view is None:
            raise UnknownGrant(cmd.grant_id)
        if cmd.kind is CommandKind.SUSPEND:
            view.usable = False
            self._epoch += 1
            moved = self._strip_channels(view.channels, now)
            return {
                "kind": "suspend",
                "grant_id": cmd.grant_id,
                "moved_sessions": moved,
                "confirm_at": now,
                "deadline": cmd.deadline,
            }
        if cmd.kind is CommandKind.REINSTATE:
            view.usable = True
            self._epoch += 1
            self._refresh_cell_assignments(now)
            return {"kind": "reinstate", "grant_id": cmd.grant_id}
        if cmd.kind is CommandKind.REVOKE:
            view.usable = False
            view.revoked = True
            self._epoch += 1
            moved = self._strip_channels(view.channels, now)
            return {"kind": "revoke", "grant_id": cmd.grant_id, "moved_sessions": moved}
        raise ValueError(cmd.kind)

    def expire_grant_window(self, grant_id: str, now: int) -> None:
        """Stop using a grant the moment its window closes; the controller's
        Revoke arrives a command latency later, but the window boundary is
        part of the grant contract and binds immediately."""
        view = self.grants.get(grant_id)
        if view is None or not view.usable:
            return
        view.usable = False
        self._epoch += 1
        self._strip_channels(view.channels, now)

    def refresh_assignments(self, now: int) -> None:
        """Re-evaluate cell and session channel sets (window starts etc.)."""
        self._epoch += 1
        self._refresh_cell_assignments(now)

    def _strip_channels(self, channels: frozenset[int], now: int) -> list[str]:
        """Drop channels no longer covered by any usable grant from every cell
        and from every session's channel set."""
        moved = []
        for cid in sorted(self.cells):
            cell = self.cells[cid]
            granted = self._granted_channels(cell, self._cell_pool(cell), now)
            current = self.cell_lsa.get(cid, ())
            kept = tuple(ch for ch in current if ch in granted)
            if kept != current:
                self.cell_lsa[cid] = kept
        for sid in sorted(self.sessions):
            s = self.sessions[sid]
            if any(ch in channels for ch in s.channel_set):
                moved.append(sid)
        self._refresh_session_channels(now)
        return moved

    def _refresh_cell_assignments(self, now: int) -> None:
        """Unbounded cells absorb newly admissible channels immediately;
        k-limited cells only fill empty capacity (stealing waits for dca_step)."""
        for cid in sorted(self.cells):
            cell = self.cells[cid]
            granted = self._granted_channels(cell, self._cell_pool(cell), now)
            current = list(self.cell_lsa.get(cid, ()))
            k = cell.max_lsa_channels if cell.max_lsa_channels is not None else len(granted)
            for ch in sorted(granted):
                if len(current) >= k:
                    break
                if ch not in current:
                    current.append(ch)
            self.cell_lsa[cid] = tuple(sorted(current))
        self._refresh_session_channels(now)

    def _refresh_session_channels(self, now: int) -> None:
        for sid in sorted(self.sessions):
            s = self.sessions[sid]
            cell = self.cells[s.serving_cell]
            cand = [
                (ch, regime, self.prev_load.get((s.serving_cell, ch), 0.0))
                for ch, regime, _g in self.admissible_channels(cell, s.operator, now)
            ]
            s.channel_set = tuple(select_band_rat(s.kind, cand))

    # -- per-TTI scheduling -----------------------------------------------------

    def tti_schedule(self, tti: int) -> TtiAllocation:
        """Weighted proportional-fair allocation with GBR reservations.

        Per (cell, channel): GBR sessions first get the fraction needed for
        their rate; the remainder is split between operators in proportion to
        their SLA weight multipliers (work-conserving, so an idle operator's
        share flows to the others), then proportional-fair within each
        operator (rate / average throughput), water-filled so no session
        receives more than its buffer needs. The operator-level split is what
        keeps a shared cell from serving one tenant below its
        standalone-equivalent share. Muted pairs get nothing.
        """
        self._refresh_sinr_epoch(tti)
        entries: dict[tuple[str, int], dict[str, float]] = {}
        served: dict[str, float] = {}
        new_load: dict[tuple[str, int], float] = {}

        for cid in sorted(self._cell_sessions):
            sids = self._cell_sessions[cid]
            if not sids:
                continue
            by_channel: dict[int, list[SessionState]] = {}
            for sid in sorted(sids):
                s = self.sessions[sid]
                if s.buffered_bits <= 0:
                    continue
                for ch in s.channel_set:
                    by_channel.setdefault(ch, []).append(s)
            for ch_id in sorted(by_channel):
                if (cid, ch_id) in self.muted:
                    continue
                attached = by_channel[ch_id]
                rates = {}
                for s in attached:
                    r = self.link_bits_per_tti(s, ch_id, tti)
                    if r > 0.0:
                        rates[s.session_id] = r
                if not rates:
                    continue
                alloc: dict[str, float] = {}
                available = 1.0

                # GBR reservations first
                for s in attached:
                    if s.kind != "gbr" or s.session_id not in rates:
                        continue
                    per_tti = s.rate_bps / TTIS_PER_SECOND
                    already = served.get(s.session_id, 0.0)
                    want_bits = min(float(s.buffered_bits) - already, per_tti - min(already, per_tti))
                    if want_bits <= 0.0:
                        continue
                    frac = min(available, want_bits / rates[s.session_id])
                    if frac <= 0.0:
                        continue
                    alloc[s.session_id] = alloc.get(s.session_id, 0.0) + frac
                    served[s.session_id] = already + frac * rates[s.session_id]
                    available -= frac

                # operator-weighted split, then PF within each operator
                by_op: dict[str, list[SessionState]] = {}
                for s in attached:
                    if s.session_id not in rates:
                        continue
                    if float(s.buffered_bits) - served.get(s.session_id, 0.0) > 0.0:
                        by_op.setdefault(s.operator, []).append(s)
                if available > 1e-12 and by_op:
                    op_entries = {}
                    for op, members in by_op.items():
                        need = sum(
                            (float(s.buffered_bits) - served.get(s.session_id, 0.0))
                            / rates[s.session_id]
                            for s in members
                        )
                        op_entries[op] = (self.op_weights.get(op, 1.0), need)
                    op_budget = _waterfill(available, op_entries)
                    for op in sorted(by_op):
                        budget = op_budget.get(op, 0.0)
                        if budget <= 0.0:
                            continue
                        pf_entries = {}
                        for s in by_op[op]:
                            rem = float(s.buffered_bits) - served.get(s.session_id, 0.0)
                            pf_entries[s.session_id] = (
                                rates[s.session_id] / max(s.avg_tput, _PF_EPS),
                                rem / rates[s.session_id],
                            )
                        shares = _waterfill(budget, pf_entries)
                        for sid, take in shares.items():
                            if take > 0.0:
                                alloc[sid] = alloc.get(sid, 0.0) + take
                                served[sid] = served.get(sid, 0.0) + take * rates[sid]

                if alloc:
                    entries[(cid, ch_id)] = alloc
                    new_load[(cid, ch_id)] = min(1.0, sum(alloc.values()))

        self.prev_load = new_load
        self._commit_service(served, tti)
        self._update_tx_set(entries)
        return TtiAllocation(tti, entries, frozenset(self.muted))

    def _commit_service(self, served: Mapping[str, float], tti: int) -> None:
        for sid in sorted(self.sessions):
            s = self.sessions[sid]
            got = int(served.get(sid, 0.0))
            got = min(got, s.buffered_bits)
            if got > 0:
                s.served_bits += got
                s.buffered_bits -= got
                self.window_served_bits[s.operator] = (
                    self.window_served_bits.get(s.operator, 0) + got
                )
                self.total_served_bits[s.operator] = (
                    self.total_served_bits.get(s.operator, 0) + got
                )
                self._drain_fifo(s, got, tti)
                if self._service_sink is not None:
                    self._service_sink(s, got, tti)
            self.op_alive_ttis[s.operator] = self.op_alive_ttis.get(s.operator, 0) + 1
            if s.buffered_bits > 0:
                s.active_ttis += 1
                if not s.channel_set:
                    s.outage_ttis += 1
                    self.op_outage_ttis[s.operator] = (
                        self.op_outage_ttis.get(s.operator, 0) + 1
                    )
            # PF average tracks service including zero TTIs
            w = self.params.pf_window_ttis
            s.avg_tput = (1.0 - 1.0 / w) * s.avg_tput + (1.0 / w) * got

    def _drain_fifo(self, s: SessionState, bits: int, tti: int) -> None:
        delays = self._delay_sink
        while bits > 0 and s.buffer:
            offer_tti, chunk = s.buffer[0]
            take = min(bits, chunk)
            if delays is not None:
                delays(s.operator, tti - offer_tti, take)
            if take == chunk:
                s.buffer.popleft()
            else:
                s.buffer[0][1] = chunk - take
            bits -= take

    _delay_sink: Optional[Callable[[str, int, int], None]] = None
    _service_sink: Optional[Callable[[SessionState, int, int], None]] = None

    def set_delay_sink(self, sink: Optional[Callable[[str, int, int], None]]) -> None:
        """Sink receives (operator, delay_ttis, bits) for every served chunk."""
        self._delay_sink = sink

    def set_service_sink(self, sink: Optional[Callable[[SessionState, int, int], None]]) -> None:
        """Sink receives (session, served_bits, tti) whenever service lands."""
        self._service_sink = sink

    def note_position_change(self) -> None:
        """Invalidate link caches after UE movement."""
        self._epoch += 1

    def covering_grant(self, cell_id: str, ch_id: int, tti: int) -> str:
        cell = self.cells[cell_id]
        granted = self._granted_channels(cell, self._cell_pool(cell), tti)
        return granted.get(ch_id, "")

    def offer_demand(self, session_id: str, tti: int, bits: int) -> None:
        if bits <= 0:
            return
        s = self.sessions[session_id]
        s.offered_bits += bits
        s.buffered_bits += bits
        s.buffer.append([tti, bits])
        self.total_offered_bits[s.operator] = self.total_offered_bits.get(s.operator, 0) + bits

    def _update_tx_set(self, entries: Mapping[tuple[str, int], Mapping[str, float]]) -> None:
        tx: dict[int, list[str]] = {}
        for (cid, ch_id), alloc in entries.items():
            if sum(alloc.values()) > 0.0:
                tx.setdefault(ch_id, []).append(cid)
        new = {ch: tuple(sorted(cids)) for ch, cids in tx.items()}
        if new != self._prev_tx_cells:
            self._prev_tx_cells = new
            self._epoch += 1

    def active_tx_pairs(self) -> list[tuple[str, int]]:
        """(cell, channel) pairs that transmitted in the last scheduled TTI."""
        out = []
        for ch, cids in sorted(self._prev_tx_cells.items()):
            for cid in cids:
                out.append((cid, ch))
        return sorted(out)

    # -- mobility / handover -----------------------------------------------------

    def evaluate_handover(self, session: SessionState) -> Optional[str]:
        measurements = {
            cid: self.rsrp_dbm(cell, session.position)
            for cid, cell in self.cells.items()
            if session.operator in cell.operators
        }
        if session.serving_cell not in measurements:
            return None
        target, cand, streak = handover_decision(
            measurements,
            session.serving_cell,
            self.params.hysteresis_db,
            self.params.ttt_ttis,
            session.ho_candidate,
            session.ho_streak,
        )
        session.ho_candidate = cand
        session.ho_streak = streak
        if target is not None:
            self._cell_sessions[session.serving_cell].discard(session.session_id)
            session.serving_cell = target
            self._cell_sessions[target].add(session.session_id)
            self.counters["handovers"] += 1
            self._refresh_session_channels(0)
        return target

    # -- MOCN SLA ------------------------------------------------------------------

    def enforce_mocn_sla(self, window_ttis: int) -> dict[str, float]:
        """Close the SLA window: weight = clamp(baseline/achieved, 1, W_max)."""
        multipliers = {}
        window_s = window_ttis / TTIS_PER_SECOND
        for op in sorted(self.operators):
            baseline_bits = self.sla_baselines_bps.get(op, 0.0) * window_s
            achieved = max(self.window_served_bits.get(op, 0), 1)
            if baseline_bits <= 0.0:
                multipliers[op] = 1.0
            else:
                multipliers[op] = min(max(baseline_bits / achieved, 1.0), self.params.w_max)
        self.op_weights = multipliers
        self.window_served_bits = {op: 0 for op in self.operators}
        return multipliers

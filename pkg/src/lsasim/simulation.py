"""Run orchestration: builds the engine, repositories, controller, cRRM,
traffic and metrics from a Scenario and drives the event loop to the horizon.

The domain log (self.records) is the raw material for the post-run safety
scanners; it captures grant/activation lifecycles, transmission spans,
DCA/muting actions and per-session close-out totals.
"""

from typing import Optional

from . import metrics as metrics_mod
from .controller import CommandKind, Controller, GrantCommand, GrantRejection
from .crrm import Crrm, SessionState
from .engine import (
    Engine,
    PRIO_DCA_HANDOVER,
    PRIO_GRANT_CONTROL,
    PRIO_METRICS,
    PRIO_SENSING,
    PRIO_TRAFFIC,
    PRIO_TTI_SCHEDULE,
    RngStream,
    trace_line,
)
from .metrics import MetricsCollector
from .radio import CoverageMap, SensingReport
from .repository import Repository
from .scenario import Scenario
from .traffic import DemandSource, WaypointMobility, generate_arrivals

MOBILITY_STEP_TTIS = 10


class Simulation:
    def __init__(self, scenario: Scenario, seed_override: Optional[int] = None, trace: bool = False):
        self.scenario = scenario
        self.seed = scenario.master_seed if seed_override is None else seed_override
        self.trace_lines: list[str] = [] if trace else None  # type: ignore[assignment]
        tracer = None
        if trace:
            tracer = lambda ev: self.trace_lines.append(trace_line(ev))
        self.engine = Engine(tracer=tracer)
        self.records: list[dict] = []

        self.channels = scenario.channel_map()
        self.zones = scenario.zone_map()
        operators = [o.id for o in scenario.operators]
        self.baselines_bps = {o.id: o.sla_baseline_bps for o in scenario.operators}

        self.repositories = {
            cfg.id: Repository(cfg.id, self.channels, self.zones) for cfg in scenario.repositories
        }
        self.repo_latency = {cfg.id: cfg.latency_ttis for cfg in scenario.repositories}
        self.controller = Controller("ctrl-1", self.channels, self.zones, scenario.sharing_rules)
        for repo_id in sorted(self.repositories):
            self.repositories[repo_id].subscribe("ctrl-1", self.repo_latency[repo_id])

        self.crrm = Crrm(
            cells=scenario.cells,
            channels=self.channels,
            zones=self.zones,
            params=scenario.crrm,
            propagation=scenario.propagation,
            operators=operators,
            mocn_enabled=scenario.mocn_enabled,
            sync_offsets_ttis={o.id: o.sync_offset_ttis for o in scenario.operators},
            sla_baselines_bps=self.baselines_bps,
            master_seed=self.seed,
            external_interferers=scenario.external_interferers,
        )
        self.metrics = MetricsCollector(scenario.metrics_window_ttis, operators)
        self.crrm.set_delay_sink(self.metrics.record_delay)
        self.crrm.set_service_sink(self._on_service)

        self.coverage_map = None
        if scenario.coverage_map_pitch_m is not None:
            x0, y0, x1, y1 = scenario.region
            self.coverage_map = CoverageMap(x0, y0, x1, y1, scenario.coverage_map_pitch_m)

        self._sources: dict[str, DemandSource] = {}
        self._mobiles: dict[str, WaypointMobility] = {}
        self._tick_scheduled = False
        self._prev_tx: dict[tuple[str, int], str] = {}  # (cell, ch) -> grant_id
        self._pending_batch: list[SensingReport] = []
        self._closed_sessions: set[str] = set()
        self._sinr_sampled_at: dict[str, int] = {}
        self.verdicts: dict[str, dict] = {}
        self._wire()

    # -- logging ----------------------------------------------------------------

    def log(self, kind: str, tti: int, **fields) -> None:
        rec = {"kind": kind, "tti": tti}
        rec.update(fields)
        self.records.append(rec)

    # -- wiring -------------------------------------------------------------------

    def _wire(self) -> None:
        sc = self.scenario
        horizon = sc.horizon_ttis

        for req in sc.grant_requests:
            self.engine.schedule(
                req.request_at,
                PRIO_GRANT_CONTROL,
                "grant_request",
                lambda tti, r=req: self._handle_grant_request(r, tti),
                {"licensee": req.licensee, "zone": req.zone, "channels": sorted(req.channels)},
            )

        for sched in sc.activations:
            self.engine.schedule(
                sched.announce_at,
                PRIO_GRANT_CONTROL,
                "activation_register",
                lambda tti, s=sched: self._handle_activation_register(s, tti),
                {"activation": sched.activation.activation_id},
            )
            if sched.activation.window.end <= horizon:
                self.engine.schedule(
                    sched.activation.window.end,
                    PRIO_GRANT_CONTROL,
                    "activation_end",
                    lambda tti, s=sched: self._handle_activation_end(s, tti),
                    {"activation": sched.activation.activation_id},
                )

        for ext in sc.external_interferers:
            if ext.window.start < horizon:
                self.engine.schedule(
                    ext.window.start,
                    PRIO_SENSING,
                    "interferer_on",
                    lambda tti, e=ext: self.log("interferer_on", tti, interferer_id=e.interferer_id),
                    {"interferer": ext.interferer_id},
                )
            if ext.window.end <= horizon:
                self.engine.schedule(
                    ext.window.end,
                    PRIO_SENSING,
                    "interferer_off",
                    lambda tti, e=ext: self.log("interferer_off", tti, interferer_id=e.interferer_id),
                    {"interferer": ext.interferer_id},
                )

        per_op_index: dict[str, int] = {}
        for profile in sc.traffic:
            # stream ids count per operator so the same operator's traffic
            # realization matches across scenarios that share a seed
            idx = per_op_index.get(profile.operator, 0)
            per_op_index[profile.operator] = idx + 1
            stream = RngStream(self.seed, f"arrivals:{profile.operator}:{idx}")
            planned = generate_arrivals(
                profile, horizon, stream, sc.region, f"{profile.operator}-{idx}"
            )
            for p in planned:
                self.engine.schedule(
                    p.arrival_tti,
                    PRIO_TRAFFIC,
                    "session_arrival",
                    lambda tti, ps=p: self._handle_arrival(ps, tti),
                    {"session": p.session_id},
                )
        for p in sc.fixed_sessions:
            if p.arrival_tti < horizon:
                self.engine.schedule(
                    p.arrival_tti,
                    PRIO_TRAFFIC,
                    "session_arrival",
                    lambda tti, ps=p: self._handle_arrival(ps, tti),
                    {"session": p.session_id},
                )

        if sc.sensing.mode != "off" and sc.cells:
            first = sc.sensing.period_ttis
            if first < horizon:
                self.engine.schedule(first, PRIO_SENSING, "sensing_measure", self._handle_sensing)
            if sc.sensing.mode == "batch":
                first_batch = sc.sensing.batch_period_ttis
                if first_batch <= horizon:
                    self.engine.schedule(
                        first_batch, PRIO_SENSING, "sensing_batch_delivery", self._handle_batch_delivery
                    )

        if sc.cells:
            first_dca = sc.crrm.t_dca_ttis
            if first_dca < horizon:
                self.engine.schedule(first_dca, PRIO_DCA_HANDOVER, "dca_step", self._handle_dca)

        if any(p.mobility.kind == "waypoint" for p in sc.traffic):
            self.engine.schedule(
                MOBILITY_STEP_TTIS, PRIO_DCA_HANDOVER, "mobility_step", self._handle_mobility
            )

        window = sc.metrics_window_ttis
        boundaries = sorted(set(list(range(window, horizon + 1, window)) + [horizon]))
        for b in boundaries:
            self.engine.schedule(b, PRIO_METRICS, "metrics_flush", self._handle_metrics_flush)
        self._last_flush_outage = {op: 0 for op in self.metrics.operators}
        self._last_flush_alive = {op: 0 for op in self.metrics.operators}

        sla_window = sc.crrm.sla_window_ttis
        for b in range(sla_window, horizon + 1, sla_window):
            self.engine.schedule(b, PRIO_METRICS, "sla_window", self._handle_sla_window)

    # -- control plane handlers --------------------------------------------------------

    def _handle_grant_request(self, req, tti: int) -> None:
        result = self.controller.request_grant(
            req.licensee, req.channels, req.zone, req.window, tti
        )
        if isinstance(result, GrantRejection):
            self.log(
                "grant_rejected", tti, licensee=req.licensee, reason=result.reason,
                blocking=result.blocking,
            )
            return
        grant = result.grant
        assert grant is not None
        self.log(
            "grant_issued", tti, grant_id=grant.grant_id, licensee=grant.licensee,
            channels=sorted(grant.channels), zone=grant.zone,
            window=[grant.window.start, grant.window.end], max_eirp_dbm=grant.max_eirp_dbm,
        )
        self._dispatch_command(result, tti)
        if grant.window.end <= self.scenario.horizon_ttis:
            self.engine.schedule(
                grant.window.end,
                PRIO_GRANT_CONTROL,
                "grant_expiry",
                lambda t, gid=grant.grant_id: self._handle_grant_expiry(gid, t),
                {"grant": grant.grant_id},
            )

    def _handle_grant_expiry(self, grant_id: str, tti: int) -> None:
        cmd = self.controller.expire_grant(grant_id, tti)
        if cmd is not None:
            self.log("grant_revoked", tti, grant_id=grant_id)
            self._dispatch_command(cmd, tti)

    def _handle_activation_register(self, sched, tti: int) -> None:
        act = sched.activation
        notifications = []
        for repo_id in sorted(self.repositories):
            notifications.extend(
                self.repositories[repo_id].register_incumbent_activation(act, tti)
            )
        self.log(
            "activation_registered", tti, activation_id=act.activation_id,
            channels=sorted(act.channels), zone=act.zone,
            window=[act.window.start, act.window.end], protection_dbm=act.protection_dbm,
        )
        self._schedule_notifications(notifications)

    def _handle_activation_end(self, sched, tti: int) -> None:
        act = sched.activation
        self.log("activation_ended", tti, activation_id=act.activation_id)
        notifications = []
        for repo_id in sorted(self.repositories):
            notifications.extend(
                self.repositories[repo_id].notify_activation_ended(act.activation_id, tti)
            )
        self._schedule_notifications(notifications)

    def _schedule_notifications(self, notifications) -> None:
        for n in notifications:
            self.engine.schedule(
                n.deliver_at,
                PRIO_GRANT_CONTROL,
                "notification_delivered",
                lambda tti, note=n: self._handle_notification(note, tti),
                {
                    "repository": n.repository_id,
                    "activation": n.activation.activation_id,
                    "change": n.kind.value,
                },
            )

    def _handle_notification(self, n, tti: int) -> None:
        commands = self.controller.on_availability_change(n, tti)
        for cmd in commands:
            if cmd.kind is CommandKind.SUSPEND:
                self.log(
                    "grant_suspended", tti, grant_id=cmd.grant_id,
                    ordered_at=tti, deadline=cmd.deadline,
                )
            elif cmd.kind is CommandKind.REINSTATE:
                self.log("grant_reinstated", tti, grant_id=cmd.grant_id)
            self._dispatch_command(cmd, tti)

    def _dispatch_command(self, cmd: GrantCommand, tti: int) -> None:
        deliver_at = tti + self.scenario.control_latency_ttis
        self.engine.schedule(
            deliver_at,
            PRIO_GRANT_CONTROL,
            "grant_command",
            lambda t, c=cmd: self._handle_command_delivery(c, t),
            {"command": cmd.kind.value, "grant": cmd.grant_id},
        )

    def _handle_command_delivery(self, cmd: GrantCommand, tti: int) -> None:
        report = self.crrm.apply_grant_update(cmd, tti)
        if cmd.kind is CommandKind.SUSPEND:
            self.log(
                "suspend_applied", tti, grant_id=cmd.grant_id,
                moved_sessions=report["moved_sessions"],
            )
            confirm_at = tti + self.scenario.control_latency_ttis
            self.engine.schedule(
                confirm_at,
                PRIO_GRANT_CONTROL,
                "evac_confirm",
                lambda t, gid=cmd.grant_id: self._handle_evac_confirm(gid, t),
                {"grant": cmd.grant_id},
            )
            if self.scenario.debug.inject_post_deadline_tx and self.scenario.cells:
                cell = sorted(self.crrm.cells)[0]
                ch = min(self.crrm.grants[cmd.grant_id].channels)
                deadline = cmd.deadline or tti
                self.log("tx_start", deadline + 1, cell=cell, channel=ch, grant_id=cmd.grant_id)
                self.log("tx_end", deadline + 3, cell=cell, channel=ch)
        elif cmd.kind is CommandKind.REINSTATE:
            self.log("reinstate_applied", tti, grant_id=cmd.grant_id)
        elif cmd.kind is CommandKind.REVOKE:
            self.log("revoke_applied", tti, grant_id=cmd.grant_id)
        else:
            self.log("issue_applied", tti, grant_id=cmd.grant_id)
            grant = cmd.grant
            assert grant is not None
            # the window boundary binds locally, ahead of any Revoke command
            if grant.window.start > tti:
                self.engine.schedule(
                    grant.window.start,
                    PRIO_GRANT_CONTROL,
                    "grant_window_start",
                    lambda t: self.crrm.refresh_assignments(t),
                    {"grant": cmd.grant_id},
                )
            if grant.window.end > tti:
                self.engine.schedule(
                    grant.window.end,
                    PRIO_GRANT_CONTROL,
                    "grant_window_end",
                    lambda t, gid=cmd.grant_id: self.crrm.expire_grant_window(gid, t),
                    {"grant": cmd.grant_id},
                )

    def _handle_evac_confirm(self, grant_id: str, tti: int) -> None:
        record = self.controller.confirm_evacuation(grant_id, tti)
        self.log(
            "evac_confirmed", tti, grant_id=grant_id, ordered_at=record.ordered_at,
            deadline=record.deadline, confirmed_at=record.confirmed_at,
            compliant=record.compliant,
        )
        licensee = self.controller.grants[grant_id].licensee
        self.metrics.record("evac", 1, tti, licensee)
        if not record.compliant:
            self.metrics.record("evac_violation", 1, tti, licensee)
        for cmd in self.controller.check_reinstatements(tti):
            self.log("grant_reinstated", tti, grant_id=cmd.grant_id)
            self._dispatch_command(cmd, tti)

    # -- traffic handlers --------------------------------------------------------------

    def _handle_arrival(self, planned, tti: int) -> None:
        session = SessionState(
            session_id=planned.session_id,
            operator=planned.operator,
            kind=planned.kind,
            rate_bps=planned.rate_bps,
            position=planned.position,
            serving_cell="",
        )
        result = self.crrm.admit_session(session, tti)
        self.log(
            "session_arrival", tti, session_id=planned.session_id,
            operator=planned.operator, admitted=result.admitted, reason=result.reason,
        )
        if not result.admitted:
            self.log(
                "session_final", tti, session_id=planned.session_id,
                operator=planned.operator, offered_bits=0, served_bits=0, buffered_bits=0,
            )
            return
        self._sources[planned.session_id] = DemandSource(
            planned, RngStream(self.seed, f"demand:{planned.session_id}")
        )
        if planned.mobility.kind == "waypoint":
            self._mobiles[planned.session_id] = WaypointMobility(
                planned.position,
                self.scenario.region,
                planned.mobility.speed_mps,
                planned.mobility.pause_s,
                RngStream(self.seed, f"mobility:{planned.session_id}"),
            )
        self.engine.schedule(
            planned.departure_tti,
            PRIO_TRAFFIC,
            "session_departure",
            lambda t, sid=planned.session_id: self._handle_departure(sid, t),
            {"session": planned.session_id},
        )
        self._ensure_tick(tti)

    def _handle_departure(self, session_id: str, tti: int) -> None:
        session = self.crrm.remove_session(session_id)
        self._sources.pop(session_id, None)
        self._mobiles.pop(session_id, None)
        if session is None:
            return
        self._close_session(session, tti)

    def _close_session(self, session: SessionState, tti: int) -> None:
        if session.session_id in self._closed_sessions:
            return
        self._closed_sessions.add(session.session_id)
        self.log(
            "session_final", tti, session_id=session.session_id, operator=session.operator,
            offered_bits=session.offered_bits, served_bits=session.served_bits,
            buffered_bits=session.buffered_bits,
        )

    def _ensure_tick(self, now: int) -> None:
        if self._tick_scheduled:
            return
        next_tti = max(now + 1, 1)
        if next_tti < self.scenario.horizon_ttis:
            self._tick_scheduled = True
            self.engine.schedule(next_tti, PRIO_TTI_SCHEDULE, "tti_tick", self._handle_tick)

    def _handle_tick(self, tti: int) -> None:
        self._tick_scheduled = False
        for sid in sorted(self._sources):
            bits = self._sources[sid].demand_bits(tti)
            if bits > 0:
                self.crrm.offer_demand(sid, tti, bits)
        self.crrm.tti_schedule(tti)
        self._track_transmissions(tti)
        if self.crrm.sessions or self._prev_tx:
            self._ensure_tick(tti)

    def _on_service(self, session: SessionState, bits: int, tti: int) -> None:
        self.metrics.record("goodput_bits", bits, tti, session.operator)
        if self._sinr_sampled_at.get(session.session_id) != tti and session.channel_set:
            self._sinr_sampled_at[session.session_id] = tti
            sinr = self.crrm.session_sinr_db(session, session.channel_set[0], tti)
            self.metrics.record("sinr_db", sinr, tti, session.operator)

    def _track_transmissions(self, tti: int) -> None:
        current: dict[tuple[str, int], str] = {}
        for cell_id, ch_id in self.crrm.active_tx_pairs():
            current[(cell_id, ch_id)] = self.crrm.covering_grant(cell_id, ch_id, tti)
        for key in sorted(self._prev_tx):
            # grant attribution changes close the span and open a fresh one
            if key not in current or current[key] != self._prev_tx[key]:
                self.log("tx_end", tti, cell=key[0], channel=key[1])
        for key in sorted(current):
            if key not in self._prev_tx or current[key] != self._prev_tx[key]:
                self.log(
                    "tx_start", tti, cell=key[0], channel=key[1], grant_id=current[key]
                )
        self._prev_tx = current

    # -- sensing / DCA / mobility ---------------------------------------------------------

    def _handle_sensing(self, tti: int) -> None:
        sc = self.scenario
        lsa_channels = sorted(c.id for c in sc.channels if c.regime.value == "lsa")
        reports = []
        for cell_id in sorted(self.crrm.cells):
            for ch_id in lsa_channels:
                measured = self.crrm.true_interference_dbm(cell_id, ch_id, tti)
                reports.append(SensingReport(cell_id, ch_id, measured, tti, 0))
        if sc.sensing.mode == "realtime":
            deliver_at = tti + sc.sensing.delivery_latency_ttis
            if deliver_at < sc.horizon_ttis or deliver_at == tti:
                self.engine.schedule(
                    max(deliver_at, tti),
                    PRIO_SENSING,
                    "sensing_delivery",
                    lambda t, rs=reports: self._deliver_reports(rs, t),
                )
        else:
            self._pending_batch.extend(reports)
        next_at = tti + sc.sensing.period_ttis
        if next_at < sc.horizon_ttis:
            self.engine.schedule(next_at, PRIO_SENSING, "sensing_measure", self._handle_sensing)

    def _deliver_reports(self, reports, tti: int) -> None:
        beta = self.scenario.sensing.beta_map
        for r in reports:
            delivered = SensingReport(r.cell_id, r.channel_id, r.interference_dbm, r.measured_at, tti)
            self.crrm.ingest_interference_report(r.cell_id, r.channel_id, r.interference_dbm)
            if self.coverage_map is not None:
                self.coverage_map.ingest(
                    delivered, self.crrm.cells[r.cell_id].position, beta
                )

    def _handle_batch_delivery(self, tti: int) -> None:
        if self._pending_batch:
            self._deliver_reports(self._pending_batch, tti)
            self._pending_batch = []
        next_at = tti + self.scenario.sensing.batch_period_ttis
        if next_at <= self.scenario.horizon_ttis:
            self.engine.schedule(next_at, PRIO_SENSING, "sensing_batch_delivery", self._handle_batch_delivery)

    def _handle_dca(self, tti: int) -> None:
        before_muted = frozenset(self.crrm.muted)
        reassignments = self.crrm.dca_step(tti)
        for cell_id, old, new in reassignments:
            self.log("dca_reassign", tti, cell=cell_id, old=list(old), new=list(new))
        if frozenset(self.crrm.muted) != before_muted:
            self.log("icic_mute", tti, muted=sorted(list(p) for p in self.crrm.muted))
        next_at = tti + self.scenario.crrm.t_dca_ttis
        if next_at < self.scenario.horizon_ttis:
            self.engine.schedule(next_at, PRIO_DCA_HANDOVER, "dca_step", self._handle_dca)

    def _handle_mobility(self, tti: int) -> None:
        moved = False
        for sid in sorted(self._mobiles):
            walker = self._mobiles[sid]
            new_pos = walker.step(MOBILITY_STEP_TTIS)
            session = self.crrm.sessions.get(sid)
            if session is not None and new_pos != session.position:
                session.position = new_pos
                moved = True
                target = self.crrm.evaluate_handover(session)
                if target is not None:
                    self.log("handover", tti, session_id=sid, target=target)
                    self.metrics.record("handover", 1, tti, session.operator)
        if moved:
            self.crrm.note_position_change()
        next_at = tti + MOBILITY_STEP_TTIS
        if next_at < self.scenario.horizon_ttis and (self._mobiles or any(
            p.mobility.kind == "waypoint" for p in self.scenario.traffic
        )):
            self.engine.schedule(next_at, PRIO_DCA_HANDOVER, "mobility_step", self._handle_mobility)

    # -- metrics ------------------------------------------------------------------------------

    def _handle_metrics_flush(self, tti: int) -> None:
        sample_tti = max(0, tti - 1)
        for op in self.metrics.operators:
            outage = self.crrm.op_outage_ttis.get(op, 0)
            alive = self.crrm.op_alive_ttis.get(op, 0)
            d_out = outage - self._last_flush_outage[op]
            d_alive = alive - self._last_flush_alive[op]
            self._last_flush_outage[op] = outage
            self._last_flush_alive[op] = alive
            if d_out:
                self.metrics.record("outage_ttis", d_out, sample_tti, op)
            if d_alive:
                self.metrics.record("alive_ttis", d_alive, sample_tti, op)

    def _handle_sla_window(self, tti: int) -> None:
        multipliers = self.crrm.enforce_mocn_sla(self.scenario.crrm.sla_window_ttis)
        self.log("sla_weights", tti, weights={k: multipliers[k] for k in sorted(multipliers)})

    # -- run ------------------------------------------------------------------------------------

    def run(self) -> "RunResult":
        horizon = self.scenario.horizon_ttis
        self.engine.run_until(horizon)
        for sid in sorted(self.crrm.sessions):
            self._close_session(self.crrm.sessions[sid], horizon)
        for key in sorted(self._prev_tx):
            self.log("tx_end", horizon, cell=key[0], channel=key[1])
        self._prev_tx = {}
        self.metrics.ensure_windows(horizon)
        self.metrics.reactions = metrics_mod.derive_reactions(self.records)
        self._compute_verdicts()
        return RunResult(self)

    def _compute_verdicts(self) -> None:
        horizon = self.scenario.horizon_ttis
        if self.engine.clock < horizon:
            raise metrics_mod.IncompleteRun(f"clock {self.engine.clock} < horizon {horizon}")
        spans = metrics_mod.build_tx_spans(self.records, horizon)
        zone_polygons = {z.id: z.polygon for z in self.scenario.zones}
        cell_positions = {c.cell_id: c.position for c in self.scenario.cells}
        lsa_ids = {c.id for c in self.scenario.channels if c.regime.value == "lsa"}
        exclusivity = metrics_mod.scan_exclusivity(
            self.records, spans, zone_polygons, cell_positions, horizon, lsa_ids
        )
        evac_safety, evac_compliance = metrics_mod.scan_evacuations(self.records, spans)
        conservation = metrics_mod.scan_conservation(self.records)
        window_bits = sum(
            sum(w.goodput_bits.values()) for w in self.metrics.windows
        )
        aggregation = metrics_mod.scan_aggregation(self.records, window_bits)

        def verdict(problems: list[str]) -> dict:
            return {"pass": not problems, "problems": problems[:20]}

        self.verdicts = {
            "exclusivity_safety": verdict(exclusivity),
            "evacuation_safety": verdict(evac_safety),
            "evacuation_compliance": verdict(evac_compliance),
            "conservation": verdict(conservation),
            "aggregation_consistency": verdict(aggregation),
        }
        if any(b > 0 for b in self.baselines_bps.values()):
            problems = []
            seconds = horizon / 1000.0
            for op in sorted(self.baselines_bps):
                baseline = self.baselines_bps[op]
                if baseline <= 0:
                    continue
                # the floor applies to demand actually presented
                offered = self.crrm.total_offered_bits.get(op, 0) / seconds
                target = min(baseline, offered)
                achieved = self.crrm.total_served_bits.get(op, 0) / seconds
                if achieved < 0.95 * target:
                    problems.append(
                        f"{op}: achieved {achieved:.0f} bps < 0.95 x floor {target:.0f} bps"
                    )
            self.verdicts["sla_floor"] = verdict(problems)


class RunResult:
    def __init__(self, sim: Simulation):
        self.sim = sim
        self.scenario = sim.scenario
        self.seed = sim.seed
        self.verdicts = sim.verdicts
        self.records = sim.records
        self.metrics = sim.metrics
        self.controller = sim.controller
        self.crrm = sim.crrm

    @property
    def all_pass(self) -> bool:
        return all(v["pass"] for v in self.verdicts.values())

    def summary_dict(self, scenario_sha256: str = "", tool_version: str = "") -> dict:
        m = self.metrics
        horizon_s = self.scenario.horizon_ttis / 1000.0
        per_operator = {}
        for op in m.operators:
            delay = m.delay[op]
            sinr = m.sinr[op]
            served = self.crrm.total_served_bits.get(op, 0)
            baseline = self.sim.baselines_bps.get(op, 0.0)
            per_operator[op] = {
                "achieved_bits": served,
                "goodput_bps": served / horizon_s,
                "sla_baseline_bps": baseline,
                "baseline_ratio": (served / horizon_s / baseline) if baseline > 0 else None,
                "outage_ratio": (
                    self.crrm.op_outage_ttis.get(op, 0) / self.crrm.op_alive_ttis.get(op, 1)
                    if self.crrm.op_alive_ttis.get(op, 0)
                    else 0.0
                ),
                "delay_p95_ttis": delay.percentile(0.95),
                "delay_mean_ttis": delay.mean(),
                "sinr_p5_db": sinr.percentile(0.05),
                "sinr_p50_db": sinr.percentile(0.50),
                "sinr_p95_db": sinr.percentile(0.95),
            }
        reactions = [
            {"stimulus": r.stimulus, "stimulus_tti": r.stimulus_tti, "action_tti": r.action_tti}
            for r in m.reactions
        ]
        reaction_delays = [r.delay_ttis for r in m.reactions]
        return {
            "schema_version": 1,
            "scenario_name": self.scenario.name,
            "scenario_sha256": scenario_sha256,
            "master_seed": self.seed,
            "tool_version": tool_version,
            "horizon_ttis": self.scenario.horizon_ttis,
            "verdicts": {k: v for k, v in sorted(self.verdicts.items())},
            "all_pass": self.all_pass,
            "per_operator": per_operator,
            "reaction": {
                "count": len(reactions),
                "mean_ttis": (sum(reaction_delays) / len(reaction_delays)) if reaction_delays else None,
                "max_ttis": max(reaction_delays) if reaction_delays else None,
                "records": reactions,
            },
            "counters": {
                "events_processed": self.sim.engine.processed,
                "sessions_admitted": self.crrm.counters["admitted"],
                "sessions_no_coverage": self.crrm.counters["no_coverage"],
                "sessions_denied": self.crrm.counters["admission_denied"],
                "handovers": self.crrm.counters["handovers"],
                "dca_reassignments": self.crrm.counters["dca_reassignments"],
                "evacuations": len(self.controller.evacuation_ledger),
                "evacuation_violations": self.controller.violation_count,
            },
        }


def run_scenario(scenario: Scenario, seed_override: Optional[int] = None, trace: bool = False) -> RunResult:
    return Simulation(scenario, seed_override=seed_override, trace=trace).run()

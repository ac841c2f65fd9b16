"""LSA Controller: evaluates sharing rules, issues/suspends/reinstates/revokes
grants, and tracks incumbent-protection evacuations against deadlines.

Availability knowledge is built from repository change notifications (one
mirror per subscribed repository, merged conservatively: a channel is usable
only if no mirror knows a conflicting activation).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .repository import ChangeNotification, NotificationKind
from .spectrum import (
    Channel,
    GeoZone,
    GrantState,
    IncumbentActivation,
    Regime,
    SpectrumGrant,
    UnknownChannel,
    UnknownZone,
    Window,
    grant_conflicts,
    grants_conflict,
    zones_conflict,
)


class NotSuspendPending(Exception):
    pass


class UnknownGrant(KeyError):
    pass


class CommandKind(Enum):
    ISSUE = "issue"
    SUSPEND = "suspend"
    REINSTATE = "reinstate"
    REVOKE = "revoke"


@dataclass(frozen=True)
class GrantCommand:
    kind: CommandKind
    grant_id: str
    issued_at: int
    grant: Optional[SpectrumGrant] = None
    deadline: Optional[int] = None


@dataclass(frozen=True)
class GrantRejection:
    reason: str  # "unavailable" | "quota" | "conflict"
    blocking: str


@dataclass(frozen=True)
class EvacuationRecord:
    grant_id: str
    ordered_at: int
    deadline: int
    confirmed_at: int
    compliant: bool


@dataclass(frozen=True)
class SharingRules:
    max_lsa_channels_per_licensee: int
    evacuation_deadline_ttis: int
    eligible_zones: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def zone_eligible(self, licensee: str, zone_id: str) -> bool:
        allowed = self.eligible_zones.get(licensee)
        return allowed is None or zone_id in allowed


class Controller:
    def __init__(
        self,
        controller_id: str,
        channels: Mapping[int, Channel],
        zones: Mapping[str, GeoZone],
        rules: SharingRules,
    ):
        if rules.evacuation_deadline_ttis <= 0:
            raise ValueError("evacuation deadline must be positive")
        self.controller_id = controller_id
        self.channels = dict(channels)
        self.zones = dict(zones)
        self.rules = rules
        self.grants: dict[str, SpectrumGrant] = {}
        # (repo_id, activation_id) -> activation, as learned from notifications
        self._mirror: dict[tuple[str, str], IncumbentActivation] = {}
        # grant_id -> activation ids currently blocking it
        self._blockers: dict[str, set[str]] = {}
        self.evacuation_ledger: list[EvacuationRecord] = []
        self.violation_count = 0
        self._next_grant = 1

    # -- grant issuance ----------------------------------------------------

    def request_grant(
        self,
        licensee: str,
        channel_ids: frozenset[int],
        zone_id: str,
        window: Window,
        now: int,
        max_eirp_dbm: Optional[float] = None,
    ) -> GrantCommand | GrantRejection:
        if zone_id not in self.zones:
            raise UnknownZone(zone_id)
        for ch in sorted(channel_ids):
            if ch not in self.channels:
                raise UnknownChannel(ch)
            if self.channels[ch].regime is not Regime.LSA:
                return GrantRejection("unavailable", f"channel {ch} is not LSA")
        if not self.rules.zone_eligible(licensee, zone_id):
            return GrantRejection("unavailable", f"zone {zone_id} not eligible for {licensee}")
        if window.end <= now:
            return GrantRejection("unavailable", f"window [{window.start}, {window.end}) already over")

        blocking = self._availability_blocker(channel_ids, zone_id, window)
        if blocking is not None:
            return GrantRejection("unavailable", blocking)

        live = self._live_channel_count(licensee)
        if live + len(channel_ids) > self.rules.max_lsa_channels_per_licensee:
            return GrantRejection(
                "quota",
                f"{licensee} holds {live} LSA channels, requesting {len(channel_ids)} "
                f"exceeds quota {self.rules.max_lsa_channels_per_licensee}",
            )

        probe = SpectrumGrant(
            grant_id="?",
            licensee=licensee,
            channels=frozenset(channel_ids),
            zone=zone_id,
            window=window,
            max_eirp_dbm=0.0,
        )
        for gid in sorted(self.grants):
            other = self.grants[gid]
            if other.state is GrantState.REVOKED or other.licensee == licensee:
                continue
            if grants_conflict(probe, other, self.zones):
                return GrantRejection("conflict", f"grant {gid} ({other.licensee})")

        eirp = max_eirp_dbm
        if eirp is None:
            eirp = min(self.channels[ch].max_eirp_dbm for ch in channel_ids)
        grant = SpectrumGrant(
            grant_id=f"g{self._next_grant:03d}",
            licensee=licensee,
            channels=frozenset(channel_ids),
            zone=zone_id,
            window=window,
            max_eirp_dbm=eirp,
        )
        self._next_grant += 1
        grant.transition(GrantState.ACTIVE)
        self.grants[grant.grant_id] = grant
        self._blockers[grant.grant_id] = set()
        return GrantCommand(CommandKind.ISSUE, grant.grant_id, now, grant=grant)

    def _availability_blocker(
        self, channel_ids: frozenset[int], zone_id: str, window: Window
    ) -> Optional[str]:
        for (repo_id, act_id), act in sorted(self._mirror.items()):
            if not channel_ids & act.channels:
                continue
            if not window.overlaps(act.window):
                continue
            if zones_conflict(zone_id, act.zone, self.zones):
                ch = min(channel_ids & act.channels)
                return f"channel {ch} blocked by activation {act_id} ({repo_id})"
        return None

    def _live_channel_count(self, licensee: str) -> int:
        return sum(
            len(g.channels)
            for g in self.grants.values()
            if g.licensee == licensee and g.state is not GrantState.REVOKED
        )

    # -- availability changes ----------------------------------------------

    def on_availability_change(self, n: ChangeNotification, now: int) -> list[GrantCommand]:
        """Suspend conflicting grants on new activations; reinstate when the
        conflict ends. Commands are returned for latency-delayed dispatch."""
        key = (n.repository_id, n.activation.activation_id)
        commands: list[GrantCommand] = []
        if n.kind is NotificationKind.STARTED:
            self._mirror[key] = n.activation
            for gid in sorted(self.grants):
                grant = self.grants[gid]
                if grant.state in (GrantState.REVOKED, GrantState.PENDING):
                    continue
                if not grant_conflicts(grant, n.activation, self.zones, self.channels):
                    continue
                self._blockers[gid].add(n.activation.activation_id)
                if grant.state is GrantState.ACTIVE:
                    deadline = now + self.rules.evacuation_deadline_ttis
                    grant.transition(GrantState.SUSPEND_PENDING, deadline=deadline)
                    commands.append(
                        GrantCommand(CommandKind.SUSPEND, gid, now, deadline=deadline)
                    )
        else:
            self._mirror.pop(key, None)
            still_known = {
                act.activation_id for act in self._mirror.values()
            }
            for gid in sorted(self.grants):
                blockers = self._blockers.get(gid)
                if blockers and n.activation.activation_id in blockers and n.activation.activation_id not in still_known:
                    blockers.discard(n.activation.activation_id)
            commands.extend(self.check_reinstatements(now))
        return commands

    def check_reinstatements(self, now: int) -> list[GrantCommand]:
        """Reinstate suspended grants whose blockers are all gone and whose
        window still has time left."""
        commands = []
        for gid in sorted(self.grants):
            grant = self.grants[gid]
            if grant.state is not GrantState.SUSPENDED:
                continue
            if self._blockers.get(gid):
                continue
            if grant.window.end <= now:
                continue
            grant.transition(GrantState.ACTIVE)
            commands.append(GrantCommand(CommandKind.REINSTATE, gid, now))
        return commands

    # -- evacuation ----------------------------------------------------------

    def confirm_evacuation(self, grant_id: str, confirmed_at: int) -> EvacuationRecord:
        grant = self.grants.get(grant_id)
        if grant is None:
            raise UnknownGrant(grant_id)
        if grant.state is not GrantState.SUSPEND_PENDING:
            raise NotSuspendPending(f"{grant_id} is {grant.state.value}")
        deadline = grant.suspend_deadline
        assert deadline is not None
        ordered_at = deadline - self.rules.evacuation_deadline_ttis
        grant.transition(GrantState.SUSPENDED)
        record = EvacuationRecord(
            grant_id=grant_id,
            ordered_at=ordered_at,
            deadline=deadline,
            confirmed_at=confirmed_at,
            compliant=confirmed_at <= deadline,
        )
        if not record.compliant:
            self.violation_count += 1
        self.evacuation_ledger.append(record)
        return record

    # -- lifecycle -----------------------------------------------------------

    def expire_grant(self, grant_id: str, now: int) -> Optional[GrantCommand]:
        """Revoke a grant whose window has ended (terminal transition)."""
        grant = self.grants.get(grant_id)
        if grant is None:
            raise UnknownGrant(grant_id)
        if grant.state is GrantState.REVOKED:
            return None
        grant.transition(GrantState.REVOKED)
        return GrantCommand(CommandKind.REVOKE, grant_id, now)

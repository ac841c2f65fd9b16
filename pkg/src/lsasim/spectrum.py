"""Spectrum resource model: channels, regimes, zones, grants and their conflict algebra.

All time windows are half-open [start, end) TTIs, which removes boundary
double-booking: a window ending at t and one starting at t do not conflict.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from .geometry import Point, centroid, is_simple_polygon, polygons_intersect

MAX_BANDWIDTH_MHZ = 100.0


class Regime(Enum):
    LICENSED = "licensed"
    UNLICENSED = "unlicensed"
    LSA = "lsa"


class GrantState(Enum):
    PENDING = "pending"
    ACTIVE = "active"
    SUSPEND_PENDING = "suspend_pending"
    SUSPENDED = "suspended"
    REVOKED = "revoked"


_ALLOWED_TRANSITIONS = {
    GrantState.PENDING: {GrantState.ACTIVE},
    GrantState.ACTIVE: {GrantState.SUSPEND_PENDING, GrantState.REVOKED},
    GrantState.SUSPEND_PENDING: {GrantState.SUSPENDED, GrantState.REVOKED},
    GrantState.SUSPENDED: {GrantState.ACTIVE, GrantState.REVOKED},
    GrantState.REVOKED: set(),
}


class UnknownChannel(KeyError):
    pass


class UnknownZone(KeyError):
    pass


class GrantStateError(Exception):
    """Illegal grant state transition; state is left unchanged."""


@dataclass(frozen=True)
class Channel:
    id: int
    center_freq_mhz: float
    bandwidth_mhz: float
    regime: Regime
    operator: Optional[str] = None  # licensee for LICENSED channels
    max_eirp_dbm: float = 30.0
    rat: str = "5G-NR"

    @property
    def low_mhz(self) -> float:
        return self.center_freq_mhz - self.bandwidth_mhz / 2.0

    @property
    def high_mhz(self) -> float:
        return self.center_freq_mhz + self.bandwidth_mhz / 2.0

    @property
    def bandwidth_hz(self) -> float:
        return self.bandwidth_mhz * 1e6


@dataclass(frozen=True)
class GeoZone:
    id: str
    polygon: tuple[Point, ...]
    tags: frozenset[str] = frozenset()
    reference_point: Optional[Point] = None

    def ref_point(self) -> Point:
        return self.reference_point if self.reference_point is not None else centroid(self.polygon)


@dataclass(frozen=True)
class Window:
    """Half-open TTI interval [start, end)."""

    start: int
    end: int

    def overlaps(self, other: "Window") -> bool:
        return self.start < other.end and other.start < self.end

    def contains(self, tti: int) -> bool:
        return self.start <= tti < self.end


@dataclass
class SpectrumGrant:
    grant_id: str
    licensee: str
    channels: frozenset[int]
    zone: str
    window: Window
    max_eirp_dbm: float
    state: GrantState = GrantState.PENDING
    suspend_deadline: Optional[int] = None

    def transition(self, new_state: GrantState, deadline: Optional[int] = None) -> None:
        if new_state not in _ALLOWED_TRANSITIONS[self.state]:
            raise GrantStateError(f"{self.grant_id}: {self.state.value} -> {new_state.value}")
        self.state = new_state
        if new_state is GrantState.SUSPEND_PENDING:
            self.suspend_deadline = deadline
        elif new_state is GrantState.ACTIVE:
            self.suspend_deadline = None


@dataclass(frozen=True)
class IncumbentActivation:
    activation_id: str
    incumbent: str
    channels: frozenset[int]
    zone: str
    window: Window
    protection_dbm: float = -100.0


def channels_overlap(a: Channel, b: Channel) -> bool:
    """True iff the open frequency intervals intersect (touching edges do not)."""
    return a.low_mhz < b.high_mhz and b.low_mhz < a.high_mhz


def zones_conflict(zone_a: str, zone_b: str, zones: Mapping[str, GeoZone]) -> bool:
    if zone_a not in zones:
        raise UnknownZone(zone_a)
    if zone_b not in zones:
        raise UnknownZone(zone_b)
    if zone_a == zone_b:
        return True
    return polygons_intersect(zones[zone_a].polygon, zones[zone_b].polygon)


def grant_conflicts(
    grant: SpectrumGrant,
    activation: IncumbentActivation,
    zones: Mapping[str, GeoZone],
    channels: Mapping[int, Channel],
) -> bool:
    """Conflict = shared channel id AND conflicting zones AND overlapping windows."""
    for ch in grant.channels | activation.channels:
        if ch not in channels:
            raise UnknownChannel(ch)
    if not grant.channels & activation.channels:
        return False
    if not grant.window.overlaps(activation.window):
        return False
    return zones_conflict(grant.zone, activation.zone, zones)


def grants_conflict(
    a: SpectrumGrant, b: SpectrumGrant, zones: Mapping[str, GeoZone]
) -> bool:
    """Same predicate between two grants (used for inter-licensee exclusivity)."""
    if not a.channels & b.channels:
        return False
    if not a.window.overlaps(b.window):
        return False
    return zones_conflict(a.zone, b.zone, zones)


def validate_channel_plan(plan: Sequence[Channel]) -> list[str]:
    """Check channel invariants; violations are data, not faults.

    Each violation names the channel id and the broken rule.
    """
    violations: list[str] = []
    seen: set[int] = set()
    for ch in plan:
        if ch.id in seen:
            violations.append(f"channel {ch.id}: duplicate id")
        seen.add(ch.id)
        if ch.bandwidth_mhz <= 0:
            violations.append(f"channel {ch.id}: non-positive bandwidth")
        elif ch.bandwidth_mhz > MAX_BANDWIDTH_MHZ:
            violations.append(
                f"channel {ch.id}: bandwidth {ch.bandwidth_mhz:g} MHz exceeds {MAX_BANDWIDTH_MHZ:g} MHz"
            )
        if ch.regime is Regime.LICENSED and not ch.operator:
            violations.append(f"channel {ch.id}: licensed channel lacks an operator")
        if ch.regime is not Regime.LICENSED and ch.operator:
            violations.append(f"channel {ch.id}: operator set on non-licensed channel")
    return violations


def validate_band_limits(plan: Sequence[Channel], low_mhz: float, high_mhz: float) -> list[str]:
    """Channels must fit inside the configured band plan limits."""
    violations = []
    for ch in plan:
        if ch.low_mhz < low_mhz or ch.high_mhz > high_mhz:
            violations.append(
                f"channel {ch.id}: [{ch.low_mhz:g}, {ch.high_mhz:g}] MHz outside band plan "
                f"[{low_mhz:g}, {high_mhz:g}] MHz"
            )
    return violations


def make_zone(
    zone_id: str,
    polygon: Iterable[Point],
    tags: Iterable[str] = (),
    reference_point: Optional[Point] = None,
) -> GeoZone:
    """Normalize and validate a polygon ring (explicit closure stripped)."""
    ring = [(float(x), float(y)) for x, y in polygon]
    if len(ring) >= 2 and ring[0] == ring[-1]:
        ring = ring[:-1]
    if len(ring) < 3:
        raise ValueError(f"zone {zone_id}: polygon needs at least 3 vertices")
    if not is_simple_polygon(ring):
        raise ValueError(f"zone {zone_id}: polygon is self-intersecting or degenerate")
    ref = (float(reference_point[0]), float(reference_point[1])) if reference_point else None
    return GeoZone(zone_id, tuple(ring), frozenset(tags), ref)

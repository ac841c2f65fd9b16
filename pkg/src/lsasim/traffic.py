"""Session arrivals, demand processes, and UE placement/mobility.

Demand is integer bits per TTI, produced with cumulative-floor arithmetic so
per-session conservation (offered = served + buffered) holds exactly.
"""

from dataclasses import dataclass
from typing import Optional

from .engine import RngStream
from .geometry import Point

TTIS_PER_SECOND = 1000


@dataclass(frozen=True)
class MobilityConfig:
    kind: str = "static"  # "static" | "waypoint"
    speed_mps: float = 0.0
    pause_s: float = 0.0


@dataclass(frozen=True)
class TrafficProfile:
    operator: str
    arrival_rate_per_s: float
    holding_time_mean_s: float
    kind: str  # "gbr" | "best_effort"
    rate_bps: int
    activity_factor: float = 1.0
    burst_mean_s: float = 0.5
    mobility: MobilityConfig = MobilityConfig()

    def __post_init__(self):
        if self.arrival_rate_per_s < 0:
            raise ValueError("arrival rate must be >= 0")
        if self.kind == "gbr" and self.rate_bps <= 0:
            raise ValueError("GBR rate must be positive")
        if not 0.0 < self.activity_factor <= 1.0:
            raise ValueError("activity factor must lie in (0, 1]")


@dataclass(frozen=True)
class PlannedSession:
    session_id: str
    operator: str
    arrival_tti: int
    departure_tti: int
    kind: str
    rate_bps: int
    activity_factor: float
    burst_mean_s: float
    position: Point
    mobility: MobilityConfig = MobilityConfig()


def generate_arrivals(
    profile: TrafficProfile,
    horizon_ttis: int,
    stream: RngStream,
    region: tuple[float, float, float, float],
    id_prefix: str,
) -> list[PlannedSession]:
    """Poisson arrivals over the horizon; holding times and placements drawn
    from the same stream, so the whole list is a pure function of (seed, id)."""
    if horizon_ttis <= 0:
        raise ValueError("horizon must be positive")
    sessions: list[PlannedSession] = []
    if profile.arrival_rate_per_s <= 0.0:
        return sessions
    x_min, y_min, x_max, y_max = region
    t_s = 0.0
    index = 0
    while True:
        t_s += stream.next_exponential(1.0 / profile.arrival_rate_per_s)
        arrival = int(t_s * TTIS_PER_SECOND)
        if arrival >= horizon_ttis:
            break
        holding_s = stream.next_exponential(profile.holding_time_mean_s)
        departure = min(horizon_ttis, arrival + max(1, round(holding_s * TTIS_PER_SECOND)))
        x = x_min + (x_max - x_min) * stream.next_uniform()
        y = y_min + (y_max - y_min) * stream.next_uniform()
        sessions.append(
            PlannedSession(
                session_id=f"{id_prefix}-{index:04d}",
                operator=profile.operator,
                arrival_tti=arrival,
                departure_tti=departure,
                kind=profile.kind,
                rate_bps=profile.rate_bps,
                activity_factor=profile.activity_factor,
                burst_mean_s=profile.burst_mean_s,
                position=(x, y),
                mobility=profile.mobility,
            )
        )
        index += 1
    return sessions


class DemandSource:
    """Per-session offered-bits process.

    GBR offers rate_bps every TTI; best-effort alternates exponential on/off
    bursts (off mean derived from the activity factor) and offers rate_bps
    while on. Bits are integers via cumulative-floor so no fraction is lost.
    """

    def __init__(self, planned: PlannedSession, stream: RngStream):
        self.rate_bps = planned.rate_bps
        self.kind = planned.kind
        self._stream = stream
        self._emit_ttis = 0  # TTIs in which demand was emitted so far
        self._cum_bits = 0
        self._on = True
        self._phase_left = 0
        self._on_mean_s = planned.burst_mean_s
        af = planned.activity_factor
        self._off_mean_s = 0.0 if af >= 1.0 else planned.burst_mean_s * (1.0 - af) / af
        self._always_on = planned.kind == "gbr" or af >= 1.0
        if not self._always_on:
            self._phase_left = self._draw_phase(self._on_mean_s)

    def _draw_phase(self, mean_s: float) -> int:
        return max(1, round(self._stream.next_exponential(mean_s) * TTIS_PER_SECOND))

    def demand_bits(self, tti: int) -> int:
        """Offered bits this TTI; advances the on/off phase machine."""
        if self._always_on:
            return self._emit()
        if self._phase_left == 0:
            self._on = not self._on
            mean = self._on_mean_s if self._on else self._off_mean_s
            self._phase_left = self._draw_phase(mean)
        self._phase_left -= 1
        if self._on:
            return self._emit()
        return 0

    def _emit(self) -> int:
        self._emit_ttis += 1
        total = self.rate_bps * self._emit_ttis // TTIS_PER_SECOND
        bits = total - self._cum_bits
        self._cum_bits = total
        return bits


class WaypointMobility:
    """Random-waypoint walk inside a rectangular region."""

    def __init__(
        self,
        start: Point,
        region: tuple[float, float, float, float],
        speed_mps: float,
        pause_s: float,
        stream: RngStream,
    ):
        self.position = start
        self.region = region
        self.speed_mps = speed_mps
        self.pause_ttis = max(0, round(pause_s * TTIS_PER_SECOND))
        self._stream = stream
        self._target: Optional[Point] = None
        self._pause_left = 0

    def _pick_target(self) -> Point:
        x_min, y_min, x_max, y_max = self.region
        return (
            x_min + (x_max - x_min) * self._stream.next_uniform(),
            y_min + (y_max - y_min) * self._stream.next_uniform(),
        )

    def step(self, dt_ttis: int) -> Point:
        """Advance dt TTIs toward the current waypoint; never leaves the region."""
        if self.speed_mps <= 0.0:
            return self.position
        remaining_m = self.speed_mps * dt_ttis / TTIS_PER_SECOND
        x, y = self.position
        while remaining_m > 0.0:
            if self._pause_left > 0:
                self._pause_left -= 1 if dt_ttis else 0
                break
            if self._target is None:
                self._target = self._pick_target()
            tx, ty = self._target
            dx, dy = tx - x, ty - y
            dist = (dx * dx + dy * dy) ** 0.5
            if dist <= remaining_m:
                x, y = tx, ty
                remaining_m -= dist
                self._target = None
                self._pause_left = self.pause_ttis
            else:
                x += dx / dist * remaining_m
                y += dy / dist * remaining_m
                remaining_m = 0.0
        self.position = (x, y)
        return self.position

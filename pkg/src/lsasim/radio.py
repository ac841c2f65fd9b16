"""Physical-layer abstraction: log-distance pathloss, SINR, sensing, coverage map.

Every power sum happens in linear milliwatts; dB appears only at the
boundaries. The simulator models downlink only.
"""

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .geometry import Point
from .spectrum import Channel, IncumbentActivation, channels_overlap


class DesiredNotActive(Exception):
    """The victim link's transmission is not in the active set."""


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw <= 0.0:
        return float("-inf")
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class PropagationParams:
    """Log-distance model: PL(d) = pl0 + 10*n*log10(max(d, 1 m)) [+ shadowing].

    Defaults match an indoor/dense small-cell regime (pl0 = 38 dB at 1 m,
    exponent 3.7). Shadowing sigma of 0 disables the shadowing term.
    """

    pl0_db: float = 38.0
    exponent: float = 3.7
    noise_density_dbm_per_hz: float = -174.0
    shadowing_sigma_db: float = 0.0

    def noise_dbm(self, bandwidth_hz: float) -> float:
        return self.noise_density_dbm_per_hz + 10.0 * math.log10(bandwidth_hz)


@dataclass(frozen=True)
class Transmission:
    position: Point
    channel_id: int
    eirp_dbm: float
    operator: str
    cell_id: str


@dataclass(frozen=True)
class SensingReport:
    cell_id: str
    channel_id: int
    interference_dbm: float
    measured_at: int
    delivered_at: int


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def pathloss_db(
    tx: Point,
    rx: Point,
    p: PropagationParams,
    shadow_draw: Optional[float] = None,
) -> float:
    """Pathloss in dB; the reference distance is clamped at 1 m.

    shadow_draw is a pre-drawn standard-normal value (frozen per link for
    run determinism); it is scaled by the configured sigma here.
    """
    d = max(distance(tx, rx), 1.0)
    pl = p.pl0_db + 10.0 * p.exponent * math.log10(d)
    if shadow_draw is not None and p.shadowing_sigma_db > 0.0:
        pl += p.shadowing_sigma_db * shadow_draw
    return pl


def received_dbm(
    tx: Transmission, rx: Point, p: PropagationParams, shadow_draw: Optional[float] = None
) -> float:
    return tx.eirp_dbm - pathloss_db(tx.position, rx, p, shadow_draw)


def sinr_db(
    desired: Transmission,
    rx: Point,
    active: Sequence[Transmission],
    p: PropagationParams,
    channels: Mapping[int, Channel],
) -> float:
    """SINR = S / (N + sum I) in linear watts, returned in dB.

    Interferers are the co-channel (frequency-overlapping) transmissions in
    `active`, excluding the desired one. Noise power is the configured
    density times the desired channel's bandwidth.
    """
    if desired not in active:
        raise DesiredNotActive(f"{desired.cell_id} ch {desired.channel_id}")
    ch = channels[desired.channel_id]
    signal_mw = dbm_to_mw(received_dbm(desired, rx, p))
    noise_mw = dbm_to_mw(p.noise_dbm(ch.bandwidth_hz))
    interference_mw = 0.0
    for tx in active:
        if tx is desired or tx == desired:
            continue
        if channels_overlap(ch, channels[tx.channel_id]):
            interference_mw += dbm_to_mw(received_dbm(tx, rx, p))
    return 10.0 * math.log10(signal_mw / (noise_mw + interference_mw))


def interference_dbm_at(
    rx: Point,
    channel: Channel,
    active: Sequence[Transmission],
    p: PropagationParams,
    channels: Mapping[int, Channel],
    exclude_cell: Optional[str] = None,
) -> float:
    """Aggregate co-channel power at a point, -inf when nothing contributes."""
    total_mw = 0.0
    for tx in active:
        if exclude_cell is not None and tx.cell_id == exclude_cell:
            continue
        if channels_overlap(channel, channels[tx.channel_id]):
            total_mw += dbm_to_mw(received_dbm(tx, rx, p))
    return mw_to_dbm(total_mw)


def incumbent_interference_dbm(
    activation: IncumbentActivation,
    reference_point: Point,
    active: Sequence[Transmission],
    p: PropagationParams,
    channels: Mapping[int, Channel],
) -> float:
    """Aggregate licensee power received at the zone reference point on the
    activation's channels; -inf sentinel when no transmission contributes."""
    total_mw = 0.0
    act_channels = [channels[c] for c in activation.channels]
    for tx in active:
        tx_ch = channels[tx.channel_id]
        if any(channels_overlap(tx_ch, ac) for ac in act_channels):
            total_mw += dbm_to_mw(received_dbm(tx, reference_point, p))
    return mw_to_dbm(total_mw)


class CoverageMap:
    """Gridded per-channel interference estimate built from sensing reports.

    Estimates are linear-domain EWMAs; grid cells never touched by a report
    stay unknown rather than defaulting to a number.
    """

    def __init__(self, x_min: float, y_min: float, x_max: float, y_max: float, pitch_m: float):
        if pitch_m <= 0:
            raise ValueError("pitch must be positive")
        self.x_min = x_min
        self.y_min = y_min
        self.x_max = x_max
        self.y_max = y_max
        self.pitch_m = pitch_m
        # (ix, iy, channel_id) -> [estimate_mw, last_update_tti]
        self._cells: dict[tuple[int, int, int], list] = {}

    def grid_index(self, pos: Point) -> tuple[int, int]:
        ix = int((pos[0] - self.x_min) // self.pitch_m)
        iy = int((pos[1] - self.y_min) // self.pitch_m)
        return ix, iy

    def ingest(self, report: SensingReport, position: Point, beta: float) -> float:
        """Blend a report into the grid cell under the reporting position.

        estimate <- beta*old + (1-beta)*new in linear domain; an unknown cell
        initializes to the report value. Returns the updated estimate in dBm.
        """
        if not 0.0 < beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        key = (*self.grid_index(position), report.channel_id)
        new_mw = dbm_to_mw(report.interference_dbm)
        entry = self._cells.get(key)
        if entry is None:
            self._cells[key] = [new_mw, report.delivered_at]
            return report.interference_dbm
        entry[0] = beta * entry[0] + (1.0 - beta) * new_mw
        entry[1] = report.delivered_at
        return mw_to_dbm(entry[0])

    def estimate_dbm(self, pos: Point, channel_id: int) -> Optional[float]:
        entry = self._cells.get((*self.grid_index(pos), channel_id))
        if entry is None:
            return None
        return mw_to_dbm(entry[0])

    def snapshot_rows(self, tti: int) -> list[tuple[int, int, int, int, float]]:
        """Rows for the CSV export: (tti, grid_x, grid_y, channel_id, dBm)."""
        rows = []
        for (ix, iy, ch), (est_mw, _last) in sorted(self._cells.items()):
            rows.append((tti, ix, iy, ch, mw_to_dbm(est_mw)))
        return rows

"""LSA Repository: authoritative store of incumbent usage, availability queries,
push notifications to subscribed controllers.

Repositories never talk to each other; a controller that needs several simply
subscribes to each and merges answers conservatively.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .spectrum import (
    Channel,
    GeoZone,
    IncumbentActivation,
    Regime,
    UnknownChannel,
    UnknownZone,
    Window,
    zones_conflict,
)


class DuplicateActivationId(Exception):
    pass


class AlreadySubscribed(Exception):
    pass


class NotificationKind(Enum):
    STARTED = "started"
    ENDED = "ended"


@dataclass(frozen=True)
class AvailabilityRecord:
    channel_id: int
    zone_id: str
    window: Window
    qos_max_eirp_dbm: float


@dataclass(frozen=True)
class Subscription:
    controller_id: str
    latency_ttis: int


@dataclass(frozen=True)
class ChangeNotification:
    repository_id: str
    controller_id: str
    kind: NotificationKind
    activation: IncumbentActivation
    deliver_at: int
    affected_channels: frozenset[int]


class Repository:
    def __init__(self, repository_id: str, channels: Mapping[int, Channel], zones: Mapping[str, GeoZone]):
        self.repository_id = repository_id
        self.channels = dict(channels)
        self.zones = dict(zones)
        self.activations: dict[str, IncumbentActivation] = {}
        self.subscriptions: dict[str, Subscription] = {}

    def subscribe(self, controller_id: str, latency_ttis: int) -> Subscription:
        if latency_ttis < 0:
            raise ValueError("latency must be >= 0")
        if controller_id in self.subscriptions:
            raise AlreadySubscribed(controller_id)
        sub = Subscription(controller_id, latency_ttis)
        self.subscriptions[controller_id] = sub
        return sub

    def _fan_out(self, activation: IncumbentActivation, kind: NotificationKind, now: int) -> list[ChangeNotification]:
        return [
            ChangeNotification(
                repository_id=self.repository_id,
                controller_id=sub.controller_id,
                kind=kind,
                activation=activation,
                deliver_at=now + sub.latency_ttis,
                affected_channels=activation.channels,
            )
            for _, sub in sorted(self.subscriptions.items())
        ]

    def register_incumbent_activation(
        self, activation: IncumbentActivation, now: int
    ) -> list[ChangeNotification]:
        """Store the activation and fan out one notification per subscriber.

        Notifications are to be delivered at now + subscription latency; the
        caller owns scheduling the deliveries.
        """
        if activation.activation_id in self.activations:
            raise DuplicateActivationId(activation.activation_id)
        if activation.zone not in self.zones:
            raise UnknownZone(activation.zone)
        for ch in activation.channels:
            if ch not in self.channels:
                raise UnknownChannel(ch)
            if self.channels[ch].regime is not Regime.LSA:
                raise ValueError(f"activation {activation.activation_id}: channel {ch} is not LSA")
        if activation.window.end <= now:
            raise ValueError(f"activation {activation.activation_id}: window already over")
        self.activations[activation.activation_id] = activation
        return self._fan_out(activation, NotificationKind.STARTED, now)

    def notify_activation_ended(self, activation_id: str, now: int) -> list[ChangeNotification]:
        """Fan out end-of-use notifications once an activation window closes."""
        activation = self.activations[activation_id]
        return self._fan_out(activation, NotificationKind.ENDED, now)

    def query_availability(self, zone_id: str, window: Window) -> list[AvailabilityRecord]:
        """LSA channels with no conflicting activation over (zone, window),
        each with its QoS condition, sorted by channel id."""
        if zone_id not in self.zones:
            raise UnknownZone(zone_id)
        records = []
        for ch_id in sorted(self.channels):
            ch = self.channels[ch_id]
            if ch.regime is not Regime.LSA:
                continue
            if self._conflicted(ch_id, zone_id, window):
                continue
            records.append(AvailabilityRecord(ch_id, zone_id, window, ch.max_eirp_dbm))
        return records

    def _conflicted(self, channel_id: int, zone_id: str, window: Window) -> bool:
        for act in self.activations.values():
            if channel_id not in act.channels:
                continue
            if not act.window.overlaps(window):
                continue
            if zones_conflict(zone_id, act.zone, self.zones):
                return True
        return False

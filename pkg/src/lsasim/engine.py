"""Deterministic discrete-event core: TTI clock, totally ordered queue, seeded streams.

One TTI is the clock quantum (1 ms of virtual time by convention; every timer in
the simulator is expressed in whole TTIs). Events fire in strict
(tti, priority, seq) order, so two runs over the same scenario and seed replay
the exact same sequence.
"""

from dataclasses import dataclass
from typing import Callable, Optional
import heapq
import json

# Intra-TTI priority bands, fixed globally. Control plane runs before the
# scheduler so per-TTI decisions always observe a settled control state.
PRIO_GRANT_CONTROL = 0
PRIO_SENSING = 1
PRIO_DCA_HANDOVER = 2
PRIO_TTI_SCHEDULE = 3
PRIO_TRAFFIC = 4
PRIO_METRICS = 5


class SchedulingInPast(Exception):
    """Raised when an event is scheduled behind the processed frontier."""


_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step; returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class RngStream:
    """xoshiro256** stream seeded from (master_seed, stream_id) via splitmix64.

    Streams with distinct ids are independent; identical (seed, id) pairs
    reproduce the same sequence on any platform. The algorithm is spelled out
    in the README so other implementations can match it bit for bit.
    """

    __slots__ = ("stream_id", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, master_seed: int, stream_id: str):
        self.stream_id = stream_id
        state = (master_seed & _MASK64) ^ _fnv1a64(stream_id)
        state, self._s0 = _splitmix64(state)
        state, self._s1 = _splitmix64(state)
        state, self._s2 = _splitmix64(state)
        state, self._s3 = _splitmix64(state)

    def next_raw(self) -> int:
        """Next 64-bit output of xoshiro256**."""
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def next_uniform(self) -> float:
        """Uniform real in [0, 1): top 53 bits of the raw output."""
        return (self.next_raw() >> 11) * (2.0 ** -53)

    def next_exponential(self, mean: float) -> float:
        import math

        # 1-u lies in (0, 1], so log never sees zero
        return -mean * math.log(1.0 - self.next_uniform())

    def next_gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        import math

        u1 = 1.0 - self.next_uniform()
        u2 = self.next_uniform()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection on the top 53 bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        span = 1 << 53
        limit = span - span % n
        while True:
            v = self.next_raw() >> 11
            if v < limit:
                return v % n


def keyed_normal(master_seed: int, *key_parts: object) -> float:
    """Standard-normal draw keyed by (seed, parts): order-independent, frozen.

    Used for per-(tx, grid-cell) shadowing so the value never depends on the
    order in which links are first queried.
    """
    import math

    state = master_seed & _MASK64
    for part in key_parts:
        state ^= _fnv1a64(str(part))
        state, _ = _splitmix64(state)
    state, a = _splitmix64(state)
    _, b = _splitmix64(state)
    u1 = 1.0 - (a >> 11) * (2.0 ** -53)
    u2 = (b >> 11) * (2.0 ** -53)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class Event:
    fire_tti: int
    priority: int
    seq: int
    kind: str
    detail: Optional[dict] = None


class Engine:
    """Single-threaded event loop over a (tti, priority, seq) heap.

    All simulation state is owned by the run and mutated only inside handlers;
    handlers may schedule further events at or after the processed frontier.
    """

    def __init__(self, tracer: Optional[Callable[[Event], None]] = None):
        self.clock = 0
        self._heap: list[tuple[int, int, int, Event, Callable[[int], None]]] = []
        self._seq = 0
        self._last_key = (-1, -1, -1)
        self.processed = 0
        self.tracer = tracer

    def schedule(
        self,
        tti: int,
        priority: int,
        kind: str,
        handler: Callable[[int], None],
        detail: Optional[dict] = None,
    ) -> int:
        if tti < self.clock or (tti, priority) < self._last_key[:2]:
            raise SchedulingInPast(
                f"cannot schedule {kind!r} at ({tti}, {priority}); "
                f"clock={self.clock}, frontier={self._last_key[:2]}"
            )
        seq = self._seq
        self._seq += 1
        event = Event(tti, priority, seq, kind, detail)
        heapq.heappush(self._heap, (tti, priority, seq, event, handler))
        return seq

    def run_until(self, t_end: int) -> int:
        """Process every event with fire_tti <= t_end in total order."""
        count = 0
        heap = self._heap
        while heap and heap[0][0] <= t_end:
            tti, priority, seq, event, handler = heapq.heappop(heap)
            self.clock = tti
            self._last_key = (tti, priority, seq)
            if self.tracer is not None:
                self.tracer(event)
            handler(tti)
            count += 1
        if t_end > self.clock:
            self.clock = t_end
        self.processed += count
        return count


def trace_line(event: Event) -> str:
    """Tab-separated trace row: tti, priority, seq, kind, detail-json."""
    detail = json.dumps(event.detail or {}, sort_keys=True, separators=(",", ":"))
    return f"{event.fire_tti}\t{event.priority}\t{event.seq}\t{event.kind}\t{detail}"

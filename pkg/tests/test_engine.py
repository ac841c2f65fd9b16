import pytest
from hypothesis import given, strategies as st

from lsasim.engine import Engine, RngStream, SchedulingInPast, keyed_normal, trace_line


def collect(engine):
    log = []
    engine.tracer = lambda ev: log.append((ev.fire_tti, ev.priority, ev.seq, ev.kind))
    return log


def test_same_time_same_priority_fires_in_insertion_order():
    eng = Engine()
    fired = []
    eng.schedule(5, 1, "a", lambda t: fired.append("a"))
    eng.schedule(5, 1, "b", lambda t: fired.append("b"))
    eng.run_until(5)
    assert fired == ["a", "b"]


def test_higher_priority_fires_before_pending_at_same_time():
    eng = Engine()
    fired = []
    eng.schedule(5, 3, "low", lambda t: fired.append("low"))
    eng.schedule(5, 0, "high", lambda t: fired.append("high"))
    eng.run_until(5)
    assert fired == ["high", "low"]


def test_schedule_in_past_raises():
    eng = Engine()
    eng.schedule(3, 0, "x", lambda t: None)
    eng.run_until(10)
    with pytest.raises(SchedulingInPast):
        eng.schedule(9, 0, "late", lambda t: None)


def test_run_until_empty_queue_returns_zero():
    assert Engine().run_until(100) == 0


def test_run_until_boundary_inclusive():
    eng = Engine()
    for tti in (1, 5, 9):
        eng.schedule(tti, 0, "e", lambda t: None)
    assert eng.run_until(5) == 2
    assert eng.clock == 5


def test_cascade_counts_follow_ups():
    # hand-traced: event at 1 schedules a follow-up at 3; events at 1, 3, 5
    # within the horizon make 3 processed events
    eng = Engine()

    def first(t):
        eng.schedule(3, 0, "follow", lambda t2: None)

    eng.schedule(1, 0, "first", first)
    eng.schedule(5, 0, "later", lambda t: None)
    eng.schedule(9, 0, "beyond", lambda t: None)
    assert eng.run_until(5) == 3


def test_clock_never_decreases_and_advances_to_horizon():
    eng = Engine()
    seen = []
    eng.schedule(2, 0, "e", lambda t: seen.append(eng.clock))
    eng.run_until(7)
    assert seen == [2]
    assert eng.clock == 7


@given(
    st.lists(
        st.tuples(st.integers(0, 50), st.integers(0, 5)),
        min_size=1,
        max_size=40,
    )
)
def test_processed_log_is_totally_ordered(items):
    eng = Engine()
    log = collect(eng)
    for tti, prio in items:
        eng.schedule(tti, prio, "e", lambda t: None)
    eng.run_until(60)
    keys = [(t, p, s) for (t, p, s, _k) in log]
    assert keys == sorted(keys)
    assert len(keys) == len(items)


def test_trace_line_format():
    eng = Engine()
    lines = []
    eng.tracer = lambda ev: lines.append(trace_line(ev))
    eng.schedule(4, 2, "ping", lambda t: None, {"x": 1})
    eng.run_until(4)
    assert lines == ['4\t2\t0\tping\t{"x":1}']


# -- RNG stream contracts -----------------------------------------------------


def test_same_seed_same_stream_reproduces():
    a = RngStream(123, "traffic")
    b = RngStream(123, "traffic")
    assert [a.next_uniform() for _ in range(50)] == [b.next_uniform() for _ in range(50)]


def test_different_stream_ids_differ():
    a = RngStream(123, "traffic")
    b = RngStream(123, "shadowing")
    assert [a.next_uniform() for _ in range(100)] != [b.next_uniform() for _ in range(100)]


def test_uniform_range_and_mean():
    # law-of-large-numbers check, pinned seed: 1e5 draws, mean within 0.5 +/- 0.01
    s = RngStream(2024, "mean-check")
    draws = [s.next_uniform() for _ in range(100_000)]
    assert all(0.0 <= u < 1.0 for u in draws)
    mean = sum(draws) / len(draws)
    assert abs(mean - 0.5) < 0.01


def test_next_below_uniformity_bounds():
    s = RngStream(7, "ints")
    values = [s.next_below(6) for _ in range(1000)]
    assert set(values) <= set(range(6))
    assert len(set(values)) == 6


def test_keyed_normal_is_order_independent():
    a = keyed_normal(42, "shadow", "cell1", 3, 4)
    _ = keyed_normal(42, "shadow", "cell9", 0, 0)
    b = keyed_normal(42, "shadow", "cell1", 3, 4)
    assert a == b
    assert keyed_normal(42, "shadow", "cell1", 3, 5) != a


def test_exponential_positive():
    s = RngStream(1, "exp")
    assert all(s.next_exponential(2.0) > 0.0 for _ in range(1000))

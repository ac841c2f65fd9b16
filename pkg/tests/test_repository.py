import pytest
from hypothesis import given, strategies as st

from lsasim.repository import (
    AlreadySubscribed,
    DuplicateActivationId,
    NotificationKind,
    Repository,
)
from lsasim.spectrum import (
    Channel,
    IncumbentActivation,
    Regime,
    UnknownZone,
    Window,
    make_zone,
    zones_conflict,
)

COASTAL = make_zone("coastal", [(0, 0), (280, 0), (280, 300), (0, 300)])
INLAND = make_zone("inland", [(320, 0), (600, 0), (600, 300), (320, 300)])
ZONES = {"coastal": COASTAL, "inland": INLAND}
CHANNELS = {
    1: Channel(1, 2600.0, 10.0, Regime.LSA),  # the 2.6 GHz maritime-radar band
    2: Channel(2, 3505.0, 10.0, Regime.LSA),
    9: Channel(9, 2110.0, 10.0, Regime.LICENSED, operator="opA"),
}


def repo():
    return Repository("repo-1", CHANNELS, ZONES)


def act(act_id, channels, zone, window):
    return IncumbentActivation(act_id, "radar", frozenset(channels), zone, Window(*window))


def test_register_without_subscribers_stores_but_notifies_nobody():
    r = repo()
    notes = r.register_incumbent_activation(act("a1", {1}, "coastal", (50, 150)), now=10)
    assert notes == []
    assert "a1" in r.activations


def test_subscription_latency_arithmetic():
    r = repo()
    r.subscribe("ctrl-1", 2)
    notes = r.register_incumbent_activation(act("a1", {1}, "coastal", (150, 300)), now=100)
    assert [n.deliver_at for n in notes] == [102]
    assert notes[0].kind is NotificationKind.STARTED


def test_fan_out_two_subscribers_identical_payload():
    r = repo()
    r.subscribe("ctrl-1", 1)
    r.subscribe("ctrl-2", 5)
    notes = r.register_incumbent_activation(act("a1", {1}, "coastal", (150, 300)), now=100)
    assert sorted(n.deliver_at for n in notes) == [101, 105]
    assert {n.controller_id for n in notes} == {"ctrl-1", "ctrl-2"}
    assert len({n.activation for n in notes}) == 1


def test_register_then_subscribe_is_not_retroactive_but_query_reflects_it():
    r = repo()
    r.register_incumbent_activation(act("a1", {1}, "coastal", (50, 150)), now=10)
    r.subscribe("ctrl-1", 1)
    available = r.query_availability("coastal", Window(60, 70))
    assert 1 not in {rec.channel_id for rec in available}


def test_negative_latency_rejected():
    with pytest.raises(ValueError):
        repo().subscribe("ctrl-1", -1)


def test_double_subscribe_rejected():
    r = repo()
    r.subscribe("ctrl-1", 1)
    with pytest.raises(AlreadySubscribed):
        r.subscribe("ctrl-1", 2)


def test_duplicate_activation_rejected():
    r = repo()
    r.register_incumbent_activation(act("a1", {1}, "coastal", (50, 150)), now=10)
    with pytest.raises(DuplicateActivationId):
        r.register_incumbent_activation(act("a1", {2}, "inland", (50, 150)), now=10)


def test_empty_activation_set_returns_all_lsa_channels():
    records = repo().query_availability("coastal", Window(0, 100))
    assert [rec.channel_id for rec in records] == [1, 2]
    assert all(rec.qos_max_eirp_dbm == 30.0 for rec in records)


def test_coastal_radar_clears_coastal_zone_only():
    # maritime radar on the 2.6 GHz channel: absent from the coastal answer,
    # still present inland
    r = repo()
    r.register_incumbent_activation(act("radar", {1}, "coastal", (100, 900)), now=10)
    coastal = {rec.channel_id for rec in r.query_availability("coastal", Window(200, 300))}
    inland = {rec.channel_id for rec in r.query_availability("inland", Window(200, 300))}
    assert coastal == {2}
    assert inland == {1, 2}


def test_half_open_windows_do_not_collide_at_boundary():
    r = repo()
    r.register_incumbent_activation(act("a1", {1}, "coastal", (200, 300)), now=10)
    available = {rec.channel_id for rec in r.query_availability("coastal", Window(300, 400))}
    assert 1 in available


def test_unknown_zone_query():
    with pytest.raises(UnknownZone):
        repo().query_availability("atlantis", Window(0, 10))


def test_idempotent_requery():
    r = repo()
    r.register_incumbent_activation(act("a1", {1}, "coastal", (50, 150)), now=10)
    w = Window(60, 80)
    assert r.query_availability("coastal", w) == r.query_availability("coastal", w)


activation_st = st.tuples(
    st.sampled_from([1, 2]),
    st.sampled_from(["coastal", "inland"]),
    st.integers(0, 400),
    st.integers(1, 300),
)


@given(st.lists(activation_st, max_size=8), st.sampled_from(["coastal", "inland"]),
       st.integers(0, 500), st.integers(1, 200))
def test_notification_replay_reconstructs_query(acts, zone, q_start, q_len):
    """Applying the pushed notifications to a mirror must answer availability
    exactly as a fresh repository query would."""
    r = repo()
    r.subscribe("ctrl-1", 0)
    mirror = {}
    for i, (ch, z, start, dur) in enumerate(acts):
        notes = r.register_incumbent_activation(
            act(f"a{i}", {ch}, z, (start, start + dur)), now=0
        )
        for n in notes:
            mirror[n.activation.activation_id] = n.activation
    window = Window(q_start, q_start + q_len)
    fresh = {rec.channel_id for rec in r.query_availability(zone, window)}
    replayed = set()
    for ch_id in (1, 2):
        blocked = any(
            ch_id in a.channels
            and a.window.overlaps(window)
            and zones_conflict(zone, a.zone, ZONES)
            for a in mirror.values()
        )
        if not blocked:
            replayed.add(ch_id)
    assert fresh == replayed


@given(st.lists(activation_st, min_size=1, max_size=8))
def test_availability_anti_monotone_in_activations(acts):
    r = repo()
    window = Window(0, 700)
    previous = {
        zone: {rec.channel_id for rec in r.query_availability(zone, window)}
        for zone in ZONES
    }
    for i, (ch, z, start, dur) in enumerate(acts):
        r.register_incumbent_activation(act(f"a{i}", {ch}, z, (start, start + dur)), now=0)
        current = {
            zone: {rec.channel_id for rec in r.query_availability(zone, window)}
            for zone in ZONES
        }
        for zone in ZONES:
            assert current[zone] <= previous[zone]
        previous = current

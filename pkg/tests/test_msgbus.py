"""Bus behavior: registration, fan-out, queues, services."""

import time

import pytest

from vtui.msgbus import (
    BadTopicName,
    Bus,
    DuplicateService,
    HandleRevoked,
    NoSuchService,
    ServiceTimeout,
    TypeTagConflict,
    VirtualClock,
)


@pytest.fixture
def bus():
    return Bus(VirtualClock.stepped())


def test_advertise_idempotent(bus):
    h1 = bus.advertise("n1", "/tui/cube1/accel", "AccelSample")
    h2 = bus.advertise("n1", "/tui/cube1/accel", "AccelSample")
    assert h1 is not h2
    assert bus.topic_type("/tui/cube1/accel") == "AccelSample"


def test_type_tag_conflict(bus):
    bus.advertise("n1", "/tui/cube1/accel", "AccelSample")
    with pytest.raises(TypeTagConflict):
        bus.advertise("n2", "/tui/cube1/accel", "DisplayFrame")
    with pytest.raises(TypeTagConflict):
        bus.subscribe("n2", "/tui/cube1/accel", "DisplayFrame")


@pytest.mark.parametrize(
    "name", ["bad topic!", "no_leading_slash", "/Upper", "/a//b", "/a/", "/a b"]
)
def test_bad_topic_names(bus, name):
    with pytest.raises(BadTopicName):
        bus.advertise("n1", name, "X")


def test_subscribe_before_publish(bus):
    sub = bus.subscribe("n2", "/a/x", "T")
    pub = bus.advertise("n1", "/a/x", "T")
    pub.publish(b"m")
    msgs = sub.drain()
    assert [m.payload for m in msgs] == [b"m"]
    assert msgs[0].seq == 0
    assert sub.drain() == []


def test_drop_oldest_policy(bus):
    sub = bus.subscribe("n2", "/a/x", "T", queue_depth=2)
    pub = bus.advertise("n1", "/a/x", "T")
    for m in (b"m1", b"m2", b"m3"):
        pub.publish(m)
    assert [m.payload for m in sub.drain()] == [b"m2", b"m3"]
    assert sub.drops == 1


def test_fanout_one_copy_each(bus):
    s1 = bus.subscribe("a", "/t/x", "T")
    s2 = bus.subscribe("b", "/t/x", "T")
    bus.advertise("p", "/t/x", "T").publish(b"hello")
    assert len(s1.drain()) == 1
    assert len(s2.drain()) == 1


def test_seq_and_fifo_order(bus):
    sub = bus.subscribe("n2", "/a/x", "T", queue_depth=200)
    pub = bus.advertise("n1", "/a/x", "T")
    for i in range(100):
        assert pub.publish(str(i).encode()) == i
    seqs = [m.seq for m in sub.drain()]
    assert seqs == list(range(100))


def test_stamps_track_clock(bus):
    sub = bus.subscribe("n2", "/a/x", "T")
    pub = bus.advertise("n1", "/a/x", "T")
    pub.publish(b"a")
    bus.clock.tick(5_000_000)
    pub.publish(b"b")
    a, b = sub.drain()
    assert a.stamp == 0 and b.stamp == 5_000_000


def test_publish_after_shutdown(bus):
    pub = bus.advertise("n1", "/a/x", "T")
    bus.shutdown_node("n1")
    with pytest.raises(HandleRevoked):
        pub.publish(b"m")


def test_echo_service(bus):
    bus.register_service("n1", "/svc/echo", lambda req: req)
    assert bus.call_service("/svc/echo", b"x") == b"x"


def test_no_such_service(bus):
    with pytest.raises(NoSuchService):
        bus.call_service("/svc/nope", b"x")


def test_duplicate_service(bus):
    bus.register_service("n1", "/svc/echo", lambda req: req)
    with pytest.raises(DuplicateService):
        bus.register_service("n2", "/svc/echo", lambda req: req)


def test_service_timeout(bus):
    def hang(_req):
        time.sleep(30)
        return b""

    bus.register_service("n1", "/svc/hang", hang)
    t0 = time.monotonic()
    with pytest.raises(ServiceTimeout):
        bus.call_service("/svc/hang", b"x", timeout=0.01)
    assert time.monotonic() - t0 < 5.0


def test_service_runs_exactly_once(bus):
    calls = []

    def handler(req):
        calls.append(req)
        return b"ok"

    bus.register_service("n1", "/svc/count", handler)
    bus.call_service("/svc/count", b"a")
    assert calls == [b"a"]

import io
import json

import pytest

from perception_monitor import bus as topics
from perception_monitor.bus import BusError, MessageBus, PayloadKindMismatch, UnknownTopic, standard_bus
from perception_monitor.domain import ObjectListFrame

from conftest import CAM, frame, make_ego, obj


@pytest.fixture
def bus():
    b = MessageBus()
    b.register("numbers", int)
    return b


def test_publish_without_subscribers(bus):
    assert bus.publish("numbers", 1, 0) == 0


def test_two_subscribers_get_identical_payload():
    b = standard_bus()
    seen = [], []
    b.subscribe(topics.CAMERA_OBJECTS, lambda p, t: seen[0].append(p))
    b.subscribe(topics.CAMERA_OBJECTS, lambda p, t: seen[1].append(p))
    f = frame(CAM, 100, obj(CAM))
    assert b.publish(topics.CAMERA_OBJECTS, f, 10) == 2
    assert seen[0] == seen[1] == [f] and seen[0][0] is seen[1][0]


def test_publish_order_not_timestamp_order(bus):
    got = []
    bus.subscribe("numbers", lambda p, t: got.append(t))
    bus.publish("numbers", 1, 5)
    bus.publish("numbers", 2, 3)
    assert got == [5, 3]


def test_subscription_order(bus):
    got = []
    for i in range(4):
        bus.subscribe("numbers", lambda p, t, i=i: got.append(i))
    bus.publish("numbers", 0, 0)
    assert got == [0, 1, 2, 3]


def test_unknown_topic(bus):
    with pytest.raises(UnknownTopic):
        bus.publish("nope", 1, 0)
    with pytest.raises(UnknownTopic):
        bus.subscribe("nope", lambda p, t: None)


def test_kind_mismatch(bus):
    with pytest.raises(PayloadKindMismatch):
        bus.publish("numbers", "one", 0)
    with pytest.raises(TypeError):
        standard_bus().publish(topics.EGO_STATE, frame(CAM, 0), 0)


def test_reregister_conflict(bus):
    assert bus.register("numbers", int).kind is int
    with pytest.raises(BusError):
        bus.register("numbers", str)


def test_unsubscribe(bus):
    got = []
    sub = bus.subscribe("numbers", lambda p, t: got.append(p))
    bus.publish("numbers", 1, 0)
    sub.unsubscribe()
    sub.unsubscribe()
    assert bus.publish("numbers", 2, 1) == 0 and got == [1]


def test_unsubscribe_during_delivery(bus):
    got = []
    subs = []
    subs.append(bus.subscribe("numbers", lambda p, t: subs[1].unsubscribe()))
    subs.append(bus.subscribe("numbers", lambda p, t: got.append(p)))
    assert bus.publish("numbers", 1, 0) == 1 and got == []


def test_subscribe_during_delivery_sees_only_later_publishes(bus):
    got = []
    bus.subscribe("numbers", lambda p, t: bus.subscribe("numbers", lambda q, u: got.append(q)) if p == 1 else None)
    bus.publish("numbers", 1, 0)
    bus.publish("numbers", 2, 1)
    assert got == [2]


def test_fifo_no_loss_no_duplication(bus):
    a, b = [], []
    bus.subscribe("numbers", lambda p, t: a.append(p))
    bus.subscribe("numbers", lambda p, t: b.append(p))
    for i in range(1000):
        bus.publish("numbers", i, 1000 - i)
    assert a == b == list(range(1000))


def test_tap_writes_jsonl():
    b = standard_bus()
    out = io.StringIO()
    b.tap(topics.EGO_STATE, out)
    b.publish(topics.EGO_STATE, make_ego(at=7), 7)
    b.publish(topics.EGO_STATE, make_ego(speed=1.0, at=8), 8)
    lines = [json.loads(x) for x in out.getvalue().splitlines()]
    assert [x["t_ms"] for x in lines] == [7, 8]
    assert lines[1]["payload"]["speed_mps"] == 1.0 and lines[0]["topic"] == "ego/state"


def test_standard_topics():
    kinds = {t.name: t.kind for t in standard_bus().topics}
    assert kinds[topics.LIDAR_OBJECTS] is ObjectListFrame
    assert set(kinds) == {topics.CAMERA_OBJECTS, topics.LIDAR_OBJECTS, topics.EGO_STATE,
                          topics.MONITOR_VERDICT, topics.MONITOR_MODE}

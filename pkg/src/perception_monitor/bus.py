"""Synchronous in-process publish/subscribe bus with typed topics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Any, Callable

from .domain import DomainError, EgoState, ObjectListFrame, Timestamp, encode

Handler = Callable[[Any, Timestamp], None]

CAMERA_OBJECTS = "perception/camera/objects"
LIDAR_OBJECTS = "perception/lidar/objects"
EGO_STATE = "ego/state"
MONITOR_VERDICT = "monitor/verdict"
MONITOR_MODE = "monitor/mode"


class BusError(DomainError):
    pass


class UnknownTopic(BusError):
    pass


class PayloadKindMismatch(BusError, TypeError):
    pass


@dataclass(frozen=True)
class Topic:
    name: str
    kind: type


class Subscription:
    def __init__(self, bus: MessageBus, topic: str, handler: Handler):
        self.bus = bus
        self.topic = topic
        self.handler = handler
        self.active = True

    def unsubscribe(self) -> None:
        if self.active:
            self.bus._subscribers[self.topic].remove(self)
            self.active = False


class MessageBus:
    """Delivers each publish to the current subscribers, in subscription order, before returning."""

    def __init__(self) -> None:
        self._topics: dict[str, Topic] = {}
        self._subscribers: dict[str, list[Subscription]] = {}

    def register(self, name: str, kind: type) -> Topic:
        if name in self._topics:
            if self._topics[name].kind is not kind:
                raise BusError(f"topic {name!r} already carries {self._topics[name].kind.__name__}")
            return self._topics[name]
        topic = Topic(name, kind)
        self._topics[name] = topic
        self._subscribers[name] = []
        return topic

    @property
    def topics(self) -> list[Topic]:
        return list(self._topics.values())

    def _topic(self, name: str) -> Topic:
        try:
            return self._topics[name]
        except KeyError:
            raise UnknownTopic(f"unknown topic {name!r}") from None

    def subscribe(self, topic: str, handler: Handler) -> Subscription:
        self._topic(topic)
        sub = Subscription(self, topic, handler)
        self._subscribers[topic].append(sub)
        return sub

    def publish(self, topic: str, payload: Any, at: Timestamp) -> int:
        kind = self._topic(topic).kind
        if not isinstance(payload, kind):
            raise PayloadKindMismatch(
                f"topic {topic!r} carries {kind.__name__}, got {type(payload).__name__}")
        delivered = 0
        for sub in list(self._subscribers[topic]):
            if sub.active:
                sub.handler(payload, at)
                delivered += 1
        return delivered

    def tap(self, topic: str, stream: IO[str], to_record: Callable[[Any], Any] = encode) -> Subscription:
        """Mirror a topic to a line-delimited JSON stream."""
        def write(payload: Any, at: Timestamp) -> None:
            line = {"topic": topic, "t_ms": at, "payload": to_record(payload)}
            stream.write(json.dumps(line, sort_keys=True) + "\n")
        return self.subscribe(topic, write)


def standard_bus() -> MessageBus:
    """A bus with the perception, ego and monitor topics registered."""
    from .mode_control import AdsMode
    from .validator import ValidationVerdict

    bus = MessageBus()
    bus.register(CAMERA_OBJECTS, ObjectListFrame)
    bus.register(LIDAR_OBJECTS, ObjectListFrame)
    bus.register(EGO_STATE, EgoState)
    bus.register(MONITOR_VERDICT, ValidationVerdict)
    bus.register(MONITOR_MODE, AdsMode)
    return bus

"""Seeded, event-driven execution of a scenario against the function monitor."""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Union

from .. import bus as topics
from ..domain import DetectedObject, ObjectListFrame, RunSettings, SensorSource, Timestamp, settings_to_dict
from ..mode_control import AdsMode
from ..monitor import FunctionMonitor
from ..validator import Status, ValidationVerdict, verdict_to_record
from .model import Scenario, SensorModel

# same-time ordering: ego first, then sensor frames, then the monitor tick
_EGO, _FRAME, _MONITOR = 0, 1, 2


@dataclass
class VerdictLog:
    records: list[dict[str, Any]] = field(default_factory=list)

    def verdicts(self) -> list[dict[str, Any]]:
        return [r for r in self.records if r["kind"] == "verdict"]

    def modes(self) -> list[dict[str, Any]]:
        return [r for r in self.records if r["kind"] == "mode"]

    def status_counts(self) -> dict[str, int]:
        counts = Counter(r["status"] for r in self.verdicts())
        return {s.value: counts.get(s.value, 0) for s in Status}

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read(cls, path: Union[str, Path]) -> VerdictLog:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([json.loads(line) for line in lines if line.strip()])


def tick_times(rate_hz: float, duration_ms: int, offset_ms: int = 0) -> list[int]:
    """Integer-millisecond grid k/rate, shifted by offset, up to duration inclusive."""
    times = []
    k = 0
    while True:
        t = round(k * 1000.0 / rate_hz) + offset_ms
        if t > duration_ms:
            return times
        times.append(t)
        k += 1


def _sensor_frames(scenario: Scenario, model: SensorModel, seed: int) -> list[tuple[int, ObjectListFrame]]:
    # one independent stream per sensor, derived from the run seed
    rng = random.Random(f"{seed}/{model.source.value}")
    lo, hi = model.confidence_range
    frames = []
    for sensed in tick_times(model.rate_hz, scenario.duration_ms):
        dropped = rng.random() < model.dropout_prob
        publish_at = sensed + model.latency_ms
        objects = []
        for actor in scenario.actors:
            if not actor.seen_by(model.source, sensed):
                continue
            x, y = actor.position_at(sensed)
            sigma_p, sigma_s = model.position_noise_sigma_m, model.size_noise_sigma_m
            objects.append(DetectedObject(
                class_label=actor.class_label,
                width_m=max(0.0, actor.width_m + rng.gauss(0.0, sigma_s)),
                height_m=max(0.0, actor.height_m + rng.gauss(0.0, sigma_s)),
                position=(x + rng.gauss(0.0, sigma_p), y + rng.gauss(0.0, sigma_p)),
                confidence=rng.uniform(lo, hi),
                sensed_at=sensed,
                source=model.source,
            ))
        if dropped or model.offline(sensed) or publish_at > scenario.duration_ms:
            continue
        frames.append((publish_at, ObjectListFrame(model.source, publish_at, tuple(objects))))
    return frames


def run(scenario: Scenario, settings: RunSettings = RunSettings(), seed: Optional[int] = None) -> VerdictLog:
    """Run the scenario on a virtual clock; identical inputs give a byte-identical log."""
    seed = scenario.seed if seed is None else seed
    bus = topics.standard_bus()
    monitor = FunctionMonitor(settings, bus)
    log = VerdictLog([{
        "kind": "run",
        "scenario": scenario.name,
        "seed": seed,
        "duration_ms": scenario.duration_ms,
        "settings": settings_to_dict(settings),
    }])

    last_mode = [monitor.mode.mode]

    def on_verdict(verdict: ValidationVerdict, at: Timestamp) -> None:
        log.records.append(verdict_to_record(verdict))

    def on_mode(state: AdsMode, at: Timestamp) -> None:
        log.records.append({
            "kind": "mode",
            "t_ms": at,
            "from": last_mode[0].value,
            "mode": state.mode.value,
            "cause": state.cause,
        })
        last_mode[0] = state.mode

    bus.subscribe(topics.MONITOR_VERDICT, on_verdict)
    bus.subscribe(topics.MONITOR_MODE, on_mode)

    events: list[tuple[int, int, int, Any]] = []
    seq = 0

    def push(t: int, prio: int, payload: Any) -> None:
        nonlocal seq
        heapq.heappush(events, (t, prio, seq, payload))
        seq += 1

    for sample in scenario.ego_timeline:
        if sample.t_ms <= scenario.duration_ms:
            push(sample.t_ms, _EGO, scenario.ego_at(sample))
    for src in (SensorSource.CAMERA, SensorSource.LIDAR):
        for t, frame in _sensor_frames(scenario, scenario.sensors[src], seed):
            push(t, _FRAME, frame)
    for t in tick_times(settings.monitor_rate_hz, scenario.duration_ms):
        push(t, _MONITOR, None)

    frame_topic = {SensorSource.CAMERA: topics.CAMERA_OBJECTS, SensorSource.LIDAR: topics.LIDAR_OBJECTS}
    while events:
        t, prio, _, payload = heapq.heappop(events)
        if prio == _EGO:
            bus.publish(topics.EGO_STATE, payload, t)
        elif prio == _FRAME:
            bus.publish(frame_topic[payload.source], payload, t)
        elif monitor.ego is not None:
            monitor.evaluate(t)
    return log


@dataclass(frozen=True)
class ExpectationResult:
    t_from: int
    t_to: int
    expected: Status
    observed: int
    matching: int
    dominant: Optional[str]
    passed: bool

    @property
    def fraction(self) -> float:
        return self.matching / self.observed if self.observed else 0.0


PASS_FRACTION = 0.95


def check_expectations(log: Union[VerdictLog, Iterable[dict]], scenario: Scenario,
                       min_fraction: float = PASS_FRACTION) -> list[ExpectationResult]:
    """One result per expectation window (bounds inclusive).

    A window passes when at least ``min_fraction`` of its verdicts carry the
    expected status. A window with no verdicts fails.
    """
    records = log.verdicts() if isinstance(log, VerdictLog) else [r for r in log if r.get("kind") == "verdict"]
    results = []
    for exp in scenario.expected:
        statuses = [r["status"] for r in records if exp.t_from <= r["t_ms"] <= exp.t_to]
        counts = Counter(statuses)
        matching = counts.get(exp.status.value, 0)
        dominant = max(sorted(counts), key=counts.__getitem__) if counts else None
        passed = bool(statuses) and matching >= min_fraction * len(statuses)
        results.append(ExpectationResult(exp.t_from, exp.t_to, exp.status, len(statuses), matching, dominant, passed))
    return results

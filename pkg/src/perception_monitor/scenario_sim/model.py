"""Declarative scenario description and its JSON loader."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from ..domain import DomainError, EgoState, SensorSource, Timestamp
from ..validator import Status


class ScenarioError(DomainError):
    """Scenario document failed to parse or validate; ``errors`` holds one message per problem."""

    def __init__(self, errors: list[str], source: Optional[str] = None):
        self.errors = errors
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(errors))


@dataclass(frozen=True)
class EgoSample:
    t_ms: Timestamp
    speed_mps: float
    steering_angle_rad: float


@dataclass(frozen=True)
class EgoParams:
    wheelbase_m: float = 0.33
    body_length_m: float = 0.55
    body_width_m: float = 0.27
    max_decel_mps2: float = 2.0
    reaction_time_s: float = 0.5


@dataclass(frozen=True)
class Waypoint:
    t_ms: Timestamp
    x_m: float
    y_m: float


@dataclass(frozen=True)
class Actor:
    id: str
    class_label: str
    width_m: float
    height_m: float
    trajectory: tuple[Waypoint, ...]
    visible_to: frozenset[SensorSource]
    active_ms: Optional[tuple[Timestamp, Timestamp]] = None
    # windows in which one sensor misses the actor although it is visible to it
    hidden_from: tuple[tuple[SensorSource, Timestamp, Timestamp], ...] = ()

    def position_at(self, t: Timestamp) -> tuple[float, float]:
        """Piecewise-linear position, held constant before the first and after the last waypoint."""
        pts = self.trajectory
        if t <= pts[0].t_ms:
            return pts[0].x_m, pts[0].y_m
        for a, b in zip(pts, pts[1:]):
            if t <= b.t_ms:
                u = (t - a.t_ms) / (b.t_ms - a.t_ms)
                return a.x_m + u * (b.x_m - a.x_m), a.y_m + u * (b.y_m - a.y_m)
        return pts[-1].x_m, pts[-1].y_m

    def active(self, t: Timestamp) -> bool:
        return self.active_ms is None or self.active_ms[0] <= t <= self.active_ms[1]

    def seen_by(self, source: SensorSource, t: Timestamp) -> bool:
        if source not in self.visible_to or not self.active(t):
            return False
        return not any(s is source and a <= t <= b for s, a, b in self.hidden_from)


@dataclass(frozen=True)
class SensorModel:
    source: SensorSource
    rate_hz: float
    latency_ms: int = 0
    dropout_prob: float = 0.0
    position_noise_sigma_m: float = 0.0
    size_noise_sigma_m: float = 0.0
    confidence_range: tuple[float, float] = (0.9, 0.9)
    outages: tuple[tuple[Timestamp, Timestamp], ...] = ()

    def offline(self, t: Timestamp) -> bool:
        return any(a <= t <= b for a, b in self.outages)


@dataclass(frozen=True)
class Expectation:
    t_from: Timestamp
    t_to: Timestamp
    status: Status


@dataclass(frozen=True)
class Scenario:
    name: str
    duration_ms: Timestamp
    ego_timeline: tuple[EgoSample, ...]
    ego_params: EgoParams
    actors: tuple[Actor, ...]
    sensors: dict[SensorSource, SensorModel]
    expected: tuple[Expectation, ...] = ()
    seed: int = 0
    description: str = ""

    def ego_at(self, sample: EgoSample) -> EgoState:
        p = self.ego_params
        return EgoState(
            speed_mps=sample.speed_mps,
            steering_angle_rad=sample.steering_angle_rad,
            wheelbase_m=p.wheelbase_m,
            body_length_m=p.body_length_m,
            body_width_m=p.body_width_m,
            max_decel_mps2=p.max_decel_mps2,
            reaction_time_s=p.reaction_time_s,
            at=sample.t_ms,
        )


# --- parsing ------------------------------------------------------------------


class _Reader:
    """Collects every problem with a JSON-path-like location instead of stopping at the first."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def fail(self, path: str, msg: str) -> None:
        self.errors.append(f"{path}: {msg}")

    def obj(self, value: Any, path: str, required: tuple[str, ...] = (), optional: tuple[str, ...] = ()) -> Optional[dict]:
        if not isinstance(value, Mapping):
            self.fail(path, "expected an object")
            return None
        for key in required:
            if key not in value:
                self.fail(f"{path}.{key}", "missing")
        for key in sorted(set(value) - set(required) - set(optional)):
            self.fail(f"{path}.{key}", "unknown field")
        return dict(value)

    def num(self, d: dict, key: str, path: str, default: Any = None, lo: Optional[float] = None,
            lo_strict: bool = False, hi: Optional[float] = None, hi_strict: bool = False) -> float:
        value = d.get(key, default)
        where = f"{path}.{key}"
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            if key in d or default is None:
                self.fail(where, f"expected a finite number, got {value!r}")
            return math.nan
        if lo is not None and (value <= lo if lo_strict else value < lo):
            self.fail(where, f"must be {'>' if lo_strict else '>='} {lo}, got {value}")
        if hi is not None and (value >= hi if hi_strict else value > hi):
            self.fail(where, f"must be {'<' if hi_strict else '<='} {hi}, got {value}")
        return float(value)

    def int_(self, d: dict, key: str, path: str, default: Any = None, lo: Optional[int] = 0) -> int:
        value = d.get(key, default)
        where = f"{path}.{key}"
        if isinstance(value, bool) or not isinstance(value, int):
            if key in d or default is None:
                self.fail(where, f"expected an integer, got {value!r}")
            return -1
        if lo is not None and value < lo:
            self.fail(where, f"must be >= {lo}, got {value}")
        return value

    def str_(self, d: dict, key: str, path: str, default: Any = None) -> str:
        value = d.get(key, default)
        if not isinstance(value, str):
            if key in d or default is None:
                self.fail(f"{path}.{key}", f"expected a string, got {value!r}")
            return ""
        return value

    def lst(self, d: dict, key: str, path: str, default: Any = None) -> list:
        value = d.get(key, default)
        if not isinstance(value, list):
            if key in d or default is None:
                self.fail(f"{path}.{key}", "expected a list")
            return []
        return value

    def source(self, value: Any, path: str) -> Optional[SensorSource]:
        try:
            return SensorSource(value)
        except ValueError:
            known = ", ".join(s.value for s in SensorSource)
            self.fail(path, f"unknown sensor id {value!r} (known: {known})")
            return None

    def window(self, value: Any, path: str) -> Optional[tuple[int, int]]:
        if (not isinstance(value, list) or len(value) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
            self.fail(path, "expected [from_ms, to_ms] integers")
            return None
        if value[0] < 0 or value[1] < value[0]:
            self.fail(path, f"window must satisfy 0 <= from <= to, got {value}")
            return None
        return value[0], value[1]


_SCENARIO_KEYS = ("name", "duration_ms", "ego_timeline", "actors", "sensors")
_SCENARIO_OPTIONAL = ("ego_params", "expected", "seed", "description")


def scenario_from_dict(doc: Any, source: Optional[str] = None) -> Scenario:
    r = _Reader()
    d = r.obj(doc, "$", _SCENARIO_KEYS, _SCENARIO_OPTIONAL)
    if d is None:
        raise ScenarioError(r.errors, source)

    name = r.str_(d, "name", "$")
    description = r.str_(d, "description", "$", default="")
    duration = r.int_(d, "duration_ms", "$", lo=1)
    seed = r.int_(d, "seed", "$", default=0, lo=None)

    timeline = []
    raw_timeline = r.lst(d, "ego_timeline", "$")
    if "ego_timeline" in d and not raw_timeline:
        r.fail("$.ego_timeline", "needs at least one entry")
    for i, item in enumerate(raw_timeline):
        path = f"$.ego_timeline[{i}]"
        e = r.obj(item, path, ("t_ms", "speed_mps", "steering_angle_rad"))
        if e is None:
            continue
        sample = EgoSample(r.int_(e, "t_ms", path), r.num(e, "speed_mps", path, lo=0.0),
                           r.num(e, "steering_angle_rad", path))
        if timeline and sample.t_ms <= timeline[-1].t_ms:
            r.fail(f"{path}.t_ms", f"ego timeline times must be strictly increasing (index {i})")
        timeline.append(sample)

    params = EgoParams()
    if "ego_params" in d:
        p = r.obj(d["ego_params"], "$.ego_params", optional=tuple(EgoParams.__dataclass_fields__))
        if p is not None:
            defaults = EgoParams()
            params = EgoParams(
                wheelbase_m=r.num(p, "wheelbase_m", "$.ego_params", defaults.wheelbase_m, lo=0, lo_strict=True),
                body_length_m=r.num(p, "body_length_m", "$.ego_params", defaults.body_length_m, lo=0, lo_strict=True),
                body_width_m=r.num(p, "body_width_m", "$.ego_params", defaults.body_width_m, lo=0, lo_strict=True),
                max_decel_mps2=r.num(p, "max_decel_mps2", "$.ego_params", defaults.max_decel_mps2, lo=0, lo_strict=True),
                reaction_time_s=r.num(p, "reaction_time_s", "$.ego_params", defaults.reaction_time_s, lo=0),
            )

    actors = []
    seen_ids: set[str] = set()
    for i, item in enumerate(r.lst(d, "actors", "$")):
        path = f"$.actors[{i}]"
        a = r.obj(item, path, ("id", "class_label", "width_m", "height_m", "trajectory", "visible_to"),
                  ("active_ms", "hidden_from"))
        if a is None:
            continue
        actor_id = r.str_(a, "id", path)
        if actor_id in seen_ids:
            r.fail(f"{path}.id", f"duplicate actor id {actor_id!r}")
        seen_ids.add(actor_id)
        waypoints = []
        raw_traj = r.lst(a, "trajectory", path)
        if "trajectory" in a and not raw_traj:
            r.fail(f"{path}.trajectory", f"actor {actor_id!r} needs at least one waypoint")
        for k, wp in enumerate(raw_traj):
            wpath = f"{path}.trajectory[{k}]"
            w = r.obj(wp, wpath, ("t_ms", "x_m", "y_m"))
            if w is None:
                continue
            point = Waypoint(r.int_(w, "t_ms", wpath), r.num(w, "x_m", wpath), r.num(w, "y_m", wpath))
            if waypoints and point.t_ms <= waypoints[-1].t_ms:
                r.fail(f"{wpath}.t_ms", f"actor {actor_id!r}: trajectory times must be strictly increasing "
                                        f"(index {k}: {point.t_ms} after {waypoints[-1].t_ms})")
            waypoints.append(point)
        visible = set()
        for k, src in enumerate(r.lst(a, "visible_to", path)):
            s = r.source(src, f"{path}.visible_to[{k}]")
            if s is not None:
                visible.add(s)
        active = r.window(a["active_ms"], f"{path}.active_ms") if "active_ms" in a else None
        hidden = []
        raw_hidden = a.get("hidden_from", {})
        if not isinstance(raw_hidden, Mapping):
            r.fail(f"{path}.hidden_from", "expected an object keyed by sensor id")
            raw_hidden = {}
        for key, windows in raw_hidden.items():
            src = r.source(key, f"{path}.hidden_from.{key}")
            if not isinstance(windows, list):
                r.fail(f"{path}.hidden_from.{key}", "expected a list of [from_ms, to_ms] windows")
                continue
            for k, w in enumerate(windows):
                win = r.window(w, f"{path}.hidden_from.{key}[{k}]")
                if src is not None and win is not None:
                    hidden.append((src, win[0], win[1]))
        actors.append(Actor(
            id=actor_id,
            class_label=r.str_(a, "class_label", path),
            width_m=r.num(a, "width_m", path, lo=0.0),
            height_m=r.num(a, "height_m", path, lo=0.0),
            trajectory=tuple(waypoints),
            visible_to=frozenset(visible),
            active_ms=active,
            hidden_from=tuple(hidden),
        ))

    sensors: dict[SensorSource, SensorModel] = {}
    raw_sensors = d.get("sensors")
    if isinstance(raw_sensors, Mapping):
        for key, value in raw_sensors.items():
            path = f"$.sensors.{key}"
            src = r.source(key, path)
            s = r.obj(value, path, ("rate_hz",), ("latency_ms", "dropout_prob", "position_noise_sigma_m",
                                                  "size_noise_sigma_m", "confidence_range", "outages"))
            if src is None or s is None:
                continue
            conf = s.get("confidence_range", [0.9, 0.9])
            if (not isinstance(conf, list) or len(conf) != 2
                    or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in conf)
                    or not (0.0 <= conf[0] <= conf[1] <= 1.0)):
                r.fail(f"{path}.confidence_range", f"expected [lo, hi] with 0 <= lo <= hi <= 1, got {conf!r}")
                conf = [0.9, 0.9]
            outages = []
            for k, w in enumerate(r.lst(s, "outages", path, default=[])):
                win = r.window(w, f"{path}.outages[{k}]")
                if win is not None:
                    outages.append(win)
            sensors[src] = SensorModel(
                source=src,
                rate_hz=r.num(s, "rate_hz", path, lo=0, lo_strict=True),
                latency_ms=r.int_(s, "latency_ms", path, default=0),
                dropout_prob=r.num(s, "dropout_prob", path, default=0.0, lo=0.0, hi=1.0, hi_strict=True),
                position_noise_sigma_m=r.num(s, "position_noise_sigma_m", path, default=0.0, lo=0.0),
                size_noise_sigma_m=r.num(s, "size_noise_sigma_m", path, default=0.0, lo=0.0),
                confidence_range=(float(conf[0]), float(conf[1])),
                outages=tuple(outages),
            )
        for src in SensorSource:
            if src not in sensors:
                r.fail(f"$.sensors.{src.value}", "missing sensor model")
    elif "sensors" in d:
        r.fail("$.sensors", "expected an object keyed by sensor id")

    expected = []
    for i, item in enumerate(r.lst(d, "expected", "$", default=[])):
        path = f"$.expected[{i}]"
        e = r.obj(item, path, ("t_from", "t_to", "status"))
        if e is None:
            continue
        t_from, t_to = r.int_(e, "t_from", path), r.int_(e, "t_to", path)
        try:
            status = Status(e.get("status"))
        except ValueError:
            r.fail(f"{path}.status", f"unknown status {e.get('status')!r}")
            continue
        if t_to < t_from:
            r.fail(path, f"t_to {t_to} precedes t_from {t_from}")
        if duration > 0 and t_to > duration:
            r.fail(f"{path}.t_to", f"window ends at {t_to} beyond duration_ms {duration}")
        expected.append(Expectation(t_from, t_to, status))

    if r.errors:
        raise ScenarioError(r.errors, source)
    return Scenario(
        name=name,
        duration_ms=duration,
        ego_timeline=tuple(timeline),
        ego_params=params,
        actors=tuple(actors),
        sensors=sensors,
        expected=tuple(expected),
        seed=seed,
        description=description,
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError([f"cannot read scenario file: {exc.strerror or exc}"], str(path)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"], str(path)) from None
    return scenario_from_dict(doc, str(path))


def scenario_to_dict(sc: Scenario) -> dict[str, Any]:
    """Inverse of scenario_from_dict."""
    out: dict[str, Any] = {
        "name": sc.name,
        "description": sc.description,
        "duration_ms": sc.duration_ms,
        "seed": sc.seed,
        "ego_params": dict(vars(sc.ego_params)),
        "ego_timeline": [dict(vars(s)) for s in sc.ego_timeline],
        "actors": [],
        "sensors": {},
        "expected": [{"t_from": e.t_from, "t_to": e.t_to, "status": e.status.value} for e in sc.expected],
    }
    for a in sc.actors:
        actor: dict[str, Any] = {
            "id": a.id,
            "class_label": a.class_label,
            "width_m": a.width_m,
            "height_m": a.height_m,
            "trajectory": [dict(vars(w)) for w in a.trajectory],
            "visible_to": sorted(s.value for s in a.visible_to),
        }
        if a.active_ms is not None:
            actor["active_ms"] = list(a.active_ms)
        if a.hidden_from:
            hidden: dict[str, list] = {}
            for src, t0, t1 in a.hidden_from:
                hidden.setdefault(src.value, []).append([t0, t1])
            actor["hidden_from"] = hidden
        out["actors"].append(actor)
    for src in sorted(sc.sensors, key=lambda s: s.value):
        m = sc.sensors[src]
        out["sensors"][src.value] = {
            "rate_hz": m.rate_hz,
            "latency_ms": m.latency_ms,
            "dropout_prob": m.dropout_prob,
            "position_noise_sigma_m": m.position_noise_sigma_m,
            "size_noise_sigma_m": m.size_noise_sigma_m,
            "confidence_range": list(m.confidence_range),
            "outages": [list(w) for w in m.outages],
        }
    return out

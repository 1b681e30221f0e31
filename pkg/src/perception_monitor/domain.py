"""Shared value types, configuration and the canonical JSON encoding.

All timestamps are integer milliseconds on one run clock. Positions are in the
vehicle frame: origin at the rear-axle center, x forward, y left, meters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Mapping

Timestamp = int
Point = tuple[float, float]


class DomainError(ValueError):
    """A value violates one of the domain invariants."""


class SensorSource(str, enum.Enum):
    CAMERA = "Camera"
    LIDAR = "Lidar"

    @property
    def label(self) -> str:
        return "CAI" if self is SensorSource.CAMERA else "LAI"

    @property
    def other(self) -> SensorSource:
        return SensorSource.LIDAR if self is SensorSource.CAMERA else SensorSource.CAMERA


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check_timestamp(name: str, value: Any) -> None:
    if not _is_int(value) or value < 0:
        raise DomainError(f"{name} must be a non-negative integer millisecond value, got {value!r}")


@dataclass(frozen=True)
class DetectedObject:
    """One perceived object with a 2.5D box (width, height, planar position)."""

    class_label: str
    width_m: float
    height_m: float
    position: Point
    confidence: float
    sensed_at: Timestamp
    source: SensorSource

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", SensorSource(self.source))
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        if not _finite(self.width_m, self.height_m) or self.width_m < 0 or self.height_m < 0:
            raise DomainError(f"box dimensions must be finite and >= 0, got {self.width_m}, {self.height_m}")
        if not _finite(*self.position):
            raise DomainError(f"position must be finite, got {self.position}")
        if not (0.0 <= self.confidence <= 1.0):
            raise DomainError(f"confidence must lie in [0, 1], got {self.confidence}")
        _check_timestamp("sensed_at", self.sensed_at)

    @property
    def x_m(self) -> float:
        return self.position[0]

    @property
    def y_m(self) -> float:
        return self.position[1]


@dataclass(frozen=True)
class ObjectListFrame:
    source: SensorSource
    frame_time: Timestamp
    objects: tuple[DetectedObject, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", SensorSource(self.source))
        object.__setattr__(self, "objects", tuple(self.objects))
        _check_timestamp("frame_time", self.frame_time)
        for i, obj in enumerate(self.objects):
            if obj.source is not self.source:
                raise DomainError(f"objects[{i}] comes from {obj.source.value}, frame is {self.source.value}")
            if obj.sensed_at > self.frame_time:
                raise DomainError(f"objects[{i}] sensed_at {obj.sensed_at} is after frame_time {self.frame_time}")


@dataclass(frozen=True)
class EgoState:
    speed_mps: float
    steering_angle_rad: float
    wheelbase_m: float
    body_length_m: float
    body_width_m: float
    max_decel_mps2: float
    reaction_time_s: float
    at: Timestamp = 0

    def __post_init__(self) -> None:
        problems = ego_problems(self)
        if problems:
            raise DomainError("; ".join(problems))


def ego_problems(ego: Any) -> list[str]:
    problems = []
    reals = ("speed_mps", "steering_angle_rad", "wheelbase_m", "body_length_m",
             "body_width_m", "max_decel_mps2", "reaction_time_s")
    for name in reals:
        value = getattr(ego, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            problems.append(f"{name} must be a finite number, got {value!r}")
    if problems:
        return problems
    if ego.speed_mps < 0:
        problems.append("speed_mps must be >= 0")
    for name in ("wheelbase_m", "body_length_m", "body_width_m", "max_decel_mps2"):
        if getattr(ego, name) <= 0:
            problems.append(f"{name} must be > 0")
    if ego.reaction_time_s < 0:
        problems.append("reaction_time_s must be >= 0")
    if not _is_int(ego.at) or ego.at < 0:
        problems.append("at must be a non-negative integer")
    return problems


@dataclass(frozen=True)
class ZoneSpec:
    """Longitudinal extent [near_m, far_m] and lateral half-extents of one zone."""

    near_m: float
    far_m: float
    left_m: float
    right_m: float

    def __post_init__(self) -> None:
        if not _finite(self.near_m, self.far_m, self.left_m, self.right_m):
            raise DomainError("zone extents must be finite")
        if not (0 <= self.near_m < self.far_m):
            raise DomainError(f"zone needs 0 <= near_m < far_m, got near={self.near_m}, far={self.far_m}")
        if self.left_m <= 0 or self.right_m <= 0:
            raise DomainError("zone left_m and right_m must be > 0")


DEFAULT_CLEAR_ZONE = ZoneSpec(near_m=0.0, far_m=0.06, left_m=0.025, right_m=0.025)
DEFAULT_FOCUS_ZONE = ZoneSpec(near_m=0.22, far_m=1.2, left_m=0.55, right_m=0.55)


@dataclass(frozen=True)
class ValidatorConfig:
    """Consistency thresholds. Not validated on construction; see validate_config."""

    stale_timeout_ms: int = 2000
    pair_max_dt_ms: int = 1000
    max_center_dist_m: float = 0.10
    max_width_diff_m: float = 0.5
    max_height_diff_m: float = 0.5
    min_confidence: float = 0.25
    require_class_equal: bool = True
    nodata_timeout_ms: int = 2000


def validate_config(cfg: ValidatorConfig) -> list[str]:
    """Return every violated invariant as a message naming the field; empty means valid."""
    errors: list[str] = []
    for name in ("stale_timeout_ms", "pair_max_dt_ms", "nodata_timeout_ms"):
        value = getattr(cfg, name)
        if not _is_int(value):
            errors.append(f"{name} must be an integer")
        elif value <= 0:
            errors.append(f"{name} must be > 0")
    for name in ("max_center_dist_m", "max_width_diff_m", "max_height_diff_m"):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            errors.append(f"{name} must be a finite number")
        elif value <= 0:
            errors.append(f"{name} must be > 0")
    conf = cfg.min_confidence
    if isinstance(conf, bool) or not isinstance(conf, (int, float)) or not (0.0 <= conf <= 1.0):
        errors.append("min_confidence must lie in [0, 1]")
    if not isinstance(cfg.require_class_equal, bool):
        errors.append("require_class_equal must be a boolean")
    if (_is_int(cfg.pair_max_dt_ms) and _is_int(cfg.stale_timeout_ms)
            and cfg.pair_max_dt_ms > cfg.stale_timeout_ms):
        errors.append("pair_max_dt_ms must be <= stale_timeout_ms")
    return errors


class ConfigError(DomainError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def require_valid(cfg: ValidatorConfig) -> ValidatorConfig:
    errors = validate_config(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


# --- canonical encoding -----------------------------------------------------
#
# JSON objects whose keys are exactly the dataclass field names. Tuples become
# lists, enums their string value, timestamps stay integers.


def encode(value: Any) -> Any:
    if isinstance(value, enum.Enum):
        return value.value
    if hasattr(value, "__dataclass_fields__"):
        return {f.name: encode(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    return value


def _take(data: Mapping[str, Any], cls: type, what: str) -> dict[str, Any]:
    if not isinstance(data, Mapping):
        raise DomainError(f"{what}: expected an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise DomainError(f"{what}: unknown field(s) {', '.join(unknown)}")
    return dict(data)


def _as_float(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _number(data: dict[str, Any], name: str, what: str) -> float:
    return _as_float(data.get(name), f"{what}.{name}")


def _integer(data: dict[str, Any], name: str, what: str) -> int:
    value = data.get(name)
    if not _is_int(value):
        raise DomainError(f"{what}.{name}: expected an integer, got {value!r}")
    return value


def _source(value: Any, what: str) -> SensorSource:
    try:
        return SensorSource(value)
    except ValueError:
        raise DomainError(f"{what}: unknown sensor source {value!r}") from None


def decode_object(data: Mapping[str, Any], what: str = "object") -> DetectedObject:
    d = _take(data, DetectedObject, what)
    pos = d.get("position")
    if not isinstance(pos, (list, tuple)) or len(pos) != 2:
        raise DomainError(f"{what}.position: expected [x_m, y_m]")
    label = d.get("class_label")
    if not isinstance(label, str):
        raise DomainError(f"{what}.class_label: expected a string")
    try:
        return DetectedObject(
            class_label=label,
            width_m=_number(d, "width_m", what),
            height_m=_number(d, "height_m", what),
            position=(_as_float(pos[0], f"{what}.position[0]"), _as_float(pos[1], f"{what}.position[1]")),
            confidence=_number(d, "confidence", what),
            sensed_at=_integer(d, "sensed_at", what),
            source=_source(d.get("source"), f"{what}.source"),
        )
    except DomainError as exc:
        if str(exc).startswith(what):
            raise
        raise DomainError(f"{what}: {exc}") from None


def decode_frame(data: Mapping[str, Any], what: str = "frame") -> ObjectListFrame:
    d = _take(data, ObjectListFrame, what)
    objects = d.get("objects", [])
    if not isinstance(objects, list):
        raise DomainError(f"{what}.objects: expected a list")
    decoded = tuple(decode_object(o, f"{what}.objects[{i}]") for i, o in enumerate(objects))
    try:
        return ObjectListFrame(
            source=_source(d.get("source"), f"{what}.source"),
            frame_time=_integer(d, "frame_time", what),
            objects=decoded,
        )
    except DomainError as exc:
        if str(exc).startswith(what):
            raise
        raise DomainError(f"{what}: {exc}") from None


def decode_ego(data: Mapping[str, Any], what: str = "ego") -> EgoState:
    d = _take(data, EgoState, what)
    kwargs: dict[str, Any] = {}
    for f in fields(EgoState):
        if f.name == "at":
            kwargs["at"] = _integer(d, "at", what) if "at" in d else 0
        else:
            kwargs[f.name] = _number(d, f.name, what)
    try:
        return EgoState(**kwargs)
    except DomainError as exc:
        raise DomainError(f"{what}: {exc}") from None


def decode_zone(data: Mapping[str, Any], what: str = "zone") -> ZoneSpec:
    d = _take(data, ZoneSpec, what)
    try:
        return ZoneSpec(**{f.name: _number(d, f.name, what) for f in fields(ZoneSpec)})
    except DomainError as exc:
        if str(exc).startswith(what):
            raise
        raise DomainError(f"{what}: {exc}") from None


def decode_config(data: Mapping[str, Any], what: str = "config") -> ValidatorConfig:
    """Decode a ValidatorConfig; missing fields take defaults. Invariants are not checked here."""
    d = _take(data, ValidatorConfig, what)
    return ValidatorConfig(**d)


def config_to_dict(cfg: ValidatorConfig) -> dict[str, Any]:
    return asdict(cfg)


@dataclass(frozen=True)
class RunSettings:
    """Everything besides the scenario that a monitor run needs."""

    validator: ValidatorConfig = field(default_factory=ValidatorConfig)
    clear_zone: ZoneSpec = DEFAULT_CLEAR_ZONE
    focus_zone: ZoneSpec = DEFAULT_FOCUS_ZONE
    k_inconsistent: int = 3
    nodata_ms: int = 1000
    monitor_rate_hz: float = 10.0
    buffer_capacity: int = 16
    focus_stations: int = 8


def decode_settings(data: Mapping[str, Any], what: str = "config") -> RunSettings:
    """Decode a run configuration file.

    Accepts either a bare ValidatorConfig object or an object with the optional
    sections ``validator``, ``clear_zone``, ``focus_zone``, ``mode_policy`` and
    the scalars ``monitor_rate_hz``, ``buffer_capacity``, ``focus_stations``.
    """
    if not isinstance(data, Mapping):
        raise DomainError(f"{what}: expected an object")
    validator_keys = {f.name for f in fields(ValidatorConfig)}
    if data and set(data) <= validator_keys:
        settings = RunSettings(validator=decode_config(data, what))
    else:
        known = {"validator", "clear_zone", "focus_zone", "mode_policy",
                 "monitor_rate_hz", "buffer_capacity", "focus_stations"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise DomainError(f"{what}: unknown field(s) {', '.join(unknown)}")
        kwargs: dict[str, Any] = {}
        if "validator" in data:
            kwargs["validator"] = decode_config(data["validator"], f"{what}.validator")
        if "clear_zone" in data:
            kwargs["clear_zone"] = decode_zone(data["clear_zone"], f"{what}.clear_zone")
        if "focus_zone" in data:
            kwargs["focus_zone"] = decode_zone(data["focus_zone"], f"{what}.focus_zone")
        policy = data.get("mode_policy", {})
        if not isinstance(policy, Mapping) or set(policy) - {"k_inconsistent", "nodata_ms"}:
            raise DomainError(f"{what}.mode_policy: expected {{k_inconsistent, nodata_ms}}")
        for key in ("k_inconsistent", "nodata_ms"):
            if key in policy:
                kwargs[key] = _integer(dict(policy), key, f"{what}.mode_policy")
        if "monitor_rate_hz" in data:
            kwargs["monitor_rate_hz"] = _number(dict(data), "monitor_rate_hz", what)
        for key in ("buffer_capacity", "focus_stations"):
            if key in data:
                kwargs[key] = _integer(dict(data), key, what)
        settings = RunSettings(**kwargs)
    problems = settings_problems(settings)
    if problems:
        raise ConfigError([f"{what}: {p}" for p in problems])
    return settings


def settings_problems(settings: RunSettings) -> list[str]:
    problems = validate_config(settings.validator)
    if settings.k_inconsistent <= 0:
        problems.append("mode_policy.k_inconsistent must be > 0")
    if settings.nodata_ms <= 0:
        problems.append("mode_policy.nodata_ms must be > 0")
    if not (settings.monitor_rate_hz > 0 and math.isfinite(settings.monitor_rate_hz)):
        problems.append("monitor_rate_hz must be > 0")
    if settings.buffer_capacity <= 0:
        problems.append("buffer_capacity must be > 0")
    if settings.focus_stations < 2:
        problems.append("focus_stations must be >= 2")
    return problems


def settings_to_dict(settings: RunSettings) -> dict[str, Any]:
    return {
        "validator": asdict(settings.validator),
        "clear_zone": asdict(settings.clear_zone),
        "focus_zone": asdict(settings.focus_zone),
        "mode_policy": {"k_inconsistent": settings.k_inconsistent, "nodata_ms": settings.nodata_ms},
        "monitor_rate_hz": settings.monitor_rate_hz,
        "buffer_capacity": settings.buffer_capacity,
        "focus_stations": settings.focus_stations,
    }

import json
import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from perception_monitor.domain import (
    DEFAULT_CLEAR_ZONE,
    DEFAULT_FOCUS_ZONE,
    ConfigError,
    DetectedObject,
    DomainError,
    EgoState,
    ObjectListFrame,
    RunSettings,
    SensorSource,
    ValidatorConfig,
    ZoneSpec,
    decode_config,
    decode_ego,
    decode_frame,
    decode_settings,
    encode,
    settings_to_dict,
    validate_config,
)

from conftest import CAM, LIDAR, frame, make_ego, obj


def test_default_config_is_valid():
    assert validate_config(ValidatorConfig()) == []


def test_defaults_match_documented_lab_values():
    cfg = ValidatorConfig()
    assert (cfg.stale_timeout_ms, cfg.pair_max_dt_ms, cfg.nodata_timeout_ms) == (2000, 1000, 2000)
    assert (cfg.max_center_dist_m, cfg.max_width_diff_m, cfg.max_height_diff_m) == (0.10, 0.5, 0.5)
    assert cfg.min_confidence == 0.25 and cfg.require_class_equal is True
    assert DEFAULT_CLEAR_ZONE == ZoneSpec(0.0, 0.06, 0.025, 0.025)
    assert DEFAULT_FOCUS_ZONE == ZoneSpec(0.22, 1.2, 0.55, 0.55)


def test_zero_center_distance_rejected():
    assert validate_config(ValidatorConfig(max_center_dist_m=0)) == ["max_center_dist_m must be > 0"]


def test_pair_gap_longer_than_stale_timeout_rejected():
    errors = validate_config(ValidatorConfig(pair_max_dt_ms=3000, stale_timeout_ms=2000))
    assert errors == ["pair_max_dt_ms must be <= stale_timeout_ms"]


def test_every_violation_is_reported():
    cfg = ValidatorConfig(stale_timeout_ms=0, pair_max_dt_ms=-1, max_width_diff_m=-1.0,
                          min_confidence=1.5, require_class_equal="yes", nodata_timeout_ms=1.5)
    errors = validate_config(cfg)
    for name in ("stale_timeout_ms", "pair_max_dt_ms", "max_width_diff_m", "min_confidence",
                 "require_class_equal", "nodata_timeout_ms"):
        assert any(e.startswith(name) for e in errors), name


@pytest.mark.parametrize("kwargs", [
    dict(width_m=-0.1), dict(height_m=math.inf), dict(confidence=1.01),
    dict(position=(math.nan, 0.0)), dict(sensed_at=-1),
])
def test_detected_object_invariants(kwargs):
    base = dict(class_label="person", width_m=0.1, height_m=0.2, position=(0.5, 0.0),
                confidence=0.5, sensed_at=10, source=CAM)
    base.update(kwargs)
    with pytest.raises(DomainError):
        DetectedObject(**base)


def test_detected_object_has_no_length():
    assert not hasattr(obj(), "length_m")


def test_frame_rejects_foreign_source_and_future_objects():
    with pytest.raises(DomainError, match="comes from Lidar"):
        frame(CAM, 100, obj(LIDAR))
    with pytest.raises(DomainError, match="after frame_time"):
        frame(CAM, 100, obj(CAM, t=150))
    assert frame(CAM, 100).objects == ()


@pytest.mark.parametrize("field,value", [
    ("speed_mps", -1.0), ("wheelbase_m", 0.0), ("body_length_m", -0.2), ("max_decel_mps2", 0.0),
    ("reaction_time_s", -0.1), ("steering_angle_rad", math.inf), ("speed_mps", math.nan),
])
def test_ego_invariants(field, value):
    with pytest.raises(DomainError, match=field):
        EgoState(**{**encode(make_ego()), field: value})


def test_zone_spec_ordering():
    with pytest.raises(DomainError):
        ZoneSpec(near_m=1.0, far_m=1.0, left_m=0.1, right_m=0.1)
    with pytest.raises(DomainError):
        ZoneSpec(near_m=0.0, far_m=1.0, left_m=0.0, right_m=0.1)


def test_sensor_sources():
    assert {s.value for s in SensorSource} == {"Camera", "Lidar"}
    assert CAM.other is LIDAR and LIDAR.other is CAM


# --- encoding -------------------------------------------------------------------

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
nonneg = st.floats(min_value=0, max_value=5, allow_nan=False)
stamps = st.integers(min_value=0, max_value=10**9)


@st.composite
def frames(draw):
    source = draw(st.sampled_from(list(SensorSource)))
    t = draw(stamps)
    objects = draw(st.lists(st.builds(
        DetectedObject,
        class_label=st.text(max_size=12),
        width_m=nonneg, height_m=nonneg,
        position=st.tuples(finite, finite),
        confidence=st.floats(0, 1),
        sensed_at=st.integers(0, t),
        source=st.just(source),
    ), max_size=5))
    return ObjectListFrame(source, t, tuple(objects))


egos = st.builds(
    EgoState,
    speed_mps=nonneg, steering_angle_rad=st.floats(-1.5, 1.5),
    wheelbase_m=st.floats(0.1, 4), body_length_m=st.floats(0.1, 6), body_width_m=st.floats(0.1, 3),
    max_decel_mps2=st.floats(0.1, 12), reaction_time_s=nonneg, at=stamps,
)

configs = st.builds(
    ValidatorConfig,
    stale_timeout_ms=st.integers(1000, 5000), pair_max_dt_ms=st.integers(1, 1000),
    max_center_dist_m=st.floats(0.01, 2), max_width_diff_m=st.floats(0.01, 2),
    max_height_diff_m=st.floats(0.01, 2), min_confidence=st.floats(0, 1),
    require_class_equal=st.booleans(), nodata_timeout_ms=st.integers(1, 5000),
)


def _via_text(value):
    return json.loads(json.dumps(encode(value)))


@given(frames())
def test_frame_round_trip(f):
    assert decode_frame(_via_text(f)) == f


@given(egos)
def test_ego_round_trip(e):
    assert decode_ego(_via_text(e)) == e


@given(configs)
def test_config_round_trip(cfg):
    assert validate_config(cfg) == []
    assert decode_config(_via_text(cfg)) == cfg


def test_settings_round_trip():
    s = RunSettings(validator=ValidatorConfig(max_center_dist_m=0.2), k_inconsistent=5, monitor_rate_hz=20.0)
    assert decode_settings(_via_text(settings_to_dict(s))) == s


def test_bare_validator_config_accepted_as_settings():
    assert decode_settings({"max_center_dist_m": 0.3}).validator.max_center_dist_m == 0.3


def test_settings_errors_name_fields():
    with pytest.raises(ConfigError, match="max_center_dist_m must be > 0"):
        decode_settings({"validator": {"max_center_dist_m": 0}})
    with pytest.raises(DomainError, match="unknown field"):
        decode_settings({"validatorr": {}})


def test_decode_errors_carry_location():
    bad = _via_text(frame(CAM, 100, obj(CAM)))
    bad["objects"][0]["confidence"] = "high"
    with pytest.raises(DomainError, match=r"frame\.objects\[0\]\.confidence"):
        decode_frame(bad)
    with pytest.raises(DomainError, match="unknown sensor source"):
        decode_frame({"source": "Radar", "frame_time": 0, "objects": []})
    with pytest.raises(DomainError, match="unknown field"):
        decode_ego({**encode(make_ego()), "accel_mps2": 1.0})


def test_timestamps_encoded_as_integers():
    doc = encode(frame(LIDAR, 250, obj(LIDAR, t=200)))
    assert doc["frame_time"] == 250 and isinstance(doc["objects"][0]["sensed_at"], int)
    assert doc["objects"][0]["position"] == [0.7, 0.0]


@given(st.lists(stamps, min_size=3, max_size=3))
def test_timestamp_order_total_and_transitive(ts):
    a, b, c = ts
    assert (a <= b) or (b <= a)
    if a <= b and b <= c:
        assert a <= c


def test_values_are_immutable():
    o = obj()
    with pytest.raises(Exception):
        o.confidence = 0.1
    assert replace(o, confidence=0.2).confidence == 0.2

from __future__ import annotations

import random

import pytest

from perception_monitor.domain import DetectedObject, EgoState, ObjectListFrame, SensorSource

CAM, LIDAR = SensorSource.CAMERA, SensorSource.LIDAR

_acceptance_results: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion, reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        _acceptance_results.append((marker.args[0], verdict, item.nodeid))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    # parametrized criteria pass only if every case passed
    merged: dict[str, str] = {}
    for label, verdict, _ in _acceptance_results:
        merged[label] = "FAIL" if "FAIL" in (verdict, merged.get(label)) else "PASS"
    for label in sorted(merged):
        terminalreporter.write_line(f"[{merged[label]}] {label}")


def make_ego(speed=0.0, steering=0.0, at=0, **kw) -> EgoState:
    params = dict(wheelbase_m=0.33, body_length_m=0.55, body_width_m=0.27, max_decel_mps2=2.0, reaction_time_s=0.5)
    params.update(kw)
    return EgoState(speed_mps=speed, steering_angle_rad=steering, at=at, **params)


def obj(source=CAM, label="person", x=0.7, y=0.0, w=0.1, h=0.25, conf=0.9, t=100) -> DetectedObject:
    return DetectedObject(class_label=label, width_m=w, height_m=h, position=(x, y),
                          confidence=conf, sensed_at=t, source=source)


def frame(source, t, *objects) -> ObjectListFrame:
    return ObjectListFrame(source=source, frame_time=t, objects=tuple(objects))


@pytest.fixture
def ego():
    return make_ego()


@pytest.fixture
def rng():
    return random.Random(1234)

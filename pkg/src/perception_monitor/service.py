"""Operations behind both the HTTP endpoints and the CLI."""

from __future__ import annotations

import time
from typing import Any, Optional

from .api.schemas import (
    ExpectationOutcome,
    ModeTransition,
    RoiRequest,
    RoiResponse,
    RunSummary,
    ValidateRequest,
    VerdictRecord,
)
from .domain import DomainError, RunSettings, SensorSource, decode_settings, require_valid
from .safe_zone import compute_roi
from .scenario_sim import Scenario, ScenarioError, bundled_scenarios, check_expectations, load_scenario, run, scenario_from_dict
from .sync_buffer import SensorBuffer, ingest
from .validator import Status, ValidationVerdict, evaluate, verdict_to_record

EXIT_CODES = {Status.CONSISTENT: 0, Status.INCONSISTENT: 1, Status.NO_DATA: 3}


def roi(req: RoiRequest) -> RoiResponse:
    region = compute_roi(req.ego, req.clear_zone, req.focus_zone, req.stations)
    return RoiResponse(
        computed_at=region.computed_at,
        clear=list(region.clear.vertices),
        focus=list(region.focus.vertices),
        focus_far_m=region.focus_far_m,
        focus_area_m2=region.focus.area,
    )


def validate_once(req: ValidateRequest) -> ValidationVerdict:
    """Evaluate a single camera/LiDAR frame pair at ``req.now``."""
    require_valid(req.config)
    if req.camera.source is not SensorSource.CAMERA:
        raise DomainError("camera frame must have source 'Camera'")
    if req.lidar.source is not SensorSource.LIDAR:
        raise DomainError("lidar frame must have source 'Lidar'")
    now = req.now
    if now is None:
        now = max(req.camera.frame_time, req.lidar.frame_time, req.ego.at)
    cam = ingest(SensorBuffer(SensorSource.CAMERA), req.camera)
    lidar = ingest(SensorBuffer(SensorSource.LIDAR), req.lidar)
    return evaluate(now, cam, lidar, req.ego, req.config, req.clear_zone, req.focus_zone)


def verdict_record(verdict: ValidationVerdict) -> VerdictRecord:
    return VerdictRecord(**verdict_to_record(verdict))


def resolve_scenario(doc: Optional[dict[str, Any]] = None, bundled: Optional[str] = None,
                     path: Optional[str] = None) -> Scenario:
    given = [x is not None for x in (doc, bundled, path)]
    if sum(given) != 1:
        raise ScenarioError(["give exactly one of an inline scenario, a bundled name or a path"])
    if doc is not None:
        return scenario_from_dict(doc, "<inline>")
    if bundled is not None:
        known = bundled_scenarios()
        if bundled not in known:
            raise ScenarioError([f"unknown bundled scenario {bundled!r}; known: {', '.join(known)}"])
        return load_scenario(known[bundled])
    return load_scenario(path)


def settings_from(doc: Optional[dict[str, Any]]) -> RunSettings:
    return RunSettings() if doc is None else decode_settings(doc)


def run_scenario(scenario: Scenario, settings: RunSettings, seed: Optional[int] = None,
                 include_log: bool = False) -> tuple[RunSummary, Any]:
    started = time.perf_counter()
    log = run(scenario, settings, seed)
    elapsed = time.perf_counter() - started
    results = check_expectations(log, scenario)
    counts = log.status_counts()
    summary = RunSummary(
        scenario=scenario.name,
        seed=scenario.seed if seed is None else seed,
        total=sum(counts.values()),
        counts=counts,
        transitions=[ModeTransition(**{k: m[k] for k in ("t_ms", "from", "mode", "cause")}) for m in log.modes()],
        expectations=[
            ExpectationOutcome(t_from=r.t_from, t_to=r.t_to, expected=r.expected.value, dominant=r.dominant,
                               matching=r.matching, observed=r.observed, passed=r.passed)
            for r in results
        ],
        passed=all(r.passed for r in results),
        log_sha256=log.digest(),
        wall_runtime_s=round(elapsed, 4),
        log=log.records if include_log else None,
    )
    return summary, log


def format_summary(summary: RunSummary) -> str:
    lines = [f"scenario {summary.scenario} (seed {summary.seed}): {summary.total} evaluations"]
    for status, n in summary.counts.items():
        share = n / summary.total if summary.total else 0.0
        lines.append(f"  {status:<13} {n:5d}  ({share:6.1%})")
    if summary.transitions:
        lines.append("mode transitions:")
        for tr in summary.transitions:
            cause = f" [{tr.cause}]" if tr.cause else ""
            lines.append(f"  t={tr.t_ms:>6} ms  {tr.from_mode} -> {tr.mode}{cause}")
    else:
        lines.append("mode transitions: none")
    if summary.expectations:
        lines.append("expectations:")
        for e in summary.expectations:
            mark = "PASS" if e.passed else "FAIL"
            lines.append(f"  {mark} [{e.t_from}, {e.t_to}] ms expect {e.expected}: "
                         f"{e.matching}/{e.observed} (dominant {e.dominant})")
    else:
        lines.append("expectations: none")
    lines.append(f"log sha256 {summary.log_sha256}  ({summary.wall_runtime_s:.3f} s)")
    return "\n".join(lines)

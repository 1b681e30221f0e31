"""Consistency check between the camera and LiDAR object lists inside the ROI."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .domain import (
    DEFAULT_CLEAR_ZONE,
    DEFAULT_FOCUS_ZONE,
    DetectedObject,
    EgoState,
    ObjectListFrame,
    SensorSource,
    Timestamp,
    ValidatorConfig,
    ZoneSpec,
    require_valid,
)
from .safe_zone import DEFAULT_STATIONS, RegionOfInterest, Zone, compute_roi, contains, roi_to_dict
from .sync_buffer import NoData, SensorBuffer, snapshot_pair


class Status(str, enum.Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    NO_DATA = "NoData"


class Reason(str, enum.Enum):
    CLASS_MISMATCH = "ClassMismatch"
    CENTER_DIST = "CenterDist"
    WIDTH_DIFF = "WidthDiff"
    HEIGHT_DIFF = "HeightDiff"
    TIMESTAMP_GAP = "TimestampGap"
    # ingestion gates, reported for dropped objects only
    CONFIDENCE = "Confidence"
    OUTSIDE_ROI = "OutsideRoi"


@dataclass(frozen=True)
class MatchReport:
    pairs: tuple[tuple[int, int], ...] = ()
    unmatched_camera: tuple[int, ...] = ()
    unmatched_lidar: tuple[int, ...] = ()
    reject_reasons: dict[tuple[int, int], Reason] = field(default_factory=dict)
    in_roi_camera: tuple[tuple[int, Zone], ...] = ()
    in_roi_lidar: tuple[tuple[int, Zone], ...] = ()
    dropped: tuple[tuple[SensorSource, int, Reason], ...] = ()


@dataclass(frozen=True)
class ValidationVerdict:
    status: Status
    at: Timestamp
    report: Optional[MatchReport] = None
    roi: Optional[RegionOfInterest] = None
    starved: tuple[SensorSource, ...] = ()

    @property
    def valid(self) -> bool:
        return self.status is Status.CONSISTENT


@dataclass(frozen=True)
class RoiFiltered:
    frame: ObjectListFrame
    indices: tuple[int, ...]
    zones: tuple[Zone, ...]
    dropped: tuple[tuple[int, Reason], ...]


def _filter(frame: ObjectListFrame, roi: RegionOfInterest, cfg: ValidatorConfig) -> RoiFiltered:
    kept, indices, zones, dropped = [], [], [], []
    for i, obj in enumerate(frame.objects):
        zone = contains(roi, obj.position)
        if zone is Zone.OUTSIDE:
            dropped.append((i, Reason.OUTSIDE_ROI))
        elif obj.confidence < cfg.min_confidence:
            dropped.append((i, Reason.CONFIDENCE))
        else:
            kept.append(obj)
            indices.append(i)
            zones.append(zone)
    return RoiFiltered(
        ObjectListFrame(frame.source, frame.frame_time, tuple(kept)),
        tuple(indices), tuple(zones), tuple(dropped),
    )


def filter_roi(frame: ObjectListFrame, roi: RegionOfInterest, cfg: ValidatorConfig) -> ObjectListFrame:
    """Keep, in order, the objects inside the ROI with sufficient confidence."""
    return _filter(frame, roi, cfg).frame


def pair_compatible(a: DetectedObject, b: DetectedObject, cfg: ValidatorConfig) -> Optional[Reason]:
    """None when the pair matches, otherwise the first failed criterion.

    Criteria run in a fixed order: class, center distance, width, height, timestamp.
    """
    if cfg.require_class_equal and a.class_label != b.class_label:
        return Reason.CLASS_MISMATCH
    if math.hypot(a.x_m - b.x_m, a.y_m - b.y_m) > cfg.max_center_dist_m:
        return Reason.CENTER_DIST
    if abs(a.width_m - b.width_m) > cfg.max_width_diff_m:
        return Reason.WIDTH_DIFF
    if abs(a.height_m - b.height_m) > cfg.max_height_diff_m:
        return Reason.HEIGHT_DIFF
    if abs(a.sensed_at - b.sensed_at) > cfg.pair_max_dt_ms:
        return Reason.TIMESTAMP_GAP
    return None


def maximum_matching(adjacency: Sequence[Sequence[int]], n_right: int) -> list[tuple[int, int]]:
    """Maximum bipartite matching by augmenting paths (Kuhn).

    ``adjacency[i]`` lists the right vertices compatible with left vertex i.
    Left vertices are processed in ascending order and neighbours are tried in
    the order given, so the result is deterministic.
    """
    match_right: list[int] = [-1] * n_right

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adjacency[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_right[j] == -1 or augment(match_right[j], seen):
                match_right[j] = i
                return True
        return False

    for i in range(len(adjacency)):
        augment(i, [False] * n_right)
    return sorted((i, j) for j, i in enumerate(match_right) if i != -1)


def _decide(cam: RoiFiltered, lidar: RoiFiltered, roi: RegionOfInterest,
            cfg: ValidatorConfig, at: Timestamp) -> ValidationVerdict:
    cams, lids = cam.frame.objects, lidar.frame.objects
    reasons: dict[tuple[int, int], Reason] = {}
    adjacency: list[list[int]] = []
    for i, a in enumerate(cams):
        row = []
        for j, b in enumerate(lids):
            reason = pair_compatible(a, b, cfg)
            if reason is None:
                row.append(j)
            else:
                reasons[(cam.indices[i], lidar.indices[j])] = reason
        adjacency.append(row)

    matching = maximum_matching(adjacency, len(lids))
    matched_c = {i for i, _ in matching}
    matched_l = {j for _, j in matching}
    report = MatchReport(
        pairs=tuple((cam.indices[i], lidar.indices[j]) for i, j in matching),
        unmatched_camera=tuple(cam.indices[i] for i in range(len(cams)) if i not in matched_c),
        unmatched_lidar=tuple(lidar.indices[j] for j in range(len(lids)) if j not in matched_l),
        reject_reasons=reasons,
        in_roi_camera=tuple(zip(cam.indices, cam.zones)),
        in_roi_lidar=tuple(zip(lidar.indices, lidar.zones)),
        dropped=tuple((cam.frame.source, i, r) for i, r in cam.dropped)
        + tuple((lidar.frame.source, i, r) for i, r in lidar.dropped),
    )
    # both lists empty falls out naturally: an empty matching is perfect
    consistent = not report.unmatched_camera and not report.unmatched_lidar
    status = Status.CONSISTENT if consistent else Status.INCONSISTENT
    return ValidationVerdict(status=status, at=at, report=report, roi=roi)


def decide(cam_frame: ObjectListFrame, lidar_frame: ObjectListFrame, roi: RegionOfInterest,
           cfg: ValidatorConfig, at: Optional[Timestamp] = None) -> ValidationVerdict:
    """Consistent iff the in-ROI objects of both lists admit a perfect one-to-one matching."""
    when = roi.computed_at if at is None else at
    return _decide(_filter(cam_frame, roi, cfg), _filter(lidar_frame, roi, cfg), roi, cfg, when)


def evaluate(
    now: Timestamp,
    cam_buf: SensorBuffer,
    lidar_buf: SensorBuffer,
    ego: EgoState,
    cfg: ValidatorConfig,
    clear_zone: ZoneSpec = DEFAULT_CLEAR_ZONE,
    focus_zone: ZoneSpec = DEFAULT_FOCUS_ZONE,
    stations: int = DEFAULT_STATIONS,
) -> ValidationVerdict:
    require_valid(cfg)
    snap = snapshot_pair(cam_buf, lidar_buf, now, cfg)
    if isinstance(snap, NoData):
        return ValidationVerdict(status=Status.NO_DATA, at=now, starved=snap.starved)
    roi = compute_roi(ego, clear_zone, focus_zone, stations)
    return decide(snap.camera, snap.lidar, roi, cfg, at=now)


def verdict_to_record(verdict: ValidationVerdict) -> dict[str, Any]:
    """Flat JSON-ready record for the verdict log."""
    record: dict[str, Any] = {
        "kind": "verdict",
        "t_ms": verdict.at,
        "status": verdict.status.value,
    }
    if verdict.status is Status.NO_DATA:
        record["starved"] = [s.value for s in verdict.starved]
        record["reasons"] = ["NoData:" + s.value for s in verdict.starved]
        return record
    rep = verdict.report
    assert rep is not None and verdict.roi is not None
    reasons = sorted({r.value for r in rep.reject_reasons.values()})
    if rep.unmatched_camera:
        reasons.append("UnmatchedCamera")
    if rep.unmatched_lidar:
        reasons.append("UnmatchedLidar")
    record.update(
        reasons=reasons,
        pairs=[list(p) for p in rep.pairs],
        unmatched_camera=list(rep.unmatched_camera),
        unmatched_lidar=list(rep.unmatched_lidar),
        reject_reasons=[[i, j, r.value] for (i, j), r in sorted(rep.reject_reasons.items())],
        in_roi_camera=[[i, z.value] for i, z in rep.in_roi_camera],
        in_roi_lidar=[[i, z.value] for i, z in rep.in_roi_lidar],
        dropped=[[s.value, i, r.value] for s, i, r in rep.dropped],
        roi=roi_to_dict(verdict.roi),
    )
    return record

"""Per-sensor frame buffers and the pair selection that bridges camera/LiDAR rate mismatch."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Union

from .domain import (
    DomainError,
    ObjectListFrame,
    SensorSource,
    Timestamp,
    ValidatorConfig,
    encode,
)

DEFAULT_CAPACITY = 16


class SourceMismatch(DomainError):
    pass


def _order_key(frame: ObjectListFrame) -> tuple[int, str]:
    # frames sharing a frame_time are ordered by content so ingestion order never matters
    return frame.frame_time, json.dumps(encode(frame), sort_keys=True)


@dataclass(frozen=True)
class SensorBuffer:
    source: SensorSource
    capacity: int = DEFAULT_CAPACITY
    frames: tuple[ObjectListFrame, ...] = ()

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise DomainError("buffer capacity must be > 0")

    def ingest(self, frame: ObjectListFrame) -> SensorBuffer:
        return ingest(self, frame)

    def prune_stale(self, now: Timestamp, stale_timeout_ms: int) -> SensorBuffer:
        return prune_stale(self, now, stale_timeout_ms)

    @property
    def frame_times(self) -> list[int]:
        return [f.frame_time for f in self.frames]


def ingest(buf: SensorBuffer, frame: ObjectListFrame) -> SensorBuffer:
    """Insert in time order; the oldest frame is evicted once over capacity."""
    if frame.source is not buf.source:
        raise SourceMismatch(f"{frame.source.value} frame offered to the {buf.source.value} buffer")
    frames = sorted(buf.frames + (frame,), key=_order_key)
    return replace(buf, frames=tuple(frames[-buf.capacity:]))


def _fresh_objects(frame: ObjectListFrame, now: Timestamp, stale_timeout_ms: int) -> ObjectListFrame:
    kept = tuple(o for o in frame.objects if now - o.sensed_at <= stale_timeout_ms)
    if len(kept) == len(frame.objects):
        return frame
    return replace(frame, objects=kept)


def prune_stale(buf: SensorBuffer, now: Timestamp, stale_timeout_ms: int) -> SensorBuffer:
    """Drop objects older than the timeout (strictly), then frames that this emptied.

    Frames that arrived empty are kept: an empty detection list is still data.
    """
    frames = []
    for frame in buf.frames:
        pruned = _fresh_objects(frame, now, stale_timeout_ms)
        if frame.objects and not pruned.objects:
            continue
        frames.append(pruned)
    return replace(buf, frames=tuple(frames))


@dataclass(frozen=True)
class Pair:
    camera: ObjectListFrame
    lidar: ObjectListFrame


@dataclass(frozen=True)
class NoData:
    starved: tuple[SensorSource, ...]


def latest_fresh_frame(buf: SensorBuffer, now: Timestamp, cfg: ValidatorConfig) -> ObjectListFrame | None:
    """Newest frame with frame_time in [now - nodata_timeout, now], objects staleness-pruned."""
    for frame in reversed(buf.frames):
        if frame.frame_time > now:
            continue
        if now - frame.frame_time > cfg.nodata_timeout_ms:
            return None
        return _fresh_objects(frame, now, cfg.stale_timeout_ms)
    return None


def snapshot_pair(
    cam: SensorBuffer, lidar: SensorBuffer, now: Timestamp, cfg: ValidatorConfig
) -> Union[Pair, NoData]:
    if cam.source is not SensorSource.CAMERA or lidar.source is not SensorSource.LIDAR:
        raise SourceMismatch("snapshot_pair expects (camera buffer, lidar buffer)")
    cam_frame = latest_fresh_frame(cam, now, cfg)
    lidar_frame = latest_fresh_frame(lidar, now, cfg)
    starved = tuple(
        src for src, frame in ((SensorSource.CAMERA, cam_frame), (SensorSource.LIDAR, lidar_frame))
        if frame is None
    )
    if starved:
        return NoData(starved)
    return Pair(cam_frame, lidar_frame)

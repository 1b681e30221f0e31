"""The function monitor as a bus participant: buffers sensor frames, tracks the
latest ego state, evaluates on demand and drives mode control.
"""

from __future__ import annotations

from typing import Optional

from . import bus as topics
from .bus import MessageBus
from .domain import DomainError, EgoState, ObjectListFrame, RunSettings, SensorSource, Timestamp, require_valid
from .mode_control import AdsMode, ModePolicy, step
from .sync_buffer import SensorBuffer, ingest
from .validator import ValidationVerdict, evaluate


class MonitorError(DomainError):
    pass


class FunctionMonitor:
    """Single-writer; callers sharing an instance across threads must serialize access."""

    def __init__(self, settings: RunSettings = RunSettings(), bus: Optional[MessageBus] = None):
        require_valid(settings.validator)
        self.settings = settings
        self.policy = ModePolicy(settings.k_inconsistent, settings.nodata_ms)
        self.buffers = {
            SensorSource.CAMERA: SensorBuffer(SensorSource.CAMERA, settings.buffer_capacity),
            SensorSource.LIDAR: SensorBuffer(SensorSource.LIDAR, settings.buffer_capacity),
        }
        self.ego: Optional[EgoState] = None
        self.mode = AdsMode()
        self.bus = bus
        if bus is not None:
            bus.subscribe(topics.CAMERA_OBJECTS, self.on_frame)
            bus.subscribe(topics.LIDAR_OBJECTS, self.on_frame)
            bus.subscribe(topics.EGO_STATE, self.on_ego)

    def on_frame(self, frame: ObjectListFrame, at: Timestamp = 0) -> None:
        self.buffers[frame.source] = ingest(self.buffers[frame.source], frame)

    def on_ego(self, ego: EgoState, at: Timestamp = 0) -> None:
        self.ego = ego

    def evaluate(self, now: Timestamp) -> ValidationVerdict:
        if self.ego is None:
            raise MonitorError("no ego state received yet; the ROI cannot be computed")
        s = self.settings
        verdict = evaluate(
            now,
            self.buffers[SensorSource.CAMERA],
            self.buffers[SensorSource.LIDAR],
            self.ego,
            s.validator,
            s.clear_zone,
            s.focus_zone,
            s.focus_stations,
        )
        previous = self.mode.mode
        self.mode = step(self.mode, verdict, self.policy)
        if self.bus is not None:
            self.bus.publish(topics.MONITOR_VERDICT, verdict, now)
            if self.mode.mode is not previous:
                self.bus.publish(topics.MONITOR_MODE, self.mode, now)
        return verdict

"""Request/response models shared by the HTTP service and the CLI.

Domain dataclasses are used directly as field types, so the wire format is the
canonical encoding: field names as in the domain types, timestamps in integer
milliseconds, positions as ``[x_m, y_m]``.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field

from ..domain import (
    DEFAULT_CLEAR_ZONE,
    DEFAULT_FOCUS_ZONE,
    EgoState,
    ObjectListFrame,
    ValidatorConfig,
    ZoneSpec,
)


class RoiRequest(BaseModel):
    ego: EgoState
    clear_zone: ZoneSpec = DEFAULT_CLEAR_ZONE
    focus_zone: ZoneSpec = DEFAULT_FOCUS_ZONE
    stations: int = Field(8, ge=2)


class RoiResponse(BaseModel):
    computed_at: int
    clear: list[tuple[float, float]]
    focus: list[tuple[float, float]]
    focus_far_m: float
    focus_area_m2: float


class ValidateRequest(BaseModel):
    camera: ObjectListFrame
    lidar: ObjectListFrame
    ego: EgoState
    config: ValidatorConfig = ValidatorConfig()
    clear_zone: ZoneSpec = DEFAULT_CLEAR_ZONE
    focus_zone: ZoneSpec = DEFAULT_FOCUS_ZONE
    now: Optional[int] = Field(None, ge=0, description="evaluation time; defaults to the newest input timestamp")


class VerdictRecord(BaseModel):
    """One line of the verdict log."""

    kind: str = "verdict"
    t_ms: int
    status: str
    reasons: list[str] = []
    starved: Optional[list[str]] = None
    pairs: Optional[list[tuple[int, int]]] = None
    unmatched_camera: Optional[list[int]] = None
    unmatched_lidar: Optional[list[int]] = None
    reject_reasons: Optional[list[tuple[int, int, str]]] = None
    in_roi_camera: Optional[list[tuple[int, str]]] = None
    in_roi_lidar: Optional[list[tuple[int, str]]] = None
    dropped: Optional[list[tuple[str, int, str]]] = None
    roi: Optional[dict[str, Any]] = None


class RunRequest(BaseModel):
    scenario: Optional[dict[str, Any]] = Field(None, description="inline scenario document")
    bundled: Optional[str] = Field(None, description="name of a scenario shipped with the package")
    config: Optional[dict[str, Any]] = None
    seed: Optional[int] = None
    include_log: bool = False


class ModeTransition(BaseModel):
    t_ms: int
    from_mode: str = Field(alias="from")
    mode: str
    cause: Optional[str] = None

    model_config = {"populate_by_name": True}


class ExpectationOutcome(BaseModel):
    t_from: int
    t_to: int
    expected: str
    dominant: Optional[str]
    matching: int
    observed: int
    passed: bool


class RunSummary(BaseModel):
    scenario: str
    seed: int
    total: int
    counts: dict[str, int]
    transitions: list[ModeTransition]
    expectations: list[ExpectationOutcome]
    passed: bool
    log_sha256: str
    wall_runtime_s: float
    log: Optional[list[dict[str, Any]]] = None


class MonitorCreate(BaseModel):
    config: Optional[dict[str, Any]] = None


class MonitorInfo(BaseModel):
    id: str
    mode: str
    mode_since: int
    cause: Optional[str] = None
    buffered: dict[str, int]
    has_ego: bool


class EvaluateRequest(BaseModel):
    now: int = Field(ge=0)


class EvaluateResponse(BaseModel):
    verdict: VerdictRecord
    mode: str
    mode_since: int

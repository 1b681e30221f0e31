"""Runtime consistency monitor for redundant camera/LiDAR perception."""

from .domain import (
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
    validate_config,
)
from .mode_control import AdsMode, Mode, ModePolicy, step
from .monitor import FunctionMonitor
from .safe_zone import RegionOfInterest, Zone, ZonePolygon, compute_roi, contains
from .sync_buffer import NoData, Pair, SensorBuffer, ingest, prune_stale, snapshot_pair
from .validator import (
    MatchReport,
    Reason,
    Status,
    ValidationVerdict,
    decide,
    evaluate,
    filter_roi,
    pair_compatible,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CLEAR_ZONE", "DEFAULT_FOCUS_ZONE", "AdsMode", "ConfigError", "DetectedObject", "DomainError",
    "EgoState", "FunctionMonitor", "MatchReport", "Mode", "ModePolicy", "NoData", "ObjectListFrame", "Pair",
    "Reason", "RegionOfInterest", "RunSettings", "SensorBuffer", "SensorSource", "Status", "ValidationVerdict",
    "ValidatorConfig", "Zone", "ZonePolygon", "ZoneSpec", "compute_roi", "contains", "decide", "evaluate",
    "filter_roi", "ingest", "pair_compatible", "prune_stale", "snapshot_pair", "step", "validate_config",
]

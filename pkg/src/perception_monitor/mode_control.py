"""Debounced mapping from the verdict stream to a fail-operational mode request."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .domain import DomainError, Timestamp
from .validator import Status, ValidationVerdict


class Mode(str, enum.Enum):
    NOMINAL = "Nominal"
    DEGRADED = "Degraded"
    SAFE_STOP_REQUESTED = "SafeStopRequested"


class OutOfOrderVerdict(DomainError):
    pass


@dataclass(frozen=True)
class ModePolicy:
    k_inconsistent: int = 3
    nodata_ms: int = 1000

    def __post_init__(self) -> None:
        if self.k_inconsistent <= 0 or self.nodata_ms <= 0:
            raise DomainError("k_inconsistent and nodata_ms must be > 0")


@dataclass(frozen=True)
class AdsMode:
    mode: Mode = Mode.NOMINAL
    since: Timestamp = 0
    cause: Optional[str] = None
    # debounce bookkeeping
    inconsistent_streak: int = 0
    nodata_since: Optional[Timestamp] = None
    last_at: Optional[Timestamp] = None


def _enter(state: AdsMode, mode: Mode, at: Timestamp, cause: Optional[str]) -> AdsMode:
    return replace(state, mode=mode, since=at, cause=cause)


def step(state: AdsMode, verdict: ValidationVerdict, policy: ModePolicy = ModePolicy()) -> AdsMode:
    at = verdict.at
    if state.last_at is not None and at < state.last_at:
        raise OutOfOrderVerdict(f"verdict at {at} ms arrived after one at {state.last_at} ms")
    state = replace(state, last_at=at)

    if verdict.status is Status.CONSISTENT:
        state = replace(state, inconsistent_streak=0, nodata_since=None)
        if state.mode is Mode.DEGRADED:
            state = _enter(state, Mode.NOMINAL, at, None)
        return state

    if verdict.status is Status.INCONSISTENT:
        state = replace(state, inconsistent_streak=state.inconsistent_streak + 1, nodata_since=None)
        if state.mode is Mode.NOMINAL and state.inconsistent_streak >= policy.k_inconsistent:
            state = _enter(state, Mode.DEGRADED, at, Status.INCONSISTENT.value)
        return state

    nodata_since = at if state.nodata_since is None else state.nodata_since
    state = replace(state, inconsistent_streak=0, nodata_since=nodata_since)
    if state.mode is not Mode.SAFE_STOP_REQUESTED and at - nodata_since >= policy.nodata_ms:
        state = _enter(state, Mode.SAFE_STOP_REQUESTED, at, Status.NO_DATA.value)
    return state


def reset(at: Timestamp) -> AdsMode:
    """Explicit external reset; the only way out of SafeStopRequested."""
    return AdsMode(mode=Mode.NOMINAL, since=at, last_at=at)


def replay(verdicts: Iterable[ValidationVerdict], policy: ModePolicy = ModePolicy(),
           initial: AdsMode = AdsMode()) -> tuple[AdsMode, list[Mode]]:
    """Run a verdict stream; return the final state and the sequence of modes visited."""
    state = initial
    visited = [state.mode]
    for verdict in verdicts:
        state = step(state, verdict, policy)
        if state.mode is not visited[-1]:
            visited.append(state.mode)
    return state, visited

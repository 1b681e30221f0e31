"""HTTP front end for the monitor.

Stateless endpoints (ROI, one-shot validation, scenario runs) plus stateful
monitor sessions that accept streamed frames and ego states.
"""

from __future__ import annotations

import threading
import uuid

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__, service
from ..domain import DomainError, EgoState, ObjectListFrame
from ..monitor import FunctionMonitor
from ..scenario_sim import bundled_scenarios
from .schemas import (
    EvaluateRequest,
    EvaluateResponse,
    MonitorCreate,
    MonitorInfo,
    RoiRequest,
    RoiResponse,
    RunRequest,
    RunSummary,
    ValidateRequest,
    VerdictRecord,
)

app = FastAPI(title="perception-monitor", version=__version__)


class _Session:
    def __init__(self, monitor: FunctionMonitor):
        self.monitor = monitor
        self.lock = threading.Lock()


_sessions: dict[str, _Session] = {}
_sessions_lock = threading.Lock()


@app.exception_handler(DomainError)
def _domain_error(request: Request, exc: DomainError) -> JSONResponse:
    errors = getattr(exc, "errors", None) or [str(exc)]
    return JSONResponse(status_code=422, content={"detail": errors})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/roi", response_model=RoiResponse)
def roi(req: RoiRequest) -> RoiResponse:
    return service.roi(req)


@app.post("/validate", response_model=VerdictRecord, response_model_exclude_none=True)
def validate(req: ValidateRequest) -> VerdictRecord:
    return service.verdict_record(service.validate_once(req))


@app.get("/scenarios")
def scenarios() -> list[str]:
    return list(bundled_scenarios())


@app.post("/scenarios/run", response_model=RunSummary, response_model_exclude_none=True)
def run_scenario(req: RunRequest) -> RunSummary:
    scenario = service.resolve_scenario(doc=req.scenario, bundled=req.bundled)
    settings = service.settings_from(req.config)
    summary, _ = service.run_scenario(scenario, settings, req.seed, include_log=req.include_log)
    return summary


def _session(monitor_id: str) -> _Session:
    with _sessions_lock:
        session = _sessions.get(monitor_id)
    if session is None:
        raise HTTPException(status_code=404, detail=f"no monitor {monitor_id!r}")
    return session


def _info(monitor_id: str, monitor: FunctionMonitor) -> MonitorInfo:
    return MonitorInfo(
        id=monitor_id,
        mode=monitor.mode.mode.value,
        mode_since=monitor.mode.since,
        cause=monitor.mode.cause,
        buffered={src.value: len(buf.frames) for src, buf in monitor.buffers.items()},
        has_ego=monitor.ego is not None,
    )


@app.post("/monitors", response_model=MonitorInfo, status_code=201)
def create_monitor(req: MonitorCreate) -> MonitorInfo:
    monitor = FunctionMonitor(service.settings_from(req.config))
    monitor_id = uuid.uuid4().hex[:12]
    with _sessions_lock:
        _sessions[monitor_id] = _Session(monitor)
    return _info(monitor_id, monitor)


@app.get("/monitors/{monitor_id}", response_model=MonitorInfo)
def get_monitor(monitor_id: str) -> MonitorInfo:
    session = _session(monitor_id)
    with session.lock:
        return _info(monitor_id, session.monitor)


@app.delete("/monitors/{monitor_id}", status_code=204)
def delete_monitor(monitor_id: str) -> None:
    with _sessions_lock:
        if _sessions.pop(monitor_id, None) is None:
            raise HTTPException(status_code=404, detail=f"no monitor {monitor_id!r}")


@app.post("/monitors/{monitor_id}/frames", response_model=MonitorInfo)
def push_frame(monitor_id: str, frame: ObjectListFrame) -> MonitorInfo:
    session = _session(monitor_id)
    with session.lock:
        session.monitor.on_frame(frame)
        return _info(monitor_id, session.monitor)


@app.post("/monitors/{monitor_id}/ego", response_model=MonitorInfo)
def push_ego(monitor_id: str, ego: EgoState) -> MonitorInfo:
    session = _session(monitor_id)
    with session.lock:
        session.monitor.on_ego(ego)
        return _info(monitor_id, session.monitor)


@app.post("/monitors/{monitor_id}/evaluate", response_model=EvaluateResponse, response_model_exclude_none=True)
def evaluate(monitor_id: str, req: EvaluateRequest) -> EvaluateResponse:
    session = _session(monitor_id)
    with session.lock:
        try:
            verdict = session.monitor.evaluate(req.now)
        except DomainError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        state = session.monitor.mode
    return EvaluateResponse(verdict=service.verdict_record(verdict), mode=state.mode.value, mode_since=state.since)

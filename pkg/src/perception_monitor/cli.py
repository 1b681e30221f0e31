"""Command-line front end.

Every subcommand reads JSON files, builds the same request model the HTTP
service accepts, and either handles it in-process or, with ``--server URL``,
posts it to a running service.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import httpx

from . import service
from .api.schemas import RoiRequest, RoiResponse, RunRequest, RunSummary, ValidateRequest, VerdictRecord
from .domain import (
    DEFAULT_CLEAR_ZONE,
    DEFAULT_FOCUS_ZONE,
    DomainError,
    decode_ego,
    decode_frame,
    decode_settings,
    decode_zone,
)
from .scenario_sim import VerdictLog, bundled_scenarios, check_expectations
from .validator import Status

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NODATA = 0, 1, 2, 3

# swapped out in tests to route --server calls through an in-process client
http_client: Callable[[str], httpx.Client] = lambda base_url: httpx.Client(base_url=base_url, timeout=60.0)


class InputError(Exception):
    pass


def _read_json(path: str, what: str) -> Any:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} file not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path} is not valid JSON: line {exc.lineno}: {exc.msg}") from None


def _post(server: str, route: str, payload: dict[str, Any]) -> Any:
    with http_client(server) as client:
        try:
            resp = client.post(route, json=payload)
        except httpx.HTTPError as exc:
            raise InputError(f"cannot reach {server}: {exc}") from None
    if resp.status_code == 422:
        raise InputError(f"server rejected the input: {json.dumps(resp.json().get('detail'))}")
    resp.raise_for_status()
    return resp.json()


def _emit(data: Any) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _zones(doc: Any, path: str) -> dict[str, Any]:
    if not isinstance(doc, dict):
        raise InputError(f"zones file {path}: expected an object")
    zones = {"clear_zone": DEFAULT_CLEAR_ZONE, "focus_zone": DEFAULT_FOCUS_ZONE}
    for key in doc:
        target = {"clear": "clear_zone", "clear_zone": "clear_zone",
                  "focus": "focus_zone", "focus_zone": "focus_zone"}.get(key)
        if target is None:
            raise InputError(f"zones file {path}: unknown key {key!r} (expected clear, focus)")
        zones[target] = decode_zone(doc[key], f"{path}:{key}")
    return zones


def cmd_run(args: argparse.Namespace) -> int:
    config_doc = _read_json(args.config, "config") if args.config else None
    if args.server:
        scenario_doc = _read_json(args.scenario, "scenario") if args.scenario else None
        req = RunRequest(scenario=scenario_doc, bundled=args.bundled, config=config_doc,
                         seed=args.seed, include_log=bool(args.out))
        summary = RunSummary.model_validate(_post(args.server, "/scenarios/run", req.model_dump(exclude_none=True)))
        if args.out:
            VerdictLog(summary.log or []).write(args.out)
    else:
        scenario = service.resolve_scenario(path=args.scenario, bundled=args.bundled)
        summary, log = service.run_scenario(scenario, service.settings_from(config_doc), args.seed)
        if args.out:
            log.write(args.out)

    if args.json:
        _emit(summary.model_dump(by_alias=True, exclude_none=True, exclude={"log"}))
    else:
        print(service.format_summary(summary))
        if args.out:
            print(f"verdict log written to {args.out}")
    return EXIT_OK if summary.passed else EXIT_FAIL


def cmd_validate(args: argparse.Namespace) -> int:
    camera_doc = _read_json(args.camera, "camera frame")
    lidar_doc = _read_json(args.lidar, "lidar frame")
    ego_doc = _read_json(args.ego, "ego state")
    config_doc = _read_json(args.config, "config") if args.config else None

    if args.server:
        payload: dict[str, Any] = {"camera": camera_doc, "lidar": lidar_doc, "ego": ego_doc}
        if config_doc is not None:
            settings = decode_settings(config_doc, args.config)
            payload["config"] = vars(settings.validator)
            payload["clear_zone"] = vars(settings.clear_zone)
            payload["focus_zone"] = vars(settings.focus_zone)
        if args.now is not None:
            payload["now"] = args.now
        record = VerdictRecord.model_validate(_post(args.server, "/validate", payload))
    else:
        settings = service.settings_from(config_doc)
        req = ValidateRequest(
            camera=decode_frame(camera_doc, args.camera),
            lidar=decode_frame(lidar_doc, args.lidar),
            ego=decode_ego(ego_doc, args.ego),
            config=settings.validator,
            clear_zone=settings.clear_zone,
            focus_zone=settings.focus_zone,
            now=args.now,
        )
        record = service.verdict_record(service.validate_once(req))
    _emit(record.model_dump(exclude_none=True))
    return {Status.CONSISTENT: EXIT_OK, Status.INCONSISTENT: EXIT_FAIL, Status.NO_DATA: EXIT_NODATA}[Status(record.status)]


def cmd_roi(args: argparse.Namespace) -> int:
    ego_doc = _read_json(args.ego, "ego state")
    zones = _zones(_read_json(args.zones, "zones"), args.zones) if args.zones else {
        "clear_zone": DEFAULT_CLEAR_ZONE, "focus_zone": DEFAULT_FOCUS_ZONE}
    req = RoiRequest(ego=decode_ego(ego_doc, args.ego), stations=args.stations, **zones)
    if args.server:
        resp = RoiResponse.model_validate(_post(args.server, "/roi", req.model_dump(mode="json")))
    else:
        resp = service.roi(req)
    _emit(resp.model_dump(mode="json"))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    scenario = service.resolve_scenario(path=args.scenario)
    if not Path(args.log).is_file():
        raise InputError(f"log file not found: {args.log}")
    try:
        log = VerdictLog.read(args.log)
    except json.JSONDecodeError as exc:
        raise InputError(f"log file {args.log} has a malformed line: {exc.msg}") from None
    results = check_expectations(log, scenario)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} [{r.t_from}, {r.t_to}] ms expect {r.expected.value}: "
              f"{r.matching}/{r.observed} (dominant {r.dominant})")
    if not results:
        print("no expectations: vacuous pass")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_scenarios(args: argparse.Namespace) -> int:
    for name, path in bundled_scenarios().items():
        print(f"{name}\t{path}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("perception_monitor.api.app:app", host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perception-monitor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def server_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--server", metavar="URL", help="send the request to a running service instead")

    p = sub.add_parser("run", help="simulate a scenario and check its expectations")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", metavar="PATH")
    src.add_argument("--bundled", metavar="NAME", help="a scenario shipped with the package (see `scenarios`)")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", metavar="PATH", help="write the verdict log (JSON lines)")
    p.add_argument("--json", action="store_true", help="print the summary as JSON")
    server_flag(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="validate one camera/LiDAR frame pair")
    p.add_argument("--camera", metavar="PATH", required=True)
    p.add_argument("--lidar", metavar="PATH", required=True)
    p.add_argument("--ego", metavar="PATH", required=True)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--now", type=int, metavar="MS", help="evaluation time (default: newest input timestamp)")
    server_flag(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("roi", help="print the region of interest for an ego state")
    p.add_argument("--ego", metavar="PATH", required=True)
    p.add_argument("--zones", metavar="PATH", help='{"clear": ZoneSpec, "focus": ZoneSpec}')
    p.add_argument("--stations", type=int, default=8)
    server_flag(p)
    p.set_defaults(func=cmd_roi)

    p = sub.add_parser("check", help="check a verdict log against a scenario's expectations")
    p.add_argument("--log", metavar="PATH", required=True)
    p.add_argument("--scenario", metavar="PATH", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scenarios", help="list bundled scenarios")
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

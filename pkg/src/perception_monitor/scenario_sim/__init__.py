"""Scenario files, the seeded simulator and expectation checks."""

from importlib import resources
from pathlib import Path

from .model import (
    Actor,
    EgoParams,
    EgoSample,
    Expectation,
    Scenario,
    ScenarioError,
    SensorModel,
    Waypoint,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .runner import ExpectationResult, VerdictLog, check_expectations, run, tick_times


def bundled_scenarios() -> dict[str, Path]:
    """Scenario files shipped with the package, by name (file stem)."""
    root = resources.files(__package__).joinpath("scenarios")
    return {Path(p.name).stem: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".json")}


__all__ = [
    "Actor", "EgoParams", "EgoSample", "Expectation", "ExpectationResult", "Scenario",
    "ScenarioError", "SensorModel", "VerdictLog", "Waypoint", "bundled_scenarios",
    "check_expectations", "load_scenario", "run", "scenario_from_dict", "scenario_to_dict",
    "tick_times",
]

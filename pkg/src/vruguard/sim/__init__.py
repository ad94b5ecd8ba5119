"""Deterministic fixed-step scenario engine and experiment tooling."""

from .scenario import (
    EntitySpec,
    LatencyDist,
    LatencyParams,
    NoiseParams,
    Occluder,
    ScenarioSpec,
    SpecError,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .engine import CommandError, Engine, run, stream_rng
from .metrics import (
    CSV_HEADER,
    EncounterMetrics,
    MalformedLog,
    RunMetrics,
    metrics_csv,
    metrics_report,
    percentile,
    read_event_log,
    write_event_log,
    write_metrics_csv,
)
from .scenarios import reference_scenarios

__all__ = [
    "EntitySpec",
    "LatencyDist",
    "LatencyParams",
    "NoiseParams",
    "Occluder",
    "ScenarioSpec",
    "SpecError",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "CommandError",
    "Engine",
    "run",
    "stream_rng",
    "EncounterMetrics",
    "MalformedLog",
    "RunMetrics",
    "metrics_csv",
    "metrics_report",
    "percentile",
    "read_event_log",
    "write_event_log",
    "write_metrics_csv",
    "CSV_HEADER",
    "reference_scenarios",
]

"""Run metrics computed from an event log, plus the CSV boundary format."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

CSV_HEADER = (
    "scenario,seed,encounter,first_alert_ttc_s,deadline_met,"
    "alert_before_visual,p50_ms,p95_ms,p99_ms,delivery_ratio"
)

ALERTING_LEVELS = ("WARN", "BRAKE")


class MalformedLog(ValueError):
    pass


@dataclass(frozen=True)
class EncounterMetrics:
    encounter: str
    first_alert_ttc_s: Optional[float]
    deadline_met: bool
    alert_before_visual: bool


@dataclass(frozen=True)
class RunMetrics:
    scenario: str
    seed: int
    encounters: tuple[EncounterMetrics, ...]
    p50_ms: float
    p95_ms: float
    p99_ms: float
    delivery_ratio: float


def percentile(samples: Sequence[float], p: float) -> float:
    """Nearest-rank percentile; 0.0 for an empty sample set."""
    if not samples:
        return 0.0
    ordered = sorted(samples)
    rank = max(1, math.ceil(p / 100.0 * len(ordered)))
    return ordered[rank - 1]


def metrics_report(events: Iterable[dict]) -> RunMetrics:
    """Aggregate an event log into run metrics.

    The log must start with a run_start event; alert transitions carry the
    ground-truth TTC and deadline verdict sampled at transition time.
    """
    events = list(events)
    if not events:
        raise MalformedLog("empty event log")
    head = events[0]
    if head.get("kind") != "run_start":
        raise MalformedLog("log does not start with a run_start event")
    info = head["detail"]
    scenario = info["scenario"]
    seed = info["seed"]
    visual_m = info["visual_detection_m"]
    encounter_ids = list(info["encounters"])

    e2e: list[float] = []
    ingested = 0
    in_range_broadcasts = 0
    first_alert: dict[str, dict] = {}
    for ev in events:
        kind = ev.get("kind")
        detail = ev.get("detail", {})
        if kind == "ingest":
            e2e.append(float(detail["e2e_ms"]))
            ingested += 1
        elif kind == "broadcast":
            in_range_broadcasts += len(detail.get("in_range", []))
        elif kind == "alert":
            enc = detail.get("encounter")
            if enc is None or detail.get("level") not in ALERTING_LEVELS:
                continue
            if enc not in first_alert:
                first_alert[enc] = detail

    encounters = []
    for enc in encounter_ids:
        detail = first_alert.get(enc)
        if detail is None:
            encounters.append(EncounterMetrics(enc, None, False, False))
        else:
            gt_ttc = detail.get("gt_ttc_s")
            encounters.append(EncounterMetrics(
                encounter=enc,
                first_alert_ttc_s=gt_ttc,
                deadline_met=bool(detail.get("deadline_ok", False)),
                alert_before_visual=(
                    detail.get("gt_distance_m") is not None
                    and detail["gt_distance_m"] > visual_m
                ),
            ))

    ratio = (ingested / in_range_broadcasts) if in_range_broadcasts else 0.0
    return RunMetrics(
        scenario=scenario,
        seed=seed,
        encounters=tuple(encounters),
        p50_ms=percentile(e2e, 50),
        p95_ms=percentile(e2e, 95),
        p99_ms=percentile(e2e, 99),
        delivery_ratio=ratio,
    )


def _fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return f"{x:.6g}"


def metrics_rows(m: RunMetrics) -> list[list[str]]:
    rows = []
    for enc in m.encounters:
        rows.append([
            m.scenario,
            str(m.seed),
            enc.encounter,
            _fmt(enc.first_alert_ttc_s),
            str(enc.deadline_met).lower(),
            str(enc.alert_before_visual).lower(),
            _fmt(m.p50_ms),
            _fmt(m.p95_ms),
            _fmt(m.p99_ms),
            _fmt(m.delivery_ratio),
        ])
    if not m.encounters:
        rows.append([
            m.scenario, str(m.seed), "", "", "false", "false",
            _fmt(m.p50_ms), _fmt(m.p95_ms), _fmt(m.p99_ms), _fmt(m.delivery_ratio),
        ])
    return rows


def metrics_csv(metrics: Union[RunMetrics, Iterable[RunMetrics]]) -> str:
    if isinstance(metrics, RunMetrics):
        metrics = [metrics]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for m in metrics:
        writer.writerows(metrics_rows(m))
    return out.getvalue()


def write_metrics_csv(metrics: Union[RunMetrics, Iterable[RunMetrics]], path: Union[str, Path]) -> None:
    Path(path).write_text(metrics_csv(metrics))


def write_event_log(events: Iterable[dict], path: Union[str, Path]) -> None:
    """Line-delimited JSON, canonical key order, one event per line."""
    lines = [json.dumps(ev, sort_keys=True, separators=(",", ":")) for ev in events]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_event_log(path: Union[str, Path]) -> list[dict]:
    events = []
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            events.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise MalformedLog(f"corrupt event log at line {lineno}: {e}") from e
    return events

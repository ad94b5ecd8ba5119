"""Operator entry point: run scenarios, replay logs, merge reports, serve HMI.

Exit codes are a stable contract: 0 success, 1 usage/config error,
2 run completed but some encounter missed the alert deadline.
"""

from __future__ import annotations

import argparse
import dataclasses
import errno
import os
import sys
from pathlib import Path

from .sim import (
    load_scenario,
    metrics_report,
    run,
    save_scenario,
    reference_scenarios,
)
from .sim.metrics import (
    MalformedLog,
    metrics_csv,
    read_event_log,
    write_event_log,
    write_metrics_csv,
)
from .sim.scenario import SpecError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEADLINE_MISSED = 2

OUT_DIR_ENV = "VRUGUARD_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vruguard",
        description="VRU protection pipeline simulator",
    )
    parser.add_argument("--verbose", action="store_true", help="chatty progress output")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="run a scenario, write event log + metrics CSV")
    p_run.add_argument("--scenario", required=True, help="scenario JSON path or a built-in name")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--out", default=None, help="output directory")

    p_replay = sub.add_parser("replay", help="recompute metrics from a log and verify the stored CSV")
    p_replay.add_argument("log", help="event log path (.ndjson)")

    p_report = sub.add_parser("report", help="aggregate metrics over many event logs")
    p_report.add_argument("logs", nargs="+", help="event log paths")
    p_report.add_argument("--out", default=None, help="write the merged CSV here (default stdout)")

    p_serve = sub.add_parser("serve", help="paced live run with the HMI websocket gateway")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--speed", type=float, default=1.0, help="pacing multiplier")

    p_scen = sub.add_parser("scenarios", help="list or export the built-in scenarios")
    p_scen.add_argument("--export", default=None, help="directory to write the built-in JSON files")
    return parser


def _load(scenario_arg: str, seed: int | None):
    builtin = reference_scenarios()
    if scenario_arg in builtin:
        spec = builtin[scenario_arg]
    else:
        spec = load_scenario(scenario_arg)
    if seed is not None:
        spec = dataclasses.replace(spec, seed=seed)
    return spec


def _out_dir(arg: str | None) -> Path:
    out = Path(arg or os.environ.get(OUT_DIR_ENV, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args) -> int:
    spec = _load(args.scenario, args.seed)
    out = _out_dir(args.out)
    events, metrics = run(spec)
    stem = f"{spec.name}-seed{spec.seed}"
    log_path = out / f"{stem}.ndjson"
    csv_path = out / f"{stem}.csv"
    write_event_log(events, log_path)
    write_metrics_csv(metrics, csv_path)
    if args.verbose:
        print(f"wrote {log_path} and {csv_path}", file=sys.stderr)
    print(metrics_csv(metrics), end="")
    missed = any(not e.deadline_met for e in metrics.encounters)
    return EXIT_DEADLINE_MISSED if missed else EXIT_OK


def _cmd_replay(args) -> int:
    events = read_event_log(args.log)
    metrics = metrics_report(events)
    got = metrics_csv(metrics)
    csv_path = Path(args.log).with_suffix(".csv")
    if csv_path.exists():
        stored = csv_path.read_text()
        if stored != got:
            print(f"metrics mismatch against {csv_path}", file=sys.stderr)
            print(got, end="")
            return EXIT_USAGE
        if args.verbose:
            print(f"metrics match {csv_path}", file=sys.stderr)
    print(got, end="")
    return EXIT_OK


def _cmd_report(args) -> int:
    all_metrics = []
    for log in args.logs:
        all_metrics.append(metrics_report(read_event_log(log)))
    merged = metrics_csv(all_metrics)
    if args.out:
        Path(args.out).write_text(merged)
    else:
        print(merged, end="")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    spec = _load(args.scenario, args.seed)
    app = create_app(spec, speed=args.speed)
    try:
        uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")
    except SystemExit as e:
        # uvicorn exits 1 itself when it cannot bind.
        return int(e.code or EXIT_USAGE)
    except OSError as e:
        if e.errno == errno.EADDRINUSE:
            print(f"port {args.port} already in use", file=sys.stderr)
            return EXIT_USAGE
        raise
    return EXIT_OK


def _cmd_scenarios(args) -> int:
    builtin = reference_scenarios()
    if args.export:
        out = Path(args.export)
        out.mkdir(parents=True, exist_ok=True)
        for name, spec in builtin.items():
            save_scenario(spec, out / f"{name}.json")
            print(out / f"{name}.json")
    else:
        for name in builtin:
            print(name)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "replay": _cmd_replay,
        "report": _cmd_report,
        "serve": _cmd_serve,
        "scenarios": _cmd_scenarios,
    }
    try:
        return handlers[args.subcommand](args)
    except (SpecError, MalformedLog) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

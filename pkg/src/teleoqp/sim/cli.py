"""Command-line interface for the simulator.

    teleoqp run --scenario F [--script S | --serve PORT] [--out T.csv]
                [--format csv|jsonl] [--duration SECS] [--ts MS] [--ws PORT]
    teleoqp validate --scenario F
    teleoqp plot --telemetry T [--out-dir D]

Scenario arguments accept a file path or a bundled scenario name
(e.g. `dvrk-priority-b05`).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

from .loop import ScriptSource, StaticSource, run_simulation
from .scenario import ScenarioError, bundled_scenario_path, load_scenario
from .telemetry import write_telemetry


def _resolve_scenario(arg: str) -> Path:
    path = Path(arg)
    if path.is_file():
        return path
    return bundled_scenario_path(arg)


def cmd_run(args) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    for warning in scenario.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    ts = args.ts / 1000.0 if args.ts is not None else None

    if args.serve is not None:
        from .server import SimServer

        server = SimServer(
            scenario,
            port=args.serve,
            ws_port=args.ws,
            realtime=True,
            duration=args.duration,
        )
        print(f"serving {scenario.name!r} on tcp://127.0.0.1:{args.serve}"
              + (f" and ws://127.0.0.1:{args.ws}" if args.ws is not None else ""))
        try:
            asyncio.run(server.run())
        except KeyboardInterrupt:
            pass
        return 0

    source = None
    if args.script is not None:
        source = ScriptSource(args.script)
    result = run_simulation(scenario, source=source, duration=args.duration, sampling_time=ts)
    summary = result.summary()
    print(json.dumps({"scenario": scenario.name, **summary}, indent=1))
    if args.out is not None:
        write_telemetry(result.records, result.schema, args.out, fmt=args.format)
        print(f"telemetry written to {args.out} ({len(result.records)} rows)")
    return 0


def cmd_validate(args) -> int:
    try:
        scenario = load_scenario(_resolve_scenario(args.scenario))
    except ScenarioError as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return 1
    print(f"scenario {scenario.name!r}: {len(scenario.robots)} robots, "
          f"{len(scenario.constraints)} constraint rows, duration {scenario.duration}s")
    for warning in scenario.warnings:
        print(f"warning: {warning}")
    return 0


def cmd_plot(args) -> int:
    from .plots import plot_telemetry

    scenario = load_scenario(_resolve_scenario(args.scenario)) if args.scenario else None
    paths = plot_telemetry(args.telemetry, args.out_dir, scenario=scenario)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teleoqp", description="constrained teleoperation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario (script mode or live service)")
    p_run.add_argument("--scenario", required=True, help="scenario file or bundled name")
    p_run.add_argument("--script", help="master script (JSONL) overriding the scenario's")
    p_run.add_argument("--serve", type=int, metavar="PORT", help="serve live on this TCP port")
    p_run.add_argument("--ws", type=int, metavar="PORT", help="also serve WebSocket on this port")
    p_run.add_argument("--out", help="telemetry output file")
    p_run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p_run.add_argument("--duration", type=float, help="override duration in seconds")
    p_run.add_argument("--ts", type=float, help="override sampling time in milliseconds")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("--scenario", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_plot = sub.add_parser("plot", help="static plots from a telemetry file")
    p_plot.add_argument("--telemetry", required=True)
    p_plot.add_argument("--out-dir", default=".")
    p_plot.add_argument("--scenario", help="matching scenario: adds tool-trajectory plots")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

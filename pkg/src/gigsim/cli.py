"""Command-line surface: run, metrics, validate, bridge-test."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments, trace_io
from .agents import Observation, JobView
from .bridge import BridgeAgent
from .core import default_config
from .errors import ConfigError
from .money import to_money


def _cmd_run(args: argparse.Namespace) -> int:
    config = experiments.load_config(args.config) if args.config else default_config()
    bundle = experiments.run(config, args.seeds, args.out)
    for path in bundle.trace_paths:
        print(path)
    print(bundle.aggregate_agent_path)
    print(bundle.aggregate_market_path)
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for trace in args.traces:
        records = trace_io.read_trace(trace)
        tag = Path(trace).stem
        agent_path, market_path, _, _ = experiments.write_tables(records, out, tag)
        print(agent_path)
        print(market_path)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    experiments.load_config(args.config)
    print("ok")
    return 0


def _canned_observation() -> Observation:
    views = (
        JobView("JB-A0", "SK-A", to_money(10)),
        JobView("JB-B0", "SK-B", to_money(8)),
    )
    return Observation(
        round=0,
        listings=views,
        activity=(),
        leaderboard=((1, "AG-00", "0.00"),),
        reputation={"SK-A": 2.5, "SK-B": 2.5},
        recent=(),
        memo="",
    )


def _cmd_bridge_test(args: argparse.Namespace) -> int:
    agent = BridgeAgent("AG-00", args.command, timeout=args.timeout)
    try:
        agent.start()
        action = agent.act(_canned_observation(), "OPEN")
    finally:
        agent.close()
    payload = {
        "intent": action.intent,
        "targets": [list(t) if isinstance(t, tuple) else t for t in action.targets],
        "memo": action.memo,
        "note": action.note,
    }
    print(json.dumps(payload, default=str))
    return 1 if action.note else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gigsim",
        description="Deterministic agent labor-market simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one trace per seed and write tables")
    run_p.add_argument("--config", help="JSON config file (omit for the baseline market)")
    run_p.add_argument("--seeds", type=int, nargs="+", default=[0], help="one run per seed")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.set_defaults(func=_cmd_run)

    met_p = sub.add_parser("metrics", help="recompute summary tables from trace files")
    met_p.add_argument("traces", nargs="+", help="trace files (.ndjson)")
    met_p.add_argument("--out", required=True, help="output directory")
    met_p.set_defaults(func=_cmd_metrics)

    val_p = sub.add_parser("validate", help="check a config file")
    val_p.add_argument("config", help="JSON config file")
    val_p.set_defaults(func=_cmd_validate)

    bt_p = sub.add_parser("bridge-test", help="exercise an external agent endpoint")
    bt_p.add_argument("command", nargs="+", help="endpoint launch command")
    bt_p.add_argument("--timeout", type=float, default=5.0)
    bt_p.set_defaults(func=_cmd_bridge_test)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: config: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: io: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: value: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

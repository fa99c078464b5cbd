"""Command line entry points: serve a live session, run a scenario, list the
bundled scenarios. The only environment variable honored is
CLONEWORKS_LOG_LEVEL."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import EngineError
from .scenario import (
    bundled_scenario_names,
    load_bundled_scenario,
    load_scenario_file,
    run_scenario,
)


def _setup_logging() -> None:
    level = os.environ.get("CLONEWORKS_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _cmd_serve(args) -> int:
    from .service import serve

    try:
        serve(port=args.port, scene=args.scene, tick_rate=args.tick_rate)
    except EngineError as err:
        print(f"error: {err.code}: {err.detail}", file=sys.stderr)
        return 1
    return 0


def _cmd_run(args) -> int:
    try:
        if os.path.exists(args.scenario):
            script = load_scenario_file(args.scenario)
        else:
            script = load_bundled_scenario(args.scenario)
    except EngineError as err:
        print(f"error: {err.code}: {err.detail}", file=sys.stderr)
        return 2
    report = run_scenario(script)
    if args.hash:
        print(report.final_hash)
    else:
        text = report.to_json(include_timing=args.timing)
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    return 0 if report.passed else 1


def _cmd_list(_args) -> int:
    for name in bundled_scenario_names():
        print(name)
    return 0


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(prog="cloneworks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the live session service")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--scene", default=None, help="scenario file for world setup")
    p_serve.add_argument("--tick-rate", type=float, default=None, dest="tick_rate")
    p_serve.set_defaults(func=_cmd_serve)

    p_run = sub.add_parser("run", help="run a scenario and print its report")
    p_run.add_argument("scenario", help="path or bundled scenario name")
    p_run.add_argument("--report", default=None, help="write the JSON report here")
    p_run.add_argument("--hash", action="store_true", help="print only the final hash")
    p_run.add_argument("--timing", action="store_true", help="include wall-clock in the report")
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list-scenarios", help="list bundled scenarios")
    p_list.set_defaults(func=_cmd_list)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: spectral-lab run | plot | validate."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classify import parse_config
from .errors import ConfigError, SpectralLabError
from .experiment import run_experiment
from .plots import emit_plots


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectral-lab",
        description="Boundary-value diagnostics for rigged operator models.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="classify every anchor in a config")
    run.add_argument("config", help="experiment config (JSON)")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--jobs", type=int, default=1,
                     help="worker threads for the anchor grid")
    run.add_argument("--seed", type=int, default=None,
                     help="override the config seed")

    plot = sub.add_parser("plot", help="render SVG plots for a report directory")
    plot.add_argument("report_dir", help="directory written by `run`")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config", help="experiment config (JSON)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        try:
            bundle = run_experiment(args.config, out_dir=args.out,
                                    jobs=args.jobs, seed=args.seed)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        for verdict in bundle.verdicts:
            extra = f" via {verdict.witness}" if verdict.witness else ""
            print(f"lambda={verdict.lam:g}: {verdict.status}{extra}")
        print(f"report: {bundle.verdict_path}")
        return bundle.exit_code

    if args.command == "plot":
        try:
            written = emit_plots(args.report_dir)
        except (FileNotFoundError, json.JSONDecodeError) as exc:
            print(f"plot error: {exc}", file=sys.stderr)
            return 1
        for path in written:
            print(path)
        return 0

    # validate
    path = Path(args.config)
    try:
        document = json.loads(path.read_text())
    except OSError as exc:
        print(f"config error: cannot read {path}: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON at line {exc.lineno} column "
              f"{exc.colno}: {exc.msg}", file=sys.stderr)
        return 1
    try:
        config = parse_config(document, base_dir=path.parent)
    except SpectralLabError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    print(f"ok: {len(config.lambda_grid)} anchors, "
          f"{len(config.witnesses)} witnesses, "
          f"model {type(config.model).__name__}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry points: run, annotate, score, report, serve.

Configuration precedence: command-line flags > LANEBENCH_* environment
variables > configuration file > built-in defaults.

Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 empty result.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import yaml

from .backend import AnnotationBackend
from .chain import ChainError
from .policy import PolicyClientError
from .report import format_table, write_report
from .runner import (ConfigError, EmptyRunError, PLANNING_COLUMNS, RunConfig,
                     RunnerError, annotate_static, run, score_run)
from .scoring import REPORT_COLUMNS
from .store import StoreError
from .world import ScenarioError, builtin_scenario_names

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_EMPTY = 3

ENV_PREFIX = "LANEBENCH_"

_LIST_FIELDS = {"scenarios", "input_modes"}
_INT_FIELDS = {"intervention_interval", "tick_budget", "seed"}


def _env_overrides() -> dict:
    overrides: dict = {}
    for name in ("scenarios", "out_dir", "policy", "policy_url", "chain_path",
                 "input_modes", "image_mode", "intervention_interval",
                 "tick_budget", "seed"):
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        if name in _LIST_FIELDS:
            overrides[name] = [tok.strip() for tok in raw.split(",") if tok.strip()]
        elif name in _INT_FIELDS:
            try:
                overrides[name] = int(raw)
            except ValueError:
                raise ConfigError(f"{ENV_PREFIX}{name.upper()} must be an "
                                  f"integer, got {raw!r}") from None
        else:
            overrides[name] = raw
    return overrides


def _parse_opt(pair: str) -> tuple[str, object]:
    if "=" not in pair:
        raise ConfigError(f"policy option must look like key=value, got {pair!r}")
    key, raw = pair.split("=", 1)
    value: object = raw
    if raw.lower() in ("true", "false"):
        value = raw.lower() == "true"
    else:
        for cast in (int, float):
            try:
                value = cast(raw)
                break
            except ValueError:
                continue
    return key, value


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    doc: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"configuration file not found: {path}")
        loaded = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        if not isinstance(loaded, dict):
            raise ConfigError("configuration file must hold a mapping")
        doc.update(loaded)
    doc.update(_env_overrides())
    if args.scenario:
        doc["scenarios"] = list(args.scenario)
    if args.out:
        doc["out_dir"] = args.out
    if args.policy:
        doc["policy"] = args.policy
    if args.policy_url:
        doc["policy_url"] = args.policy_url
    if args.policy_opt:
        opts = dict(doc.get("policy_options", {}))
        opts.update(dict(_parse_opt(p) for p in args.policy_opt))
        doc["policy_options"] = opts
    if args.chain:
        doc["chain_path"] = args.chain
    if args.input_mode:
        doc["input_modes"] = list(args.input_mode)
    if args.image_mode:
        doc["image_mode"] = args.image_mode
    if args.interval is not None:
        doc["intervention_interval"] = args.interval
    if args.budget is not None:
        doc["tick_budget"] = args.budget
    if args.seed is not None:
        doc["seed"] = args.seed
    if not doc.get("scenarios"):
        doc["scenarios"] = list(builtin_scenario_names())
    if not doc.get("out_dir"):
        raise ConfigError("an output directory is required (--out, "
                          "LANEBENCH_OUT_DIR, or the config file)")
    return RunConfig.from_dict(doc)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    logs = run(config)
    for log in logs:
        kinds = ", ".join(e.kind for e in log.infractions) or "none"
        print(f"{log.scenario}: completion={log.route_completion:.3f} "
              f"terminated={log.terminated} infractions={kinds}")
    print(f"stored under {config.out_dir}")
    return EXIT_OK


def _cmd_annotate(args: argparse.Namespace) -> int:
    qids = tuple(args.qid) if args.qid else None
    count, warnings = annotate_static(args.input, args.out) if qids is None \
        else annotate_static(args.input, args.out, qids)
    print(f"annotated {count} frame(s) into {args.out}")
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    tables = score_run(args.run_dir)
    print(format_table(tables.vqa_rows, REPORT_COLUMNS))
    print()
    print(format_table(tables.planning_rows, PLANNING_COLUMNS))
    if tables.flagged:
        print(f"\n{len(tables.flagged)} flagged row(s):")
        for row in tables.flagged[:20]:
            print(f"  {row}")
    if args.json:
        Path(args.json).write_text(
            json.dumps(tables.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        print(f"\nwrote {args.json}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    tables = score_run(args.run_dir)
    out = args.out or str(Path(args.run_dir) / "report")
    written = write_report(tables, out)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    root = Path(args.dataset)
    if not root.is_dir():
        raise ConfigError(f"dataset root is not a directory: {root}")
    try:
        backend = AnnotationBackend(root, host=args.host, port=args.port)
    except OSError as exc:
        raise RunnerError(f"could not bind {args.host}:{args.port}: {exc}") from exc
    print(f"annotation backend listening on {backend.address}")
    backend.start()
    try:
        backend._thread.join()
    except KeyboardInterrupt:
        backend.stop()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lanebench",
        description="Closed-loop lane-world benchmark: run, annotate, score, "
                    "report, serve.",
        exit_on_error=False)
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="drive scenarios closed-loop",
                           exit_on_error=False)
    p_run.add_argument("--config", help="YAML configuration file")
    p_run.add_argument("--scenario", action="append",
                       help="scenario name (repeatable; default: all built-ins)")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--policy", help="built-in policy name")
    p_run.add_argument("--policy-url", help="remote policy endpoint")
    p_run.add_argument("--policy-opt", action="append", metavar="KEY=VALUE",
                       help="policy option (repeatable)")
    p_run.add_argument("--chain", help="chain configuration file")
    p_run.add_argument("--input-mode", action="append", choices=("bev", "text"),
                       help="input modality (repeatable)")
    p_run.add_argument("--image-mode", choices=("path", "inline"))
    p_run.add_argument("--interval", type=int, help="ticks between interventions")
    p_run.add_argument("--budget", type=int, help="tick budget override")
    p_run.add_argument("--seed", type=int)
    p_run.set_defaults(func=_cmd_run)

    p_ann = sub.add_parser("annotate", help="re-annotate stored world logs",
                           exit_on_error=False)
    p_ann.add_argument("--in", dest="input", required=True,
                       help="directory of stored frames with world snapshots")
    p_ann.add_argument("--out", required=True, help="output directory")
    p_ann.add_argument("--qid", action="append", type=int,
                       help="question id (repeatable; default: standard set)")
    p_ann.set_defaults(func=_cmd_annotate)

    p_score = sub.add_parser("score", help="score a stored run offline",
                             exit_on_error=False)
    p_score.add_argument("--run-dir", required=True)
    p_score.add_argument("--json", help="also write the tables as JSON")
    p_score.set_defaults(func=_cmd_score)

    p_rep = sub.add_parser("report", help="score and render tables + figures",
                           exit_on_error=False)
    p_rep.add_argument("--run-dir", required=True)
    p_rep.add_argument("--out", help="report directory "
                                     "(default: <run-dir>/report)")
    p_rep.set_defaults(func=_cmd_report)

    p_srv = sub.add_parser("serve", help="serve the annotation backend",
                           exit_on_error=False)
    p_srv.add_argument("--dataset", required=True, help="dataset root directory")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8060)
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except argparse.ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help and friends
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_CONFIG
    try:
        return args.func(args)
    except EmptyRunError as exc:
        print(f"empty result: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (ConfigError, ChainError, ScenarioError, yaml.YAMLError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # unknown policy names, malformed option values
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunnerError, StoreError, PolicyClientError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

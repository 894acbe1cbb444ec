"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime failure (a
``failures.json`` manifest is written next to the results).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import harness
from .core import ATMRError, CapabilityError, ConfigError
from .problems import UnknownProblemError, list_problems, reference_front, write_front_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parse_params(items: list[str]) -> dict:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected KEY=VALUE, got {item!r}")
        params[key] = yaml.safe_load(value)
    return params


def cmd_run(args) -> int:
    config = harness.ExperimentConfig.load(args.config)
    config = harness.with_overrides(config, base_seed=args.seed, output_dir=args.output)
    outcome = harness.run_experiment(config, jobs=args.jobs)
    print(f"{len(outcome.records)} run records written to {outcome.output_dir}")
    if outcome.failures:
        for f in outcome.failures:
            print(f"run {f['task']} ({f['problem']}/{f['algorithm']} seed {f['seed']}) failed: {f['error']}", file=sys.stderr)
        print(f"{len(outcome.failures)} runs failed; see {outcome.output_dir / 'failures.json'}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_summarize(args) -> int:
    records = harness.load_records(args.dir)
    if not records:
        raise ConfigError(f"no run records under {Path(args.dir) / 'runs'}")
    summary = harness.summarize(records)
    harness.write_summary(summary, args.dir)
    for row in summary.rows:
        print(f"{row.problem:<16}{row.algorithm:<12}IGD {row.igd_mean:.4e} ({row.igd_std:.2e})  "
              f"HV {row.hv_mean:.4e} ({row.hv_std:.2e})")
    for alg, rank in summary.igd_rank.items():
        print(f"average rank {alg}: IGD {rank:.2f}, HV {summary.hv_rank[alg]:.2f}")
    return EXIT_OK


def cmd_front(args) -> int:
    F = reference_front(args.problem, args.count, _parse_params(args.param))
    if args.out:
        write_front_csv(args.out, F)
    else:
        print(",".join(f"f{i + 1}" for i in range(F.shape[1])))
        np.savetxt(sys.stdout, F, fmt="%.17g", delimiter=",")
    return EXIT_OK


def cmd_list(args) -> int:
    for name in list_problems():
        print(name)
    return EXIT_OK


def cmd_replay(args) -> int:
    record = json.loads(Path(args.record).read_text())
    replayed = harness.replay_record(record)
    same = harness.dump_record(replayed) == harness.dump_record(record)
    print("identical" if same else "MISMATCH")
    return EXIT_OK if same else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atmr", description="Constrained multiobjective benchmark harness")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a YAML/JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    run.add_argument("--seed", type=int, default=None, help="override base_seed")
    run.add_argument("--output", default=None, help="override output_dir")
    run.set_defaults(func=cmd_run)

    summ = sub.add_parser("summarize", help="rebuild tables and summary from run records")
    summ.add_argument("--dir", required=True)
    summ.set_defaults(func=cmd_summarize)

    front = sub.add_parser("front", help="dump a reference front as CSV")
    front.add_argument("--problem", required=True)
    front.add_argument("--count", type=int, required=True)
    front.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    front.add_argument("--out", default=None)
    front.set_defaults(func=cmd_front)

    lst = sub.add_parser("list-problems", help="list registered problems")
    lst.set_defaults(func=cmd_list)

    replay = sub.add_parser("replay", help="re-run a record and check it reproduces")
    replay.add_argument("--record", required=True)
    replay.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, UnknownProblemError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ATMRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

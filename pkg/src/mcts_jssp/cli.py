"""Command-line entry point: ``mcts-jssp <command> ...``.

Exit status is 0 on success, 1 for usage errors and 2 for bad input data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from mcts_jssp.dispatch import JobRule, OpRule, greedy_dispatch, parse_rule
from mcts_jssp.env import load_env_config
from mcts_jssp.generator import GeneratorConfig, default_config, generate_suite
from mcts_jssp.harness import (
    best_of_seeds,
    parse_method,
    performance_profiles,
    profiles_to_rows,
    read_records,
    run_batch,
    summarize,
    summary_csv,
)
from mcts_jssp.instance import InstanceError, load_instance
from mcts_jssp.mcts import SearchConfig, search
from mcts_jssp.oracle import InstanceTooLarge, oracle_exact
from mcts_jssp.schedule import (
    ScheduleError,
    normalized_reward,
    objective_weighted_completion,
    reward_bounds,
)

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _number(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    return x


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _all_rules() -> list:
    return list(OpRule) + list(JobRule)


def cmd_generate(args) -> int:
    if args.config:
        cfg = GeneratorConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    else:
        cfg = default_config()
    if args.jobs:
        cfg = GeneratorConfig.from_dict({**cfg.to_dict(), "job_range": args.jobs})
    if args.machines:
        cfg = GeneratorConfig.from_dict({**cfg.to_dict(), "machine_range": args.machines})
    if not args.out:
        raise UsageError("generate needs --out DIR")
    instances = generate_suite(cfg, args.count, args.seed, args.out)
    print(f"wrote {len(instances)} instances to {args.out}", file=sys.stderr)
    return 0


def _search_config(args) -> SearchConfig:
    if args.iters is None and args.time_limit is None:
        raise UsageError("give --iters, --time-limit or both")
    try:
        return SearchConfig(
            c=args.c,
            rollouts=args.rollouts,
            advance_period=args.advance,
            iterations=args.iters,
            time_limit=args.time_limit,
            seed=args.seed,
            backprop=args.backprop,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    env_cfg = load_env_config(args.env)
    scfg = _search_config(args)
    result = search(inst, env_cfg, scfg)
    doc = {
        "instance": inst.name,
        "env": env_cfg.name or args.env,
        "seed": scfg.seed,
        "objective": _number(result.objective),
        "normalized_reward": float(result.normalized_reward),
        "iterations": result.iterations,
        "nodes": result.nodes,
    }
    if not args.no_timing:
        doc["wall_time_ms"] = round(result.wall_time_ms, 3)
    if args.schedule_csv:
        Path(args.schedule_csv).write_text(result.schedule.to_csv(inst), encoding="utf-8")
    _emit(json.dumps(doc, sort_keys=True) + "\n", args.out)
    return 0


def cmd_baseline(args) -> int:
    if args.rules == "all":
        rules = _all_rules()
    else:
        rules = [parse_rule(name) for name in args.rules.split(",")]
    rows = []
    for path in args.instances:
        inst = load_instance(path)
        for rule in rules:
            t0 = time.perf_counter()
            obj = objective_weighted_completion(greedy_dispatch(inst, rule), inst)
            elapsed = (time.perf_counter() - t0) * 1000.0
            rows.append(
                {"instance": inst.name, "rule": rule.value, "objective": _number(obj),
                 "wall_time_ms": round(elapsed, 3)}
            )
    _emit(_table(rows, args.format), args.out)
    return 0


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    obj, sched = oracle_exact(inst, args.cap)
    doc = {
        "instance": inst.name,
        "objective": _number(obj),
        "normalized_reward": float(normalized_reward(obj, *reward_bounds(inst))),
        "completion": {str(op): c for op, c in sorted(sched.completion.items())},
    }
    _emit(json.dumps(doc, sort_keys=True) + "\n", args.out)
    return 0


def cmd_batch(args) -> int:
    if not args.out:
        raise UsageError("batch needs --out RECORDS.csv")
    instances = [load_instance(p) for p in args.instances]
    scfg = _search_config(args)
    methods = [parse_method(m, scfg) for m in args.methods.split(",")]
    seeds = range(args.seed, args.seed + args.repeats)
    new = run_batch(instances, methods, seeds, args.out, workers=args.workers)
    print(f"{len(new)} new records in {args.out}", file=sys.stderr)
    return 0


def cmd_profile(args) -> int:
    records = best_of_seeds(read_records(args.records))
    curves = performance_profiles(records)
    rows = [{"method": m, "ratio": x, "fraction": y} for m, x, y in profiles_to_rows(curves)]
    _emit(_table(rows, args.format), args.out)
    return 0


def cmd_summarize(args) -> int:
    rows = summarize(read_records(args.records))
    if args.format == "json":
        doc = [{"method": r.method, "mean": float(r.mean) / args.scale, "count": r.count} for r in rows]
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        _emit(summary_csv(rows, args.scale), args.out)
    return 0


def _search_flags(p):
    p.add_argument("--env", default="1.4", help="preset name (e.g. 4.1) or JSON config path")
    p.add_argument("--iters", type=int, help="iteration budget")
    p.add_argument("--time-limit", type=float, help="wall-clock limit in seconds")
    p.add_argument("--rollouts", type=int, default=30, help="random rollouts per simulation")
    p.add_argument("--advance", type=int, default=6, help="iterations between root advances")
    p.add_argument("--c", type=float, default=0.7, help="UCB exploration constant")
    p.add_argument("--backprop", choices=("mean", "each"), default="mean")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="mcts-jssp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="write a synthetic benchmark suite")
    p.add_argument("--config", help="generator config JSON (defaults to the shipped calibration)")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--jobs", type=int, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--machines", type=int, nargs=2, metavar=("MIN", "MAX"))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", parents=[common], help="run MCTS on one instance")
    p.add_argument("instance")
    _search_flags(p)
    p.add_argument("--schedule-csv", help="also write the best schedule as CSV")
    p.add_argument("--no-timing", action="store_true", help="omit wall_time_ms for reproducible output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("baseline", parents=[common], help="greedy dispatching baselines")
    p.add_argument("instances", nargs="+")
    p.add_argument("--rules", default="all", help="comma-separated rule names or 'all'")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("oracle", parents=[common], help="exact optimum for tiny instances")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=9, help="maximum operation count")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("batch", parents=[common], help="resumable batch of runs into a records CSV")
    p.add_argument("instances", nargs="+")
    p.add_argument("--methods", required=True, help="e.g. mcts:4.1,pdr:SPT,oracle")
    p.add_argument("--repeats", type=int, default=1, help="seeds per run, starting at --seed")
    p.add_argument("--workers", type=int, default=1)
    _search_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("profile", parents=[common], help="performance-profile breakpoints")
    p.add_argument("records")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("summarize", parents=[common], help="mean objective per method")
    p.add_argument("records")
    p.add_argument("--scale", type=float, default=1.0, help="divide means by this factor")
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mcts-jssp: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (InstanceError, ScheduleError, InstanceTooLarge, OSError, KeyError, ValueError) as exc:
        print(f"mcts-jssp: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())

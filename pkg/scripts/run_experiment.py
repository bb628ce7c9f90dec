"""Compare MCTS environments against greedy baselines on a scaled synthetic suite.

    python3 scripts/run_experiment.py --instances 10 --time-limit 60 --out results/

Writes runs.csv (resumable), profile.csv and summary.csv into the output directory.
"""

import argparse
import csv
import logging
from pathlib import Path

from mcts_jssp.dispatch import JobRule, OpRule
from mcts_jssp.generator import generate_suite, scaled_config
from mcts_jssp.harness import (
    BaselineMethod,
    MctsMethod,
    best_of_seeds,
    performance_profiles,
    profiles_to_rows,
    read_records,
    run_batch,
    summarize,
    summary_csv,
)
from mcts_jssp.mcts import SearchConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--envs", default="1.4,2.1,4.1,5.1")
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--iters", type=int)
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out)
    instances = generate_suite(scaled_config(), args.instances, args.base_seed, out / "instances")
    scfg = SearchConfig(iterations=args.iters, time_limit=args.time_limit)
    methods = [MctsMethod(env, scfg) for env in args.envs.split(",")]
    methods += [BaselineMethod(rule) for rule in list(OpRule) + list(JobRule)]

    runs = out / "runs.csv"
    new = run_batch(instances, methods, range(args.repeats), runs, workers=args.workers)
    logging.info("%d new records", len(new))

    records = read_records(runs)
    with (out / "profile.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "ratio", "fraction"])
        writer.writerows(profiles_to_rows(performance_profiles(best_of_seeds(records))))
    rows = summarize(records)
    (out / "summary.csv").write_text(summary_csv(rows))
    for row in rows:
        print(f"{row.method:24s} {float(row.mean):14.1f}  ({row.count} runs)")


if __name__ == "__main__":
    main()

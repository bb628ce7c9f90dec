"""Batch experiments, performance profiles and summary tables."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from pathlib import Path

from mcts_jssp.dispatch import Rule, greedy_dispatch, parse_rule
from mcts_jssp.env import preset
from mcts_jssp.instance import Instance, serialize_instance
from mcts_jssp.mcts import SearchConfig, search
from mcts_jssp.oracle import DEFAULT_CAP, oracle_exact
from mcts_jssp.schedule import normalized_reward, objective_weighted_completion, reward_bounds

log = logging.getLogger(__name__)

CSV_SCHEMA = "# runrecord v1"
FIELDS = ["key", "instance", "method", "seed", "objective", "normalized_reward", "wall_time_ms"]


@dataclass(frozen=True)
class RunRecord:
    instance: str
    method: str
    objective: int | Fraction
    normalized_reward: float
    wall_time_ms: float
    seed: int
    key: str = ""


@dataclass(frozen=True)
class MctsMethod:
    env: str
    search: SearchConfig

    @property
    def method_id(self) -> str:
        cfg = asdict(replace(self.search, seed=0))
        digest = hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:8]
        return f"mcts:{self.env}:{digest}"

    def run(self, inst: Instance, seed: int):
        result = search(inst, preset(self.env), replace(self.search, seed=seed))
        return result.objective


@dataclass(frozen=True)
class BaselineMethod:
    rule: Rule

    @property
    def method_id(self) -> str:
        return f"pdr:{self.rule.value}"

    def run(self, inst: Instance, seed: int):
        return objective_weighted_completion(greedy_dispatch(inst, self.rule), inst)


@dataclass(frozen=True)
class OracleMethod:
    cap: int = DEFAULT_CAP

    @property
    def method_id(self) -> str:
        return "oracle"

    def run(self, inst: Instance, seed: int):
        return oracle_exact(inst, self.cap)[0]


Method = MctsMethod | BaselineMethod | OracleMethod


def parse_method(text: str, search_cfg: SearchConfig | None = None) -> Method:
    """``oracle``, ``pdr:<RULE>`` or ``mcts:<preset>``."""
    kind, _, arg = text.partition(":")
    if kind == "oracle":
        return OracleMethod()
    if kind == "pdr":
        return BaselineMethod(parse_rule(arg))
    if kind == "mcts":
        preset(arg)
        return MctsMethod(arg, search_cfg or SearchConfig(iterations=1000))
    raise ValueError(f"unknown method {text!r}")


def record_key(inst: Instance, method: Method, seed: int) -> str:
    h = hashlib.sha256()
    h.update(serialize_instance(inst).encode())
    h.update(repr(method).encode())
    h.update(str(seed).encode())
    return h.hexdigest()[:16]


def _format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else repr(float(x))
    return repr(x) if isinstance(x, float) else str(x)


def _parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return Fraction(text)


def read_records(path: str | Path) -> list[RunRecord]:
    path = Path(path)
    if not path.exists():
        return []
    with path.open(encoding="utf-8", newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        return [
            RunRecord(
                instance=row["instance"],
                method=row["method"],
                objective=_parse_number(row["objective"]),
                normalized_reward=float(row["normalized_reward"]),
                wall_time_ms=float(row["wall_time_ms"]),
                seed=int(row["seed"]),
                key=row["key"],
            )
            for row in rows
        ]


def write_records(path: str | Path, records, append: bool = False) -> None:
    path = Path(path)
    fresh = not append or not path.exists() or path.stat().st_size == 0
    with path.open("a" if append else "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            fh.write(CSV_SCHEMA + "\n")
            writer.writerow(FIELDS)
        for r in records:
            writer.writerow(
                [r.key, r.instance, r.method, r.seed, _format_number(r.objective),
                 repr(r.normalized_reward), f"{r.wall_time_ms:.3f}"]
            )


def _execute(job):
    inst, method, seed, key = job
    t0 = time.perf_counter()
    objective = method.run(inst, seed)
    elapsed = (time.perf_counter() - t0) * 1000.0
    reward = float(normalized_reward(objective, *reward_bounds(inst)))
    return RunRecord(inst.name, method.method_id, objective, reward, elapsed, seed, key)


def run_batch(instances, methods, seeds, csv_path=None, workers: int = 1) -> list[RunRecord]:
    """Run every (instance, method, seed) not already in ``csv_path``; return the new records.

    A failing run is logged and skipped; the rest of the batch continues.
    """
    done = {r.key for r in read_records(csv_path)} if csv_path else set()
    jobs = []
    for inst in instances:
        for method in methods:
            for seed in seeds:
                key = record_key(inst, method, seed)
                if key not in done:
                    jobs.append((inst, method, seed, key))

    records = []

    def keep(job, future_or_value):
        try:
            record = future_or_value.result() if hasattr(future_or_value, "result") else future_or_value()
        except Exception as exc:  # noqa: BLE001 - one bad run must not kill the batch
            log.error("run %s / %s / seed %s failed: %s", job[0].name, job[1].method_id, job[2], exc)
            return
        records.append(record)
        if csv_path:
            write_records(csv_path, [record], append=True)

    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [(job, pool.submit(_execute, job)) for job in jobs]
            for job, fut in futures:
                keep(job, fut)
    else:
        for job in jobs:
            keep(job, lambda job=job: _execute(job))
    return records


def best_of_seeds(records) -> list[RunRecord]:
    best: dict[tuple[str, str], RunRecord] = {}
    for r in records:
        k = (r.instance, r.method)
        if k not in best or r.objective < best[k].objective:
            best[k] = r
    return list(best.values())


@dataclass
class ProfileCurve:
    """Right-continuous step function: share of instances within ratio ``x`` of the best."""

    method: str
    points: list[tuple[Fraction, Fraction]]

    def __call__(self, x) -> Fraction:
        if isinstance(x, float):
            # read 1.2 as 6/5, not as its binary approximation just below it
            x = Fraction(repr(x))
        y = Fraction(0)
        for bx, by in self.points:
            if bx <= x:
                y = by
            else:
                break
        return y


def _ratio(value, best):
    if best == 0:
        return Fraction(1) if value == 0 else math.inf
    return Fraction(value) / Fraction(best)


def performance_profiles(records) -> list[ProfileCurve]:
    records = list(records)
    if not records:
        raise ValueError("no records to profile")
    table: dict[str, dict[str, object]] = defaultdict(dict)
    for r in records:
        if r.instance in table[r.method]:
            raise ValueError(f"duplicate record for {r.method} on {r.instance}; aggregate seeds first")
        table[r.method][r.instance] = r.objective
    instances = sorted({r.instance for r in records})
    best = {i: min(t[i] for t in table.values() if i in t) for i in instances}

    curves = []
    for method in sorted(table):
        ratios = [_ratio(table[method][i], best[i]) if i in table[method] else math.inf for i in instances]
        xs = sorted({x for x in ratios if x != math.inf})
        n = len(instances)
        points = [(x, Fraction(sum(1 for r in ratios if r <= x), n)) for x in xs]
        curves.append(ProfileCurve(method, points))
    return curves


def profiles_to_rows(curves) -> list[tuple[str, float, float]]:
    return [(c.method, float(x), float(y)) for c in curves for x, y in c.points]


@dataclass(frozen=True)
class SummaryRow:
    method: str
    mean: Fraction
    count: int


def summarize(records) -> list[SummaryRow]:
    groups: dict[str, list] = defaultdict(list)
    for r in records:
        groups[r.method].append(Fraction(r.objective))
    rows = [SummaryRow(m, sum(v) / len(v), len(v)) for m, v in groups.items()]
    rows.sort(key=lambda row: (row.mean, row.method))
    return rows


def summary_csv(rows, scale: float = 1.0) -> str:
    lines = ["method,mean,count"]
    for row in rows:
        mean = float(row.mean) / scale
        lines.append(f"{row.method},{mean!r},{row.count}")
    return "\n".join(lines) + "\n"

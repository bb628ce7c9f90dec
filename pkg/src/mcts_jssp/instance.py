"""Job-shop instances with recirculation and weighted jobs.

An instance is a list of jobs, each an ordered chain of operations pinned to
one machine. Operations get a flat id in (job, position) lexicographic order;
that order is what the FIFO rules use.

The canonical on-disk format is JSON::

    {"name": "I2", "machine_count": 2,
     "jobs": [{"weight": 1, "ops": [{"machine": 0, "duration": 3}, ...]}, ...]}

A reader for the rectangular "n m" text format used by the classic benchmark
libraries is also provided.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational

Weight = int | Fraction


class InstanceError(ValueError):
    """Raised for malformed or invalid instance documents."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


@dataclass(frozen=True)
class Operation:
    job_id: int
    op_index: int
    machine_id: int
    duration: int


@dataclass(frozen=True)
class Job:
    job_id: int
    operations: tuple[Operation, ...]
    weight: Weight = 1

    @property
    def work(self) -> int:
        return sum(op.duration for op in self.operations)


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    machine_count: int
    name: str = ""

    # Flat per-operation arrays. Computed once; the engine reads these directly.

    @cached_property
    def job_offset(self) -> tuple[int, ...]:
        offsets, total = [], 0
        for job in self.jobs:
            offsets.append(total)
            total += len(job.operations)
        return tuple(offsets)

    @cached_property
    def operations(self) -> tuple[Operation, ...]:
        return tuple(op for job in self.jobs for op in job.operations)

    @cached_property
    def op_job(self) -> tuple[int, ...]:
        return tuple(op.job_id for op in self.operations)

    @cached_property
    def op_machine(self) -> tuple[int, ...]:
        return tuple(op.machine_id for op in self.operations)

    @cached_property
    def op_duration(self) -> tuple[int, ...]:
        return tuple(op.duration for op in self.operations)

    @cached_property
    def op_has_pred(self) -> tuple[bool, ...]:
        return tuple(op.op_index > 0 for op in self.operations)

    @cached_property
    def job_last(self) -> tuple[int, ...]:
        return tuple(off + len(job.operations) - 1 for off, job in zip(self.job_offset, self.jobs))

    @cached_property
    def job_work(self) -> tuple[int, ...]:
        return tuple(job.work for job in self.jobs)

    @cached_property
    def job_size(self) -> tuple[int, ...]:
        return tuple(len(job.operations) for job in self.jobs)

    @cached_property
    def weights(self) -> tuple[Weight, ...]:
        return tuple(job.weight for job in self.jobs)

    @property
    def job_count(self) -> int:
        return len(self.jobs)

    @property
    def op_count(self) -> int:
        return len(self.operations)

    def op_id(self, job_id: int, op_index: int) -> int:
        return self.job_offset[job_id] + op_index

    def job_pred(self, op: int) -> int | None:
        """Flat id of the previous operation of the same job, if any."""
        operation = self.operations[op]
        return op - 1 if operation.op_index > 0 else None

    def last_op(self, job_id: int) -> int:
        return self.job_last[job_id]


def make_instance(
    jobs: list[list[tuple[int, int]]],
    machine_count: int | None = None,
    weights: list | None = None,
    name: str = "",
) -> Instance:
    """Build an instance from per-job lists of ``(machine, duration)`` pairs."""
    if machine_count is None:
        machine_count = 1 + max((m for ops in jobs for m, _ in ops), default=0)
    built = []
    for j, ops in enumerate(jobs):
        w = _as_weight(weights[j]) if weights is not None else 1
        operations = tuple(Operation(j, k, m, d) for k, (m, d) in enumerate(ops))
        built.append(Job(j, operations, w))
    return Instance(tuple(built), machine_count, name)


def _as_weight(value) -> Weight:
    if isinstance(value, bool):
        raise InstanceError(f"weight must be numeric, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        value = Fraction(str(value))
    elif isinstance(value, str):
        try:
            value = Fraction(value)
        except ValueError:
            raise InstanceError(f"weight is not a number: {value!r}") from None
    elif not isinstance(value, Rational):
        raise InstanceError(f"weight must be numeric, got {value!r}")
    value = Fraction(value)
    return int(value) if value.denominator == 1 else value


def validate(inst: Instance) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    if inst.machine_count < 1:
        problems.append(f"machine_count must be positive, got {inst.machine_count}")
    for position, job in enumerate(inst.jobs):
        if job.job_id != position:
            problems.append(f"job at position {position} has job_id {job.job_id}")
        if not job.operations:
            problems.append(f"job {position} has no operations")
        if job.weight < 0:
            problems.append(f"job {position} has negative weight {job.weight}")
        for k, op in enumerate(job.operations):
            tag = f"job {position} op {k}"
            if op.job_id != job.job_id:
                problems.append(f"{tag}: job_id {op.job_id} does not match its job")
            if op.op_index != k:
                problems.append(f"{tag}: op_index {op.op_index} out of order")
            if not 0 <= op.machine_id < inst.machine_count:
                problems.append(f"{tag}: machine {op.machine_id} out of range [0, {inst.machine_count})")
            if not isinstance(op.duration, int) or op.duration < 1:
                problems.append(f"{tag}: duration {op.duration!r} is not a positive integer")
    return problems


def _check(inst: Instance) -> Instance:
    problems = validate(inst)
    if problems:
        raise InstanceError("invalid instance: " + "; ".join(problems))
    return inst


def parse_instance(text: str, format: str = "json") -> Instance:
    if format == "json":
        return _parse_json(text)
    if format == "taillard":
        return _parse_taillard(text)
    raise InstanceError(f"unknown instance format {format!r}")


def _parse_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"JSON syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    try:
        machine_count = doc["machine_count"]
        raw_jobs = doc["jobs"]
    except KeyError as exc:
        raise InstanceError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(machine_count, int) or isinstance(machine_count, bool):
        raise InstanceError("machine_count must be an integer")
    if not isinstance(raw_jobs, list):
        raise InstanceError("jobs must be a list")
    jobs = []
    for j, raw in enumerate(raw_jobs):
        if not isinstance(raw, dict) or not isinstance(raw.get("ops"), list):
            raise InstanceError(f"job {j} must be an object with an 'ops' list")
        ops = []
        for k, raw_op in enumerate(raw["ops"]):
            try:
                machine, duration = raw_op["machine"], raw_op["duration"]
            except (KeyError, TypeError):
                raise InstanceError(f"job {j} op {k} needs 'machine' and 'duration'") from None
            for label, value in (("machine", machine), ("duration", duration)):
                if not isinstance(value, int) or isinstance(value, bool):
                    raise InstanceError(f"job {j} op {k}: {label} must be an integer, got {value!r}")
            ops.append(Operation(j, k, machine, duration))
        jobs.append(Job(j, tuple(ops), _as_weight(raw.get("weight", 1))))
    return _check(Instance(tuple(jobs), machine_count, str(doc.get("name", ""))))


def _parse_taillard(text: str) -> Instance:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            rows.append((lineno, stripped.split()))
    if not rows:
        raise InstanceError("empty document", 1)
    lineno, header = rows[0]
    try:
        n, m = (int(tok) for tok in header)
    except ValueError:
        raise InstanceError("header must be two integers 'n m'", lineno) from None
    if len(rows) - 1 != n:
        raise InstanceError(f"expected {n} job lines, found {len(rows) - 1}", lineno)
    jobs = []
    for j, (lineno, tokens) in enumerate(rows[1:]):
        if len(tokens) != 2 * m:
            raise InstanceError(f"expected {2 * m} integers, found {len(tokens)}", lineno)
        try:
            values = [int(tok) for tok in tokens]
        except ValueError:
            raise InstanceError("non-integer token", lineno) from None
        ops = tuple(Operation(j, k, values[2 * k], values[2 * k + 1]) for k in range(m))
        jobs.append(Job(j, ops, 1))
    return _check(Instance(tuple(jobs), m, ""))


def _weight_to_json(w: Weight):
    w = Fraction(w)
    return int(w) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def instance_to_dict(inst: Instance) -> dict:
    return {
        "name": inst.name,
        "machine_count": inst.machine_count,
        "jobs": [
            {
                "weight": _weight_to_json(job.weight),
                "ops": [{"machine": op.machine_id, "duration": op.duration} for op in job.operations],
            }
            for job in inst.jobs
        ],
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), separators=(",", ":"))


def load_instance(path) -> Instance:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    fmt = "json" if path.endswith(".json") or text.lstrip().startswith("{") else "taillard"
    inst = parse_instance(text, fmt)
    if not inst.name:
        stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
        inst = Instance(inst.jobs, inst.machine_count, stem)
    return inst


@dataclass
class InstanceStats:
    job_count: int
    machine_count: int
    op_count: int
    ops_per_job_min: int
    ops_per_job_max: int
    machine_load: list[int] = field(default_factory=list)


def instance_stats(inst: Instance) -> InstanceStats:
    load = [0] * inst.machine_count
    for op in inst.operations:
        load[op.machine_id] += op.duration
    sizes = inst.job_size or (0,)
    return InstanceStats(
        job_count=inst.job_count,
        machine_count=inst.machine_count,
        op_count=inst.op_count,
        ops_per_job_min=min(sizes),
        ops_per_job_max=max(sizes),
        machine_load=load,
    )

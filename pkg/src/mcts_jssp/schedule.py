"""Schedule representations, semi-active timing and objective evaluation.

Two views of a (possibly partial) schedule are kept interchangeable:

* ``RelativeSchedule``: the order of operations on every machine.
* ``AbsoluteSchedule``: a completion time for every scheduled operation.

``compute_times`` turns the first into the second by a forward pass over the
merged job/machine precedence graph. ``PartialSchedule`` is the mutable,
incrementally-timed version used during search.
"""

from __future__ import annotations

import csv
import io
import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from mcts_jssp.instance import Instance


class ScheduleError(ValueError):
    pass


class CycleError(ScheduleError):
    """Machine orders contradict job precedence."""


class IncompleteScheduleError(ScheduleError):
    pass


@dataclass(frozen=True)
class RelativeSchedule:
    sequences: tuple[tuple[int, ...], ...]

    @classmethod
    def empty(cls, machine_count: int) -> RelativeSchedule:
        return cls(tuple(() for _ in range(machine_count)))

    @classmethod
    def of(cls, sequences) -> RelativeSchedule:
        return cls(tuple(tuple(seq) for seq in sequences))

    def scheduled(self) -> set[int]:
        return {op for seq in self.sequences for op in seq}

    def __len__(self) -> int:
        return sum(len(seq) for seq in self.sequences)


@dataclass(frozen=True)
class AbsoluteSchedule:
    completion: dict[int, int]

    def start(self, op: int, inst: Instance) -> int:
        return self.completion[op] - inst.op_duration[op]

    def is_complete(self, inst: Instance) -> bool:
        return len(self.completion) == inst.op_count

    def to_json(self) -> str:
        return json.dumps({str(op): c for op, c in sorted(self.completion.items())})

    def to_csv(self, inst: Instance) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["op_id", "job", "machine", "start", "end"])
        for op in sorted(self.completion, key=lambda o: (self.completion[o], o)):
            writer.writerow(
                [op, inst.op_job[op], inst.op_machine[op], self.start(op, inst), self.completion[op]]
            )
        return buf.getvalue()


def _check_relative(rel: RelativeSchedule, inst: Instance) -> set[int]:
    if len(rel.sequences) != inst.machine_count:
        raise ScheduleError(f"expected {inst.machine_count} machine sequences, got {len(rel.sequences)}")
    seen: set[int] = set()
    for m, seq in enumerate(rel.sequences):
        for op in seq:
            if not 0 <= op < inst.op_count:
                raise ScheduleError(f"unknown operation id {op}")
            if op in seen:
                raise ScheduleError(f"operation {op} scheduled twice")
            if inst.op_machine[op] != m:
                raise ScheduleError(f"operation {op} belongs on machine {inst.op_machine[op]}, not {m}")
            seen.add(op)
    for op in seen:
        pred = inst.job_pred(op)
        if pred is not None and pred not in seen:
            raise ScheduleError(f"operation {op} scheduled before its job predecessor {pred}")
    return seen


def compute_times(rel: RelativeSchedule, inst: Instance) -> AbsoluteSchedule:
    """Semi-active completion times for the machine orders in ``rel``.

    Every operation starts as soon as both its machine predecessor and its job
    predecessor have finished. Runs in O(ops) via Kahn's algorithm; raises
    ``CycleError`` when the machine orders are incompatible with job order.
    """
    scheduled = _check_relative(rel, inst)
    succ: dict[int, list[int]] = {op: [] for op in scheduled}
    indeg = dict.fromkeys(scheduled, 0)
    for seq in rel.sequences:
        for a, b in zip(seq, seq[1:]):
            succ[a].append(b)
            indeg[b] += 1
    for op in scheduled:
        pred = inst.job_pred(op)
        if pred is not None:
            succ[pred].append(op)
            indeg[op] += 1

    dur = inst.op_duration
    ready_at = dict.fromkeys(scheduled, 0)
    completion: dict[int, int] = {}
    queue = deque(sorted(op for op, k in indeg.items() if k == 0))
    while queue:
        op = queue.popleft()
        end = ready_at[op] + dur[op]
        completion[op] = end
        for nxt in succ[op]:
            if end > ready_at[nxt]:
                ready_at[nxt] = end
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
    if len(completion) != len(scheduled):
        stuck = sorted(scheduled - completion.keys())
        raise CycleError(f"machine order conflicts with job precedence among operations {stuck}")
    return AbsoluteSchedule(completion)


def to_relative(abs_sched: AbsoluteSchedule, inst: Instance) -> RelativeSchedule:
    sequences: list[list[int]] = [[] for _ in range(inst.machine_count)]
    for op in sorted(abs_sched.completion, key=lambda o: (abs_sched.completion[o], o)):
        sequences[inst.op_machine[op]].append(op)
    return RelativeSchedule.of(sequences)


def job_completions(abs_sched: AbsoluteSchedule, inst: Instance) -> list[int]:
    if not abs_sched.is_complete(inst):
        missing = inst.op_count - len(abs_sched.completion)
        raise IncompleteScheduleError(f"{missing} operations are not scheduled")
    return [abs_sched.completion[inst.last_op(j)] for j in range(inst.job_count)]


def objective_weighted_completion(abs_sched: AbsoluteSchedule, inst: Instance):
    """Sum of ``w_j * C_j`` over jobs; ``C_j`` is the end of the job's last operation."""
    return sum(w * c for w, c in zip(inst.weights, job_completions(abs_sched, inst)))


def reward_bounds(inst: Instance):
    """Best and worst objective values used to normalise rewards.

    The lower bound runs every job alone on an empty shop. The upper bound
    runs jobs strictly one after another in instance order.
    """
    r_min = sum(w * p for w, p in zip(inst.weights, inst.job_work))
    r_max, clock = 0, 0
    for w, p in zip(inst.weights, inst.job_work):
        clock += p
        r_max += w * clock
    return r_min, r_max


def normalized_reward(value, r_min, r_max) -> Fraction:
    """Map an objective value to [0, 1]; 1 at ``r_min``, 0 at ``r_max`` or worse."""
    if r_max == r_min:
        return Fraction(1)
    r = Fraction(r_max - value) / Fraction(r_max - r_min)
    return min(max(r, Fraction(0)), Fraction(1))


def validate_schedule(abs_sched: AbsoluteSchedule, inst: Instance) -> list[str]:
    problems = []
    dur = inst.op_duration
    comp = abs_sched.completion
    by_machine: dict[int, list[int]] = {}
    for op, c in comp.items():
        if not 0 <= op < inst.op_count:
            problems.append(f"unknown operation id {op}")
            continue
        if c - dur[op] < 0:
            problems.append(f"operation {op} starts before time 0")
        pred = inst.job_pred(op)
        if pred is not None:
            if pred not in comp:
                problems.append(f"operation {op} scheduled without its job predecessor {pred}")
            elif c < comp[pred] + dur[op]:
                problems.append(f"precedence: operation {op} starts before {pred} completes")
        by_machine.setdefault(inst.op_machine[op], []).append(op)
    for m, ops in sorted(by_machine.items()):
        ops.sort(key=lambda o: (comp[o], o))
        for a, b in zip(ops, ops[1:]):
            if comp[b] - dur[b] < comp[a]:
                problems.append(f"overlap on machine {m}: operations {a} and {b}")
    return problems


class PartialSchedule:
    """Mutable partial schedule with incrementally maintained semi-active times.

    Machine orders are kept as doubly linked lists over flat operation ids, so
    appends and insertions are O(1) before the forward propagation of any
    right shift. ``start[op] == -1`` marks an unscheduled operation.
    """

    __slots__ = ("inst", "start", "end", "mnext", "mprev", "head", "tail", "count")

    def __init__(self, inst: Instance):
        n, m = inst.op_count, inst.machine_count
        self.inst = inst
        self.start = [-1] * n
        self.end = [-1] * n
        self.mnext = [-1] * n
        self.mprev = [-1] * n
        self.head = [-1] * m
        self.tail = [-1] * m
        self.count = 0

    def copy(self) -> PartialSchedule:
        other = PartialSchedule.__new__(PartialSchedule)
        other.inst = self.inst
        other.start = self.start[:]
        other.end = self.end[:]
        other.mnext = self.mnext[:]
        other.mprev = self.mprev[:]
        other.head = self.head[:]
        other.tail = self.tail[:]
        other.count = self.count
        return other

    def ready_time(self, op: int) -> int:
        """Completion of the job predecessor of ``op`` (0 for a first operation)."""
        if not self.inst.op_has_pred[op]:
            return 0
        r = self.end[op - 1]
        if r < 0:
            raise ScheduleError(f"job predecessor of operation {op} is not scheduled")
        return r

    def append(self, op: int) -> None:
        r = self.ready_time(op)
        m = self.inst.op_machine[op]
        last = self.tail[m]
        if last == -1:
            self.head[m] = op
            s = r
        else:
            self.mnext[last] = op
            self.mprev[op] = last
            e = self.end[last]
            s = e if e > r else r
        self.tail[m] = op
        self.start[op] = s
        self.end[op] = s + self.inst.op_duration[op]
        self.count += 1

    def find_gap(self, op: int, num: int, den: int) -> int:
        """First operation on ``op``'s machine preceded by a usable idle gap.

        The gap before an operation runs from the previous completion (or 0)
        to its start; only the part after ``op`` becomes ready counts. It
        qualifies when ``usable * den >= num * duration``. Returns -1 when
        only the open interval at the end qualifies.
        """
        r = self.ready_time(op)
        need = num * self.inst.op_duration[op]
        start, end, mnext = self.start, self.end, self.mnext
        prev_end = 0
        cur = self.head[self.inst.op_machine[op]]
        while cur != -1:
            lo = prev_end if prev_end > r else r
            if (start[cur] - lo) * den >= need:
                return cur
            prev_end = end[cur]
            cur = mnext[cur]
        return -1

    def insert_before(self, op: int, succ: int) -> None:
        """Insert ``op`` right before ``succ`` on their machine and shift successors right."""
        if succ == -1:
            self.append(op)
            return
        r = self.ready_time(op)
        prev = self.mprev[succ]
        if prev == -1:
            self.head[self.inst.op_machine[op]] = op
            s = r
        else:
            self.mnext[prev] = op
            e = self.end[prev]
            s = e if e > r else r
        self.mprev[op] = prev
        self.mnext[op] = succ
        self.mprev[succ] = op
        self.start[op] = s
        self.end[op] = s + self.inst.op_duration[op]
        self.count += 1
        self._propagate(succ)

    def _propagate(self, first: int) -> None:
        has_pred = self.inst.op_has_pred
        dur = self.inst.op_duration
        start, end, mprev, mnext = self.start, self.end, self.mprev, self.mnext
        n = len(start)
        stack = [first]
        while stack:
            v = stack.pop()
            p = mprev[v]
            s = end[p] if p != -1 else 0
            if has_pred[v] and end[v - 1] > s:
                s = end[v - 1]
            if s <= start[v]:
                continue
            start[v] = s
            end[v] = s + dur[v]
            nxt = mnext[v]
            if nxt != -1:
                stack.append(nxt)
            w = v + 1
            if w < n and has_pred[w] and start[w] >= 0:
                stack.append(w)

    def sequence(self, machine: int) -> list[int]:
        seq, cur = [], self.head[machine]
        while cur != -1:
            seq.append(cur)
            cur = self.mnext[cur]
        return seq

    def relative(self) -> RelativeSchedule:
        return RelativeSchedule.of(self.sequence(m) for m in range(self.inst.machine_count))

    def absolute(self) -> AbsoluteSchedule:
        return AbsoluteSchedule({op: e for op, e in enumerate(self.end) if e >= 0})

    def is_complete(self) -> bool:
        return self.count == self.inst.op_count

    def objective(self):
        inst = self.inst
        if not self.is_complete():
            raise IncompleteScheduleError(f"{inst.op_count - self.count} operations are not scheduled")
        end = self.end
        return sum(w * end[last] for w, last in zip(inst.weights, inst.job_last))

    @classmethod
    def from_relative(cls, rel: RelativeSchedule, inst: Instance) -> PartialSchedule:
        times = compute_times(rel, inst)
        sched = cls(inst)
        for m, seq in enumerate(rel.sequences):
            prev = -1
            for op in seq:
                sched.mprev[op] = prev
                if prev == -1:
                    sched.head[m] = op
                else:
                    sched.mnext[prev] = op
                prev = op
                sched.end[op] = times.completion[op]
                sched.start[op] = times.completion[op] - inst.op_duration[op]
            sched.tail[m] = prev
        sched.count = len(times.completion)
        return sched

"""Priority dispatching rules and greedy list scheduling.

Job-level rules pick a whole job that has not been started yet; operation-level
rules pick among the ready operations (the first unscheduled operation of
every unfinished job). Ties always go to the lowest job / operation id.
"""

from __future__ import annotations

from enum import Enum

from mcts_jssp.instance import Instance
from mcts_jssp.schedule import AbsoluteSchedule, PartialSchedule


class JobRule(Enum):
    FIFO_J = "FIFO_J"
    LWF = "LWF"
    MWF = "MWF"
    SJF = "SJF"
    LJF = "LJF"


class OpRule(Enum):
    FIFO_O = "FIFO_O"
    LWR = "LWR"
    MWR = "MWR"
    LOR = "LOR"
    MOR = "MOR"
    SPT = "SPT"
    LPT = "LPT"


Rule = JobRule | OpRule


class DispatchError(RuntimeError):
    pass


def parse_rule(name: str, level: str | None = None) -> Rule:
    """Look up a rule by name. Bare ``FIFO`` needs ``level`` ('job' or 'op')."""
    key = name.strip().upper()
    if key == "FIFO":
        if level == "job":
            return JobRule.FIFO_J
        if level == "op":
            return OpRule.FIFO_O
        raise ValueError("'FIFO' is ambiguous; use FIFO_J or FIFO_O")
    for enum in (JobRule, OpRule):
        if key in enum.__members__:
            return enum[key]
    raise ValueError(f"unknown dispatching rule {name!r}")


def _job_ranking(inst: Instance, rule: JobRule) -> list[int]:
    ids = range(inst.job_count)
    if rule is JobRule.FIFO_J:
        return list(ids)
    if rule is JobRule.LWF:
        return sorted(ids, key=lambda j: (inst.job_work[j], j))
    if rule is JobRule.MWF:
        return sorted(ids, key=lambda j: (-inst.job_work[j], j))
    if rule is JobRule.SJF:
        return sorted(ids, key=lambda j: (inst.job_size[j], j))
    return sorted(ids, key=lambda j: (-inst.job_size[j], j))


class _Tables:
    """Static per-instance rule data shared by every clone of a state."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.rankings = {rule: _job_ranking(inst, rule) for rule in JobRule}


class DispatchState:
    """Ready-set bookkeeping: next operation, remaining work and count per job."""

    __slots__ = ("tables", "next_index", "rem_work", "rem_ops", "active", "started", "cursor")

    def __init__(self, inst: Instance, tables: _Tables | None = None):
        self.tables = tables or _Tables(inst)
        self.next_index = [0] * inst.job_count
        self.rem_work = list(inst.job_work)
        self.rem_ops = list(inst.job_size)
        self.active = [j for j in range(inst.job_count) if inst.job_size[j] > 0]
        self.started = [False] * inst.job_count
        self.cursor = dict.fromkeys(JobRule, 0)

    def copy(self) -> DispatchState:
        other = DispatchState.__new__(DispatchState)
        other.tables = self.tables
        other.next_index = self.next_index[:]
        other.rem_work = self.rem_work[:]
        other.rem_ops = self.rem_ops[:]
        other.active = self.active[:]
        other.started = self.started[:]
        other.cursor = self.cursor.copy()
        return other

    @property
    def inst(self) -> Instance:
        return self.tables.inst

    def ready_ops(self) -> list[int]:
        off = self.inst.job_offset
        return [off[j] + self.next_index[j] for j in self.active]

    def unstarted_jobs(self) -> list[int]:
        return [j for j in self.active if not self.started[j]]

    def mark_scheduled(self, op: int) -> None:
        inst = self.inst
        j = inst.op_job[op]
        if inst.job_offset[j] + self.next_index[j] != op:
            raise DispatchError(f"operation {op} is not the ready operation of job {j}")
        self.started[j] = True
        self.next_index[j] += 1
        self.rem_work[j] -= inst.op_duration[op]
        self.rem_ops[j] -= 1
        if self.rem_ops[j] == 0:
            self.active.remove(j)


def select_operation(state: DispatchState, rule: OpRule, inst: Instance | None = None) -> int:
    active = state.active
    if not active:
        raise DispatchError("ready set is empty")
    inst = state.inst
    off, nxt = inst.job_offset, state.next_index
    # min/max return the first extreme element; active is sorted by job id
    if rule is OpRule.FIFO_O:
        j = active[0]
    elif rule is OpRule.LWR:
        j = min(active, key=state.rem_work.__getitem__)
    elif rule is OpRule.MWR:
        j = max(active, key=state.rem_work.__getitem__)
    elif rule is OpRule.LOR:
        j = min(active, key=state.rem_ops.__getitem__)
    elif rule is OpRule.MOR:
        j = max(active, key=state.rem_ops.__getitem__)
    else:
        dur = inst.op_duration
        pick = min if rule is OpRule.SPT else max
        j = pick(active, key=lambda k: dur[off[k] + nxt[k]])
    return off[j] + nxt[j]


def select_job(state: DispatchState, rule: JobRule, inst: Instance | None = None) -> int:
    ranking = state.tables.rankings[rule]
    pos = state.cursor[rule]
    started, rem_ops = state.started, state.rem_ops
    while pos < len(ranking):
        j = ranking[pos]
        if not started[j] and rem_ops[j] > 0:
            state.cursor[rule] = pos
            return j
        pos += 1
    state.cursor[rule] = pos
    raise DispatchError("no unstarted job left")


def greedy_dispatch(inst: Instance, rule: Rule) -> AbsoluteSchedule:
    """Build a complete schedule by repeatedly appending the rule's choice."""
    sched = PartialSchedule(inst)
    state = DispatchState(inst)
    off, size = inst.job_offset, inst.job_size
    while state.active:
        if isinstance(rule, OpRule):
            op = select_operation(state, rule)
            sched.append(op)
            state.mark_scheduled(op)
        else:
            j = select_job(state, rule)
            for op in range(off[j], off[j] + size[j]):
                sched.append(op)
                state.mark_scheduled(op)
    return sched.absolute()

"""Exact optimum of the weighted completion time for tiny instances.

For a regular objective (non-decreasing in every completion time) some
semi-active schedule is optimal, and every semi-active schedule is produced
by appending operations in some order that respects job precedence. So a
depth-first search over dispatch orders, always branching on the ready
operations, is exhaustive. Branch-and-bound cuts a branch once a lower bound
on its weighted completion time reaches the incumbent.
"""

from __future__ import annotations

from mcts_jssp.dispatch import DispatchState, OpRule, greedy_dispatch
from mcts_jssp.instance import Instance
from mcts_jssp.schedule import AbsoluteSchedule, PartialSchedule, objective_weighted_completion

DEFAULT_CAP = 9


class InstanceTooLarge(ValueError):
    pass


def _lower_bound(inst: Instance, sched: PartialSchedule, disp: DispatchState):
    # Each unfinished job's next op starts no earlier than its machine's current
    # tail and its job predecessor, then the rest of the job runs back to back.
    end, tail = sched.end, sched.tail
    off, mach = inst.job_offset, inst.op_machine
    bound = 0
    for j, w in enumerate(inst.weights):
        k = disp.next_index[j]
        if disp.rem_ops[j] == 0:
            bound += w * end[off[j] + k - 1]
            continue
        op = off[j] + k
        t = end[op - 1] if k > 0 else 0
        last = tail[mach[op]]
        if last != -1 and end[last] > t:
            t = end[last]
        bound += w * (t + disp.rem_work[j])
    return bound


def oracle_exact(inst: Instance, cap: int = DEFAULT_CAP) -> tuple:
    """Return ``(optimal objective, optimal AbsoluteSchedule)``."""
    if inst.op_count > cap:
        raise InstanceTooLarge(f"{inst.op_count} operations exceeds the oracle cap of {cap}")
    best_sched = min(
        (greedy_dispatch(inst, rule) for rule in OpRule),
        key=lambda s: objective_weighted_completion(s, inst),
    ) if inst.op_count else AbsoluteSchedule({})
    best = [objective_weighted_completion(best_sched, inst), best_sched]

    def dfs(sched: PartialSchedule, disp: DispatchState):
        if not disp.active:
            obj = sched.objective()
            if obj < best[0]:
                best[0], best[1] = obj, sched.absolute()
            return
        if _lower_bound(inst, sched, disp) >= best[0]:
            return
        for op in disp.ready_ops():
            s, d = sched.copy(), disp.copy()
            s.append(op)
            d.mark_scheduled(op)
            dfs(s, d)

    dfs(PartialSchedule(inst), DispatchState(inst))
    return best[0], best[1]


def enumerate_dispatch_orders(inst: Instance):
    """Yield the completed schedule of every dispatch order (no pruning)."""

    def walk(sched: PartialSchedule, disp: DispatchState):
        if not disp.active:
            yield sched
            return
        for op in disp.ready_ops():
            s, d = sched.copy(), disp.copy()
            s.append(op)
            d.mark_scheduled(op)
            yield from walk(s, d)

    yield from walk(PartialSchedule(inst), DispatchState(inst))


def brute_force_optimum(inst: Instance):
    return min(s.objective() for s in enumerate_dispatch_orders(inst))

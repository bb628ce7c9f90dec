import random
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcts_jssp.dispatch import OpRule, greedy_dispatch
from mcts_jssp.instance import make_instance
from mcts_jssp.oracle import brute_force_optimum
from mcts_jssp.schedule import (
    AbsoluteSchedule,
    CycleError,
    IncompleteScheduleError,
    PartialSchedule,
    RelativeSchedule,
    compute_times,
    normalized_reward,
    objective_weighted_completion,
    reward_bounds,
    to_relative,
    validate_schedule,
)

from conftest import O11, O12, O21, O22, random_dispatch_order, random_relative, tiny_instances


def longest_path_times(rel, inst):
    """Independent oracle: recursive longest path over job and machine predecessors."""
    machine_pred = {}
    for seq in rel.sequences:
        for a, b in zip(seq, seq[1:]):
            machine_pred[b] = a

    @lru_cache(maxsize=None)
    def completion(op):
        ready = 0
        if op in machine_pred:
            ready = completion(machine_pred[op])
        pred = inst.job_pred(op)
        if pred is not None:
            ready = max(ready, completion(pred))
        return ready + inst.op_duration[op]

    return {op: completion(op) for seq in rel.sequences for op in seq}


def test_compute_times_reference(i2):
    rel = RelativeSchedule.of([[O11, O22], [O21, O12]])
    times = compute_times(rel, i2)
    assert times.completion == {O11: 3, O21: 2, O12: 5, O22: 7}
    assert times.completion == longest_path_times(rel, i2)


def test_compute_times_single_op():
    inst = make_instance([[(0, 5)]])
    assert compute_times(RelativeSchedule.of([[0]]), inst).completion == {0: 5}


def test_compute_times_detects_cycle(i2):
    with pytest.raises(CycleError):
        compute_times(RelativeSchedule.of([[O22, O11], [O12, O21]]), i2)


@given(tiny_instances(), st.randoms(use_true_random=False), st.booleans())
def test_compute_times_matches_longest_path_oracle(inst, rng, partial):
    rel = random_relative(inst, rng, partial)
    assert compute_times(rel, inst).completion == longest_path_times(rel, inst)


def test_to_relative_reference(i2):
    times = AbsoluteSchedule({O11: 3, O21: 2, O12: 5, O22: 7})
    assert to_relative(times, i2) == RelativeSchedule.of([[O11, O22], [O21, O12]])


def test_to_relative_empty(i2):
    assert to_relative(AbsoluteSchedule({}), i2) == RelativeSchedule.empty(2)


def _right_shifted(inst, rng):
    # same construction as a dispatch, but every operation waits a random extra slack
    order = random_dispatch_order(inst, rng)
    machine_end = [0] * inst.machine_count
    completion = {}
    for op in order:
        pred = inst.job_pred(op)
        ready = max(machine_end[inst.op_machine[op]], completion[pred] if pred is not None else 0)
        completion[op] = ready + rng.randint(0, 5) + inst.op_duration[op]
        machine_end[inst.op_machine[op]] = completion[op]
    return AbsoluteSchedule(completion)


@given(tiny_instances(), st.randoms(use_true_random=False))
def test_left_shift_dominance(inst, rng):
    shifted = _right_shifted(inst, rng)
    assert validate_schedule(shifted, inst) == []
    rel = to_relative(shifted, inst)
    tight = compute_times(rel, inst)
    assert to_relative(tight, inst) == rel
    assert all(tight.completion[op] <= c for op, c in shifted.completion.items())
    assert objective_weighted_completion(tight, inst) <= objective_weighted_completion(shifted, inst)


@given(tiny_instances(), st.randoms(use_true_random=False), st.booleans())
def test_semi_active_round_trip(inst, rng, partial):
    rel = random_relative(inst, rng, partial)
    times = compute_times(rel, inst)
    assert to_relative(times, inst) == rel
    assert validate_schedule(times, inst) == []


def test_objective_reference(i2):
    best = AbsoluteSchedule({O11: 3, O21: 2, O12: 5, O22: 7})
    assert objective_weighted_completion(best, i2) == 12
    assert brute_force_optimum(i2) == 12


def test_objective_fifo_schedule(i2):
    fifo = greedy_dispatch(i2, OpRule.FIFO_O)
    assert fifo.completion[O12] == 5 and fifo.completion[O22] == 11
    assert objective_weighted_completion(fifo, i2) == 16


def test_objective_weighted():
    inst = make_instance([[(0, 3), (1, 2)], [(1, 2), (0, 4)]], 2, weights=[2, 1])
    best = AbsoluteSchedule({O11: 3, O21: 2, O12: 5, O22: 7})
    assert objective_weighted_completion(best, inst) == 17


def test_objective_incomplete(i2):
    with pytest.raises(IncompleteScheduleError):
        objective_weighted_completion(AbsoluteSchedule({O11: 3}), i2)


def test_reward_bounds(i2):
    assert reward_bounds(i2) == (11, 16)
    single = make_instance([[(0, 4), (1, 3)]], weights=[3])
    assert reward_bounds(single) == (21, 21)
    weighted = make_instance([[(0, 3), (1, 2)], [(1, 2), (0, 4)]], 2, weights=[2, 1])
    assert reward_bounds(weighted) == (16, 21)


@pytest.mark.parametrize("value, expected", [(12, Fraction(4, 5)), (16, 0), (11, 1), (30, 0)])
def test_normalized_reward(value, expected):
    assert normalized_reward(value, 11, 16) == expected


def test_normalized_reward_degenerate():
    assert normalized_reward(21, 21, 21) == 1


@given(st.integers(0, 100), st.integers(0, 100), st.integers(1, 100))
def test_normalized_reward_monotone(a, b, span):
    r_min, r_max = 10, 10 + span
    ra, rb = normalized_reward(r_min + a, r_min, r_max), normalized_reward(r_min + b, r_min, r_max)
    assert 0 <= ra <= 1
    if a <= b:
        assert ra >= rb


def test_validate_schedule_reference(i2):
    assert validate_schedule(AbsoluteSchedule({O11: 3, O21: 2, O12: 5, O22: 7}), i2) == []


def test_validate_schedule_overlap(i2):
    problems = validate_schedule(AbsoluteSchedule({O11: 3, O21: 2, O12: 5, O22: 6}), i2)
    assert len(problems) == 1 and "overlap" in problems[0]


def test_validate_schedule_precedence(i2):
    problems = validate_schedule(AbsoluteSchedule({O11: 4, O21: 2, O12: 5, O22: 8}), i2)
    assert len(problems) == 1 and "precedence" in problems[0]


def test_schedule_exports(i2):
    times = compute_times(RelativeSchedule.of([[O11, O22], [O21, O12]]), i2)
    assert times.to_json() == '{"0": 3, "1": 5, "2": 2, "3": 7}'
    rows = times.to_csv(i2).splitlines()
    assert rows[0] == "op_id,job,machine,start,end"
    assert rows[1] == "2,1,1,0,2"


@given(tiny_instances(), st.randoms(use_true_random=False))
def test_partial_schedule_matches_compute_times(inst, rng):
    rel = random_relative(inst, rng, partial=True)
    sched = PartialSchedule.from_relative(rel, inst)
    assert sched.relative() == rel
    assert sched.absolute() == compute_times(rel, inst)


@given(tiny_instances(), st.randoms(use_true_random=False))
def test_incremental_insertion_matches_full_recompute(inst, rng):
    # insert each next operation at a random legal position and compare to a fresh forward pass
    sched = PartialSchedule(inst)
    for op in random_dispatch_order(inst, rng):
        cands = [-1] + sched.sequence(inst.op_machine[op])
        ready = sched.ready_time(op)
        legal = [c for c in cands if c == -1 or sched.start[c] >= ready]
        sched.insert_before(op, rng.choice(legal))
        assert sched.absolute() == compute_times(sched.relative(), inst)

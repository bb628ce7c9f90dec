import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcts_jssp.dispatch import JobRule, OpRule
from mcts_jssp.harness import (
    BaselineMethod,
    MctsMethod,
    OracleMethod,
    RunRecord,
    best_of_seeds,
    parse_method,
    performance_profiles,
    read_records,
    run_batch,
    summarize,
    summary_csv,
    write_records,
)
from mcts_jssp.instance import make_instance
from mcts_jssp.mcts import SearchConfig
from mcts_jssp.oracle import InstanceTooLarge, brute_force_optimum, oracle_exact
from mcts_jssp.schedule import objective_weighted_completion, validate_schedule

from conftest import random_tiny_instance, tiny_instances


def rec(method, instance, objective, seed=0):
    return RunRecord(instance, method, objective, 0.0, 0.0, seed)


def test_oracle_reference(i2):
    obj, sched = oracle_exact(i2)
    assert obj == 12
    assert objective_weighted_completion(sched, i2) == 12
    assert validate_schedule(sched, i2) == []


def test_oracle_single_job():
    inst = make_instance([[(0, 2), (1, 3), (0, 4)]], weights=[3])
    assert oracle_exact(inst)[0] == 27


def test_oracle_disjoint_machines():
    inst = make_instance([[(0, 2)], [(1, 5)], [(2, 7)]], 3, weights=[1, 2, 3])
    assert oracle_exact(inst)[0] == 2 + 10 + 21


def test_oracle_cap():
    inst = make_instance([[(0, 1)] * 5, [(0, 1)] * 5])
    with pytest.raises(InstanceTooLarge):
        oracle_exact(inst)
    assert oracle_exact(inst, cap=10)[0] > 0


@given(tiny_instances(max_jobs=3, max_ops_per_job=3))
def test_oracle_matches_exhaustive_enumeration(inst):
    if inst.op_count > 7:
        return
    assert oracle_exact(inst)[0] == brute_force_optimum(inst)


def _tiny_suite():
    rng = random.Random(8)
    insts = [random_tiny_instance(rng, max_jobs=3, max_ops=6) for _ in range(2)]
    return [make_instance([[(o.machine_id, o.duration) for o in j.operations] for j in i.jobs],
                          i.machine_count, list(i.weights), name=f"t{n}") for n, i in enumerate(insts)]


METHODS = [
    OracleMethod(),
    BaselineMethod(OpRule.SPT),
    MctsMethod("1.4", SearchConfig(iterations=30, rollouts=5)),
]


def test_run_batch_cardinality_and_resume(tmp_path):
    csv_path = tmp_path / "runs.csv"
    insts = _tiny_suite()
    first = run_batch(insts, METHODS, [0], csv_path)
    assert len(first) == 6
    assert run_batch(insts, METHODS, [0], csv_path) == []
    assert len(read_records(csv_path)) == 6
    assert csv_path.read_text().startswith("# runrecord v1\n")
    extra = run_batch(insts, METHODS, [0, 1], csv_path)
    assert len(extra) == 6


def test_run_batch_oracle_bounds_mcts():
    records = run_batch(_tiny_suite(), METHODS, [0, 1, 2])
    oracle = {r.instance: r.objective for r in records if r.method == "oracle"}
    for r in records:
        assert r.objective >= oracle[r.instance]
        assert 0 <= r.normalized_reward <= 1


def test_run_batch_continues_after_failure(caplog):
    big = make_instance([[(0, 1)] * 10], name="big")
    records = run_batch([big] + _tiny_suite(), [OracleMethod()], [0])
    assert sorted(r.instance for r in records) == ["t0", "t1"]
    assert "big" in caplog.text


def test_run_batch_in_parallel(tmp_path):
    serial = run_batch(_tiny_suite(), METHODS[:2], [0])
    parallel = run_batch(_tiny_suite(), METHODS[:2], [0], workers=2)
    strip = lambda rs: sorted((r.instance, r.method, r.objective) for r in rs)  # noqa: E731
    assert strip(serial) == strip(parallel)


def test_records_round_trip(tmp_path):
    path = tmp_path / "r.csv"
    records = [RunRecord("a", "pdr:SPT", 12, 0.8, 1.5, 0, "k1"), RunRecord("b", "oracle", Fraction(7, 2), 0.1, 2.0, 3, "k2")]
    write_records(path, records)
    back = read_records(path)
    assert [(r.instance, r.objective, r.seed, r.key) for r in back] == [("a", 12, 0, "k1"), ("b", Fraction(7, 2), 3, "k2")]


def test_parse_method():
    assert parse_method("oracle") == OracleMethod()
    assert parse_method("pdr:lwf") == BaselineMethod(JobRule.LWF)
    method = parse_method("mcts:4.1")
    assert method.env == "4.1" and method.method_id.startswith("mcts:4.1:")
    with pytest.raises(ValueError):
        parse_method("random")
    with pytest.raises(KeyError):
        parse_method("mcts:9.9")


def test_best_of_seeds():
    records = [rec("m", "i", 10, 0), rec("m", "i", 7, 1), rec("m", "j", 3, 0)]
    assert sorted((r.instance, r.objective) for r in best_of_seeds(records)) == [("i", 7), ("j", 3)]


def test_profile_hand_example():
    records = [rec("a", "i1", 10), rec("a", "i2", 20), rec("b", "i1", 12), rec("b", "i2", 18)]
    curves = {c.method: c for c in performance_profiles(records)}
    a, b = curves["a"], curves["b"]
    assert a.points == [(1, Fraction(1, 2)), (Fraction(10, 9), 1)]
    assert b.points == [(1, Fraction(1, 2)), (Fraction(6, 5), 1)]
    assert a(1.0) == b(1.0) == Fraction(1, 2)
    assert a(1.15) == 1 and b(1.15) == Fraction(1, 2)
    assert a(1.2) == b(1.2) == 1
    assert a(0.99) == 0


def test_profile_single_method():
    curve = performance_profiles([rec("a", "i1", 5), rec("a", "i2", 9)])[0]
    assert curve(1) == 1 and curve(7) == 1


def test_profile_dominated_method():
    records = [rec("a", "i1", 5), rec("a", "i2", 9), rec("b", "i1", 6), rec("b", "i2", 10)]
    curves = {c.method: c for c in performance_profiles(records)}
    assert curves["b"](1) == 0 and curves["a"](1) == 1


def test_profile_errors():
    with pytest.raises(ValueError):
        performance_profiles([])
    with pytest.raises(ValueError):
        performance_profiles([rec("a", "i", 1), rec("a", "i", 2, seed=1)])


@given(st.lists(st.lists(st.integers(1, 50), min_size=3, max_size=3), min_size=1, max_size=6))
def test_profile_properties(table):
    records = [rec(f"m{m}", f"i{i}", row[m]) for i, row in enumerate(table) for m in range(3)]
    curves = performance_profiles(records)
    assert sum(c(1) for c in curves) >= 1
    for c in curves:
        ys = [y for _, y in c.points]
        assert ys == sorted(ys) and ys[-1] == 1 and all(0 < y <= 1 for y in ys)
        assert c(c.points[-1][0]) == 1


def test_summarize():
    rows = summarize([rec("a", "i1", 10), rec("a", "i2", 20)])
    assert rows[0].mean == 15 and rows[0].count == 2
    rows = summarize([rec("a", "i1", 10), rec("b", "i1", 4), rec("b", "i2", 5)])
    assert [r.method for r in rows] == ["b", "a"]
    assert rows[0].mean == Fraction(9, 2)


def test_summary_csv_scaling():
    rows = summarize([rec("a", "i1", 300000000), rec("a", "i2", 100000001)])
    assert summary_csv(rows).splitlines()[1] == "a,200000000.5,2"
    assert summary_csv(rows, scale=1e8).splitlines()[1] == "a,2.000000005,2"

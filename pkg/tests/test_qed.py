"""Query batching: queue, merge, run accounting, comparisons."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edpsim import (
    STOCK,
    CostParams,
    Predicate,
    Query,
    QueryQueue,
    SelectionEnv,
    accumulate,
    compare_runs,
    execute_selection,
    generate_table,
    merge_batch,
    run_qed,
    run_sequential,
    split_results,
)


def queries_over(table, values_per_query):
    return [
        Query(f"q{i}", table.name, Predicate(table.column, frozenset(values)))
        for i, values in enumerate(values_per_query)
    ]


@pytest.fixture()
def small_env(config):
    table = generate_table("t", 600, 12, seed=5)
    costs = CostParams(10.0, 1.0, 5.0, 0.001, 0.01)
    return SelectionEnv(table=table, cpu=config.cpu, disk=config.disk, costs=costs)


# ------------------------------------------------------------------ queue


def test_queue_drains_fifo_at_threshold():
    queue = QueryQueue(threshold=3)
    qs = [Query(f"q{i}", "t", Predicate("key", {i + 1})) for i in range(5)]
    assert accumulate(queue, qs[0]) is None
    assert accumulate(queue, qs[1]) is None
    batch = accumulate(queue, qs[2])
    assert [q.id for q in batch] == ["q0", "q1", "q2"]
    assert queue.pending == []
    assert accumulate(queue, qs[3]) is None
    assert [q.id for q in queue.pending] == ["q3"]


def test_queue_requires_positive_threshold():
    with pytest.raises(ValueError):
        QueryQueue(threshold=0)


def test_threshold_one_drains_immediately():
    queue = QueryQueue(threshold=1)
    q = Query("q", "t", Predicate("key", {1}))
    assert accumulate(queue, q) == [q]


# ------------------------------------------------------------------ merge


def test_merge_batch_unions_values(small_env):
    table = small_env.table
    qs = queries_over(table, [{1, 2}, {3}, {2, 4}])
    merged = merge_batch(qs)
    assert merged.predicate.values == frozenset({1, 2, 3, 4})
    assert merged.table == table.name


def test_merge_batch_rejects_mixed_tables():
    qs = [
        Query("a", "t1", Predicate("key", {1})),
        Query("b", "t2", Predicate("key", {2})),
    ]
    with pytest.raises(ValueError):
        merge_batch(qs)


def test_merge_batch_rejects_mixed_columns():
    qs = [
        Query("a", "t", Predicate("k1", {1})),
        Query("b", "t", Predicate("k2", {2})),
    ]
    with pytest.raises(ValueError):
        merge_batch(qs)


def test_merge_batch_rejects_empty():
    with pytest.raises(ValueError):
        merge_batch([])


# ------------------------------------------------------------------- runs


def test_sequential_responses_are_prefix_sums(config, small_env):
    qs = queries_over(small_env.table, [{1}, {2}, {3}])
    run = run_sequential(qs, small_env)
    elapsed = [
        execute_selection(small_env, q, STOCK).elapsed_s for q in qs
    ]
    assert run.responses["q0"] == pytest.approx(elapsed[0], rel=1e-12)
    assert run.responses["q1"] == pytest.approx(elapsed[0] + elapsed[1], rel=1e-12)
    assert run.responses["q2"] == pytest.approx(sum(elapsed), rel=1e-12)
    assert run.batch_index == {"q0": 0, "q1": 1, "q2": 2}
    assert run.total_elapsed_s == pytest.approx(sum(elapsed), rel=1e-12)


def test_sequential_rejects_duplicate_ids(small_env):
    q = Query("dup", "t", Predicate("key", {1}))
    with pytest.raises(ValueError):
        run_sequential([q, q], small_env)


def test_qed_threshold_one_equals_sequential(small_env):
    qs = queries_over(small_env.table, [{1}, {2}, {3}, {4}])
    seq = run_sequential(qs, small_env)
    qed = run_qed(qs, 1, small_env)
    for qid in seq.responses:
        assert qed.responses[qid] == pytest.approx(seq.responses[qid], abs=1e-9)
    assert qed.total_energy_j == pytest.approx(seq.total_energy_j, rel=1e-9)
    report = compare_runs(seq, qed)
    assert report.energy_ratio == pytest.approx(1.0, abs=1e-9)
    assert report.avg_response_ratio == pytest.approx(1.0, abs=1e-9)


def test_qed_single_batch_responds_together(small_env):
    qs = queries_over(small_env.table, [{1}, {2}, {3}, {4}, {5}])
    run = run_qed(qs, 5, small_env)
    values = set(run.responses.values())
    assert len(values) == 1
    assert all(i == 0 for i in run.batch_index.values())


def test_qed_batches_accumulate_on_one_clock(small_env):
    qs = queries_over(small_env.table, [{1}, {2}, {3}, {4}])
    run = run_qed(qs, 2, small_env)
    first = run.responses["q0"]
    assert run.responses["q1"] == first
    second = run.responses["q2"]
    assert second > first
    assert run.responses["q3"] == second
    assert run.batch_index == {"q0": 0, "q1": 0, "q2": 1, "q3": 1}
    assert run.total_elapsed_s == pytest.approx(second, rel=1e-12)


def test_qed_rejects_ragged_workload_without_flush(small_env):
    qs = queries_over(small_env.table, [{1}, {2}, {3}])
    with pytest.raises(ValueError):
        run_qed(qs, 2, small_env)
    run = run_qed(qs, 2, small_env, flush_partial=True)
    assert run.batch_index == {"q0": 0, "q1": 0, "q2": 1}


def test_qed_amortizes_fixed_overheads(config):
    """With nothing but fixed per-statement overheads, batching k queries
    into one statement divides per-query energy by k."""
    table = generate_table("t", 100, 10, seed=2)
    costs = CostParams(0.0, 0.0, 0.0, 1.0, 10.0)
    env = SelectionEnv(table=table, cpu=config.cpu, disk=config.disk, costs=costs)
    qs = queries_over(table, [{i + 1} for i in range(5)])
    seq = run_sequential(qs, env)
    qed = run_qed(qs, 5, env)
    report = compare_runs(seq, qed)
    assert report.energy_ratio == pytest.approx(1.0 / 5.0, rel=1e-12)


def test_compare_runs_requires_same_query_set(small_env):
    qs = queries_over(small_env.table, [{1}, {2}])
    seq = run_sequential(qs, small_env)
    other = run_sequential(qs[:1], small_env)
    with pytest.raises(ValueError):
        compare_runs(seq, other)


def test_compare_runs_edp_is_product(small_env):
    qs = queries_over(small_env.table, [{1}, {2}, {3}, {4}])
    seq = run_sequential(qs, small_env)
    qed = run_qed(qs, 2, small_env)
    report = compare_runs(seq, qed)
    assert report.edp_ratio == pytest.approx(
        report.energy_ratio * report.avg_response_ratio, rel=1e-12
    )


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 2**31 - 1), k=st.integers(1, 10))
def test_qed_result_fidelity_random_batches(config, seed, k):
    """Batched execution returns exactly the rows each member would get
    alone, whatever the batch size."""
    rng = np.random.default_rng(seed)
    table = generate_table("t", 300, 15, seed=seed)
    costs = CostParams(10.0, 1.0, 5.0, 0.001, 0.01)
    env = SelectionEnv(table=table, cpu=config.cpu, disk=config.disk, costs=costs)
    qs = queries_over(
        table, [set(rng.integers(1, 16, size=rng.integers(1, 4)).tolist()) for _ in range(k)]
    )
    merged = merge_batch(qs)
    split = split_results(execute_selection(env, merged, STOCK), merged, table)
    for q in qs:
        oracle = execute_selection(env, q, STOCK).result_rows[q.id]
        assert np.array_equal(split.result_rows[q.id], oracle)

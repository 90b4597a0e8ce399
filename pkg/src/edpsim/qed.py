"""Delayed-batching scheduler for selection queries.

Incoming queries queue at a master until a threshold K is reached, the
batch is merged into one disjunctive query, executed once, and the result
rows are routed back to the members.  Merging trades response time for
energy: one statement pays one fixed overhead instead of K, at the price
of everybody waiting for the merged scan.

Accounting rules: the run clock starts when the first batch is dispatched;
batches dispatch back to back; a query's response time is the completion
time of its batch on that clock.  Time spent collecting a batch is not
counted.  The sequential baseline runs the same queries one at a time with
zero think time, so the i-th response is the prefix sum of elapsed times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import (
    MergedQuery,
    Predicate,
    Query,
    SelectionEnv,
    execute_selection,
    split_results,
)
from .power_model import STOCK, PvcSetting


@dataclass
class QueryQueue:
    """Accumulates queries until `threshold` are pending, then drains.

    Single-threaded state machine; the one mutable object in the package.
    """

    threshold: int
    pending: list[Query] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if len(self.pending) >= self.threshold:
            raise ValueError("pending must start below the threshold")


def accumulate(queue: QueryQueue, query: Query) -> list[Query] | None:
    """Enqueue one query; return the drained FIFO batch when full."""
    queue.pending.append(query)
    if len(queue.pending) == queue.threshold:
        batch = list(queue.pending)
        queue.pending.clear()
        return batch
    return None


def merge_batch(batch: list[Query]) -> MergedQuery:
    """Union the member predicates into one merged query.

    Members must target the same table and column; member order (and each
    member's sorted terms) defines the evaluation order of the disjunction.
    """
    if not batch:
        raise ValueError("cannot merge an empty batch")
    table = batch[0].table
    column = batch[0].predicate.column
    for q in batch[1:]:
        if q.table != table:
            raise ValueError(f"mixed tables in batch: {q.table!r} vs {table!r}")
        if q.predicate.column != column:
            raise ValueError(
                f"mixed columns in batch: {q.predicate.column!r} vs {column!r}"
            )
    union: frozenset[int] = frozenset().union(*(q.predicate.values for q in batch))
    return MergedQuery(
        members=tuple(batch), table=table, predicate=Predicate(column, union)
    )


@dataclass(frozen=True)
class WorkloadRun:
    """Per-query responses and totals for one scheme over one workload."""

    scheme: str
    responses: dict[str, float]
    batch_index: dict[str, int]
    total_cpu_energy_j: float
    total_disk_energy_j: float
    total_elapsed_s: float

    @property
    def total_energy_j(self) -> float:
        return self.total_cpu_energy_j + self.total_disk_energy_j

    @property
    def avg_response_s(self) -> float:
        return sum(self.responses.values()) / len(self.responses)


@dataclass(frozen=True)
class ComparisonReport:
    """Batched-over-sequential ratios; edp_ratio is their product."""

    energy_ratio: float
    avg_response_ratio: float
    edp_ratio: float


def run_sequential(
    queries: list[Query], env: SelectionEnv, setting: PvcSetting = STOCK
) -> WorkloadRun:
    """Run queries one at a time with zero think time."""
    if not queries:
        raise ValueError("workload is empty")
    responses: dict[str, float] = {}
    batch_index: dict[str, int] = {}
    clock = 0.0
    cpu_e = 0.0
    disk_e = 0.0
    for i, q in enumerate(queries):
        if q.id in responses:
            raise ValueError(f"duplicate query id {q.id!r}")
        report = execute_selection(env, q, setting)
        clock += report.elapsed_s
        responses[q.id] = clock
        batch_index[q.id] = i
        cpu_e += report.cpu_energy_j
        disk_e += report.disk_energy_j
    return WorkloadRun(
        scheme="sequential",
        responses=responses,
        batch_index=batch_index,
        total_cpu_energy_j=cpu_e,
        total_disk_energy_j=disk_e,
        total_elapsed_s=clock,
    )


def run_qed(
    queries: list[Query],
    threshold: int,
    env: SelectionEnv,
    setting: PvcSetting = STOCK,
    flush_partial: bool = False,
) -> WorkloadRun:
    """Batch the workload through the queue and execute merged queries.

    The workload length must be a multiple of the threshold unless
    flush_partial allows a final short batch.
    """
    if not queries:
        raise ValueError("workload is empty")
    if len(queries) % threshold != 0 and not flush_partial:
        raise ValueError(
            f"workload of {len(queries)} queries is not a multiple of "
            f"threshold {threshold} (pass flush_partial=True to allow)"
        )
    queue = QueryQueue(threshold)
    batches: list[list[Query]] = []
    for q in queries:
        batch = accumulate(queue, q)
        if batch is not None:
            batches.append(batch)
    if queue.pending and flush_partial:
        batches.append(list(queue.pending))
        queue.pending.clear()

    responses: dict[str, float] = {}
    batch_index: dict[str, int] = {}
    clock = 0.0
    cpu_e = 0.0
    disk_e = 0.0
    for idx, batch in enumerate(batches):
        merged = merge_batch(batch)
        report = execute_selection(env, merged, setting)
        split_results(report, merged, env.table)  # verifies routing
        clock += report.elapsed_s
        for q in batch:
            if q.id in responses:
                raise ValueError(f"duplicate query id {q.id!r}")
            responses[q.id] = clock
            batch_index[q.id] = idx
        cpu_e += report.cpu_energy_j
        disk_e += report.disk_energy_j
    return WorkloadRun(
        scheme="qed",
        responses=responses,
        batch_index=batch_index,
        total_cpu_energy_j=cpu_e,
        total_disk_energy_j=disk_e,
        total_elapsed_s=clock,
    )


def compare_runs(seq: WorkloadRun, qed: WorkloadRun) -> ComparisonReport:
    """Per-query energy and mean-response ratios of two runs of the same
    query set, batched over sequential."""
    if set(seq.responses) != set(qed.responses):
        raise ValueError("runs cover different query id sets")
    energy_ratio = qed.total_energy_j / seq.total_energy_j
    response_ratio = qed.avg_response_s / seq.avg_response_s
    return ComparisonReport(
        energy_ratio=energy_ratio,
        avg_response_ratio=response_ratio,
        edp_ratio=energy_ratio * response_ratio,
    )

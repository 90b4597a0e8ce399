"""Single-table selection engine with a cycle-accounted cost model.

Tables are a dense array of integer keys.  Queries are membership
predicates over the key column and always run as full scans; there is no
index, so cost never depends on which rows match except through the
explicit result-row terms.

The scan cost model charges, per row, a fixed row-handling cost plus one
predicate-term evaluation cost for every disjunctive term actually
evaluated.  Terms are checked in order and evaluation stops at the first
match, so a row matching the j-th term costs j evaluations and a
non-matching row costs all of them.  Merged queries additionally pay a
result-routing cost per result row, and every query pays a fixed
per-statement overhead in time and energy (client round trip, parse,
optimize).  The fixed overhead is what a batch of merged queries
amortizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
import csv

import numpy as np

from .power_model import (
    CpuModel,
    DiskModel,
    PvcSetting,
    cpu_active_power,
    disk_read_sim,
    operating_point,
)

BUFFER_STATES = ("warm", "cold")


def _frozen_keys(keys: np.ndarray) -> np.ndarray:
    arr = np.asarray(keys, dtype=np.int64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Table:
    """In-memory relation: one non-negative integer key column, row ids
    dense from 0."""

    name: str
    column: str
    keys: np.ndarray
    domain: frozenset[int]
    size_kb: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "keys", _frozen_keys(self.keys))
        if self.keys.ndim != 1 or len(self.keys) == 0:
            raise ValueError("table must have a non-empty 1-d key column")
        if self.domain and min(self.domain) < 0:
            raise ValueError("key domain must be non-negative")
        if self.size_kb <= 0.0:
            raise ValueError("size_kb must be > 0")
        present = set(np.unique(self.keys).tolist())
        if not present <= self.domain:
            raise ValueError("every key value must lie in the declared domain")

    @property
    def row_count(self) -> int:
        return len(self.keys)

    def rows(self):
        """Iterate (row_id, key_value) pairs."""
        for i, k in enumerate(self.keys.tolist()):
            yield i, k


@dataclass(frozen=True)
class Predicate:
    """Disjunctive membership test on one column: column IN values."""

    column: str
    values: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", frozenset(self.values))
        if not self.values:
            raise ValueError("predicate needs at least one value")

    @property
    def terms(self) -> tuple[int, ...]:
        """Evaluation order of the disjunction for a stand-alone query."""
        return tuple(sorted(self.values))


@dataclass(frozen=True)
class Query:
    id: str
    table: str
    predicate: Predicate


@dataclass(frozen=True)
class MergedQuery:
    """Union of member queries over the same table and column.

    The disjunction keeps member order: evaluation walks member predicates
    first-come-first-served, each member's own terms in sorted order.
    """

    members: tuple[Query, ...]
    table: str
    predicate: Predicate

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("merged query needs at least one member")

    @property
    def member_ids(self) -> tuple[str, ...]:
        return tuple(q.id for q in self.members)

    @property
    def id(self) -> str:
        return "merged(" + ",".join(self.member_ids) + ")"

    @property
    def terms(self) -> tuple[int, ...]:
        out: list[int] = []
        for q in self.members:
            out.extend(q.predicate.terms)
        return tuple(out)


@dataclass(frozen=True)
class CostParams:
    """Calibration constants of the scan cost model."""

    cycles_scan_per_row: float
    cycles_per_predicate_term_per_row: float
    cycles_split_per_result_row: float
    fixed_overhead_time_per_query: float
    fixed_overhead_energy_per_query: float
    buffer_state: str = "warm"

    def __post_init__(self) -> None:
        for name in (
            "cycles_scan_per_row",
            "cycles_per_predicate_term_per_row",
            "cycles_split_per_result_row",
            "fixed_overhead_time_per_query",
            "fixed_overhead_energy_per_query",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.buffer_state not in BUFFER_STATES:
            raise ValueError(f"buffer_state must be one of {BUFFER_STATES}")


@dataclass(frozen=True)
class WorkProfile:
    """Aggregate work of a whole workload: a CPU cycle budget plus a disk
    volume.  alpha is the CPU-bound fraction of stock elapsed time and is
    derived from the other fields, never set freely."""

    cpu_cycles: float
    disk_kb: float
    disk_pattern: str
    disk_block_kb: float
    alpha: float

    def __post_init__(self) -> None:
        if self.cpu_cycles < 0.0 or self.disk_kb < 0.0:
            raise ValueError("cpu_cycles and disk_kb must be >= 0")
        if self.disk_pattern not in ("sequential", "random"):
            raise ValueError(f"unknown disk pattern {self.disk_pattern!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")

    @staticmethod
    def build(
        cpu_cycles: float,
        disk_kb: float,
        disk_pattern: str,
        disk_block_kb: float,
        cpu: CpuModel,
        disk: DiskModel,
    ) -> "WorkProfile":
        """Construct with alpha computed from the stock operating point."""
        from .power_model import STOCK

        freq, _ = operating_point(cpu, STOCK)
        cpu_time = cpu_cycles / freq
        disk_time = 0.0
        if disk_kb > 0.0:
            disk_time = disk_read_sim(disk, disk_pattern, disk_block_kb, disk_kb).elapsed_s
        total = cpu_time + disk_time
        alpha = 1.0 if total == 0.0 else cpu_time / total
        return WorkProfile(cpu_cycles, disk_kb, disk_pattern, disk_block_kb, alpha)


@dataclass(frozen=True)
class ExecutionReport:
    """What one execution cost and what it returned.  result_rows maps a
    query id to the row ids satisfying it; treat the mapping as read-only."""

    elapsed_s: float
    cpu_energy_j: float
    disk_energy_j: float
    result_rows: dict[str, np.ndarray]


@dataclass(frozen=True)
class SelectionEnv:
    """Everything needed to execute selections: the table, the hardware
    models and the cost calibration."""

    table: Table
    cpu: CpuModel
    disk: DiskModel
    costs: CostParams


def generate_table(
    name: str,
    row_count: int,
    domain_size: int,
    seed: int,
    kb_per_row: float = 0.1,
    column: str = "key",
) -> Table:
    """Seeded table whose keys are iid uniform draws from 1..domain_size."""
    if row_count <= 0 or domain_size <= 0:
        raise ValueError("row_count and domain_size must be > 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    keys = rng.integers(1, domain_size + 1, size=row_count, dtype=np.int64)
    return Table(
        name=name,
        column=column,
        keys=keys,
        domain=frozenset(range(1, domain_size + 1)),
        size_kb=row_count * kb_per_row,
    )


def table_to_csv(table: Table, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_id", "key_value"])
        for row_id, key in table.rows():
            writer.writerow([row_id, key])


def table_from_csv(
    path: str | Path,
    name: str,
    column: str = "key",
    domain: frozenset[int] | None = None,
    kb_per_row: float = 0.1,
) -> Table:
    """Load a table exported by table_to_csv.  Row ids must be dense from 0."""
    keys: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["row_id", "key_value"]:
            raise ValueError(f"unexpected table header {header!r}")
        for expected, row in enumerate(reader):
            row_id, key = int(row[0]), int(row[1])
            if row_id != expected:
                raise ValueError(f"row ids must be dense from 0, got {row_id}")
            keys.append(key)
    arr = np.asarray(keys, dtype=np.int64)
    if domain is None:
        domain = frozenset(np.unique(arr).tolist())
    return Table(
        name=name, column=column, keys=arr, domain=domain, size_kb=len(keys) * kb_per_row
    )


def _check_bound(table: Table, query: Query | MergedQuery) -> None:
    if query.table != table.name:
        raise ValueError(f"unknown table {query.table!r} (have {table.name!r})")
    if query.predicate.column != table.column:
        raise ValueError(
            f"unknown column {query.predicate.column!r} (have {table.column!r})"
        )
    if not query.predicate.values <= table.domain:
        missing = sorted(query.predicate.values - table.domain)
        raise ValueError(f"predicate values outside the table domain: {missing}")


def _evaluated_terms(table: Table, terms: tuple[int, ...]) -> tuple[np.ndarray, float]:
    """Match mask plus the total number of term evaluations over the scan.

    Terms are checked in order with short-circuit on first match, so a row
    whose key equals the j-th term costs j evaluations (1-based) and a row
    matching nothing costs len(terms).
    """
    n_terms = len(terms)
    lut_size = max(int(table.keys.max()), max(terms)) + 1
    # first-occurrence position of each value, 1-based; misses cost n_terms
    cost_lut = np.full(lut_size, n_terms, dtype=np.int64)
    match_lut = np.zeros(lut_size, dtype=bool)
    for pos, value in enumerate(terms):
        if not match_lut[value]:
            cost_lut[value] = pos + 1
            match_lut[value] = True
    mask = match_lut[table.keys]
    evaluated = float(cost_lut[table.keys].sum())
    return mask, evaluated


def execute_selection(
    env: SelectionEnv, query: Query | MergedQuery, setting: PvcSetting
) -> ExecutionReport:
    """Full-scan execution of one plain or merged selection.

    Splitting a merged result back to its members is charged here (per
    result row); singleton merges route trivially and are not charged.
    """
    table = env.table
    _check_bound(table, query)
    freq, volt = operating_point(env.cpu, setting)
    active_power = cpu_active_power(env.cpu, volt, freq)

    terms = query.terms if isinstance(query, MergedQuery) else query.predicate.terms
    mask, evaluated = _evaluated_terms(table, terms)
    rows = np.flatnonzero(mask)

    cycles = table.row_count * env.costs.cycles_scan_per_row
    cycles += evaluated * env.costs.cycles_per_predicate_term_per_row
    if isinstance(query, MergedQuery) and len(query.members) > 1:
        cycles += len(rows) * env.costs.cycles_split_per_result_row

    busy = cycles / freq
    disk_time = 0.0
    disk_energy = 0.0
    if env.costs.buffer_state == "cold":
        # cold buffer pool: the whole table comes off the disk sequentially
        report = disk_read_sim(env.disk, "sequential", table.size_kb, table.size_kb)
        disk_time = report.elapsed_s
        disk_energy = report.energy_j

    elapsed = env.costs.fixed_overhead_time_per_query + busy + disk_time
    cpu_energy = (
        active_power * busy
        + env.cpu.idle_power_w * disk_time
        + env.costs.fixed_overhead_energy_per_query
    )
    return ExecutionReport(
        elapsed_s=elapsed,
        cpu_energy_j=cpu_energy,
        disk_energy_j=disk_energy,
        result_rows={query.id: rows},
    )


def split_results(
    report: ExecutionReport, merged: MergedQuery, table: Table
) -> ExecutionReport:
    """Route every merged result row to each member whose predicate it
    satisfies.  The routing cost was already charged by execute_selection;
    this step materializes and verifies the per-member map."""
    if merged.id not in report.result_rows:
        raise ValueError("report does not carry the merged result")
    rows = report.result_rows[merged.id]
    keys = table.keys[rows]
    routed: dict[str, np.ndarray] = {}
    claimed = np.zeros(len(rows), dtype=bool)
    for member in merged.members:
        values = np.fromiter(member.predicate.values, dtype=np.int64)
        member_mask = np.isin(keys, values)
        routed[member.id] = rows[member_mask]
        claimed |= member_mask
    if not claimed.all():
        orphan = int(rows[~claimed][0])
        raise ValueError(f"result row {orphan} matches no member predicate")
    return ExecutionReport(
        elapsed_s=report.elapsed_s,
        cpu_energy_j=report.cpu_energy_j,
        disk_energy_j=report.disk_energy_j,
        result_rows=routed,
    )


def execute_profile(
    profile: WorkProfile, cpu: CpuModel, disk: DiskModel, setting: PvcSetting
) -> ExecutionReport:
    """Run an aggregate work profile under one voltage/frequency setting.

    The CPU part stretches by 1/(1-u); the disk part is setting-invariant.
    CPU energy is charged at active power for the busy time only, which
    makes it proportional to V^2 * cycles and independent of frequency.
    """
    freq, volt = operating_point(cpu, setting)
    busy = profile.cpu_cycles / freq
    disk_time = 0.0
    disk_energy = 0.0
    if profile.disk_kb > 0.0:
        report = disk_read_sim(
            disk, profile.disk_pattern, profile.disk_block_kb, profile.disk_kb
        )
        disk_time = report.elapsed_s
        disk_energy = report.energy_j
    return ExecutionReport(
        elapsed_s=busy + disk_time,
        cpu_energy_j=cpu_active_power(cpu, volt, freq) * busy,
        disk_energy_j=disk_energy,
        result_rows={},
    )

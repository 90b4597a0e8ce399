"""Workload generation and the calibrated reference fixtures.

Two workload families: batches of single-column selections (optionally
pairwise disjoint, which models the no-overlap construction used for
batching experiments) and replicated aggregate work profiles for sweep
measurements.

Fixtures are named, calibrated model instances loaded from the packaged
fixtures.cfg.  Each carries notes naming the measured values it was
calibrated against; scripts/calibrate_fixtures.py re-derives the file.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .config import data_path
from .engine import CostParams, Predicate, Query, Table, WorkProfile
from .power_model import CpuModel, DiskModel

FIXTURES_CONFIG_NAME = "fixtures.cfg"
REQUIRED_FIXTURES = (
    "q5_commercial_warm",
    "q5_commercial_cold",
    "q5_mysql_memory",
    "qed_lineitem",
)


@dataclass(frozen=True)
class SelectionWorkloadSpec:
    """Shape of a generated selection workload."""

    query_count: int
    domain_size: int = 50
    terms_per_query: int = 1
    non_overlapping: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.query_count < 1:
            raise ValueError("query_count must be >= 1")
        if self.domain_size < 1:
            raise ValueError("domain_size must be >= 1")
        if self.terms_per_query < 1:
            raise ValueError("terms_per_query must be >= 1")
        if self.non_overlapping:
            needed = self.query_count * self.terms_per_query
            if needed > self.domain_size:
                raise ValueError(
                    f"cannot draw {needed} disjoint values from a domain of "
                    f"{self.domain_size}"
                )


def gen_selection_workload(
    spec: SelectionWorkloadSpec, table: str = "lineitem", column: str = "l_quantity"
) -> list[Query]:
    """Deterministic selection workload over the value domain 1..domain_size.

    With non_overlapping the predicates are pairwise disjoint slices of a
    seeded permutation, so query_count * terms_per_query == domain_size
    yields an exact partition of the domain.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    queries: list[Query] = []
    if spec.non_overlapping:
        values = rng.permutation(np.arange(1, spec.domain_size + 1))
        for i in range(spec.query_count):
            chunk = values[i * spec.terms_per_query : (i + 1) * spec.terms_per_query]
            queries.append(
                Query(
                    id=f"q{i:03d}",
                    table=table,
                    predicate=Predicate(column, frozenset(int(v) for v in chunk)),
                )
            )
    else:
        for i in range(spec.query_count):
            chunk = rng.choice(
                np.arange(1, spec.domain_size + 1),
                size=spec.terms_per_query,
                replace=False,
            )
            queries.append(
                Query(
                    id=f"q{i:03d}",
                    table=table,
                    predicate=Predicate(column, frozenset(int(v) for v in chunk)),
                )
            )
    return queries


def gen_pvc_workload(n: int, base: WorkProfile) -> list[WorkProfile]:
    """n identical copies of a base profile (sweep workloads repeat one query)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [base] * n


def generate_balanced_table(
    name: str,
    row_count: int,
    domain_size: int,
    seed: int,
    kb_per_row: float = 0.1,
    column: str = "key",
) -> Table:
    """Table where every domain value appears exactly row_count/domain_size
    times, in seeded shuffled order.  Used by the batching fixture so each
    single-value selection is an exact 1/domain_size slice."""
    if row_count % domain_size != 0:
        raise ValueError("row_count must be a multiple of domain_size")
    rng = np.random.Generator(np.random.PCG64(seed))
    keys = np.tile(np.arange(1, domain_size + 1, dtype=np.int64), row_count // domain_size)
    rng.shuffle(keys)
    return Table(
        name=name,
        column=column,
        keys=keys,
        domain=frozenset(range(1, domain_size + 1)),
        size_kb=row_count * kb_per_row,
    )


def write_workload(queries: list[Query], path: str | Path) -> None:
    """One query per line: table,column,value;value;..."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "table", "column", "values"])
        for q in queries:
            writer.writerow(
                [q.id, q.table, q.predicate.column,
                 ";".join(str(v) for v in q.predicate.terms)]
            )


def read_workload(path: str | Path) -> list[Query]:
    queries: list[Query] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["query_id", "table", "column", "values"]:
            raise ValueError(f"unexpected workload header {header!r}")
        for row in reader:
            qid, table, column, values = row
            queries.append(
                Query(
                    id=qid,
                    table=table,
                    predicate=Predicate(
                        column, frozenset(int(v) for v in values.split(";"))
                    ),
                )
            )
    return queries


@dataclass(frozen=True)
class ProfileFixture:
    """A calibrated aggregate workload with per-setting voltage factors."""

    name: str
    notes: str
    profile: WorkProfile
    voltage_factors: dict[str, float]
    queries_per_workload: int


@dataclass(frozen=True)
class QedFixture:
    """A calibrated batching scenario: balanced table, disjoint single-value
    workload, and the cost constants that reproduce the reference ratios."""

    name: str
    notes: str
    table: Table
    workload: list[Query]
    costs: CostParams
    batch_sizes: tuple[int, ...]


@dataclass(frozen=True)
class FixtureSet:
    q5_commercial_warm: ProfileFixture
    q5_commercial_cold: ProfileFixture
    q5_mysql_memory: ProfileFixture
    qed_lineitem: QedFixture


def _fixture_key(section: dict, fixture: str, key: str):
    if key not in section:
        raise ValueError(f"fixture {fixture!r}: missing key {key!r}")
    return section[key]


def _profile_fixture(
    name: str, section: dict, cpu: CpuModel, disk: DiskModel
) -> ProfileFixture:
    profile = WorkProfile.build(
        cpu_cycles=float(_fixture_key(section, name, "cpu_cycles")),
        disk_kb=float(_fixture_key(section, name, "disk_kb")),
        disk_pattern=str(section.get("disk_pattern", "sequential")),
        disk_block_kb=float(section.get("disk_block_kb", 32.0)),
        cpu=cpu,
        disk=disk,
    )
    factors = {
        str(k): float(v)
        for k, v in _fixture_key(section, name, "voltage_factors").items()
    }
    return ProfileFixture(
        name=name,
        notes=str(section.get("notes", "")),
        profile=profile,
        voltage_factors=factors,
        queries_per_workload=int(section.get("queries_per_workload", 1)),
    )


def _qed_fixture(name: str, section: dict) -> QedFixture:
    cost_section = _fixture_key(section, name, "costs")
    costs = CostParams(
        cycles_scan_per_row=float(
            _fixture_key(cost_section, name, "cycles_scan_per_row")
        ),
        cycles_per_predicate_term_per_row=float(
            _fixture_key(cost_section, name, "cycles_per_predicate_term_per_row")
        ),
        cycles_split_per_result_row=float(
            _fixture_key(cost_section, name, "cycles_split_per_result_row")
        ),
        fixed_overhead_time_per_query=float(
            _fixture_key(cost_section, name, "fixed_overhead_time_per_query")
        ),
        fixed_overhead_energy_per_query=float(
            _fixture_key(cost_section, name, "fixed_overhead_energy_per_query")
        ),
        buffer_state=str(cost_section.get("buffer_state", "warm")),
    )
    table_name = str(_fixture_key(section, name, "table_name"))
    column = str(_fixture_key(section, name, "column"))
    domain_size = int(_fixture_key(section, name, "domain_size"))
    table = generate_balanced_table(
        name=table_name,
        row_count=int(_fixture_key(section, name, "table_rows")),
        domain_size=domain_size,
        seed=int(_fixture_key(section, name, "table_seed")),
        kb_per_row=float(section.get("kb_per_row", 0.1)),
        column=column,
    )
    workload = gen_selection_workload(
        SelectionWorkloadSpec(
            query_count=domain_size,
            domain_size=domain_size,
            terms_per_query=1,
            non_overlapping=True,
            seed=int(_fixture_key(section, name, "workload_seed")),
        ),
        table=table_name,
        column=column,
    )
    return QedFixture(
        name=name,
        notes=str(section.get("notes", "")),
        table=table,
        workload=workload,
        costs=costs,
        batch_sizes=tuple(int(b) for b in section.get("batch_sizes", (35, 40, 45, 50))),
    )


def load_fixtures(
    cpu: CpuModel, disk: DiskModel, path: str | Path | None = None
) -> FixtureSet:
    """Load the packaged (or a user-supplied) fixture file.

    Errors name the offending fixture and key.  Loading checks that every
    profile fixture's CPU-bound fraction lands in [0, 1].
    """
    if path is None:
        path = data_path(FIXTURES_CONFIG_NAME)
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    missing = [name for name in REQUIRED_FIXTURES if name not in doc]
    if missing:
        raise ValueError(f"fixture file is missing entries: {missing}")

    warm = _profile_fixture("q5_commercial_warm", doc["q5_commercial_warm"], cpu, disk)
    cold = _profile_fixture("q5_commercial_cold", doc["q5_commercial_cold"], cpu, disk)
    mysql = _profile_fixture("q5_mysql_memory", doc["q5_mysql_memory"], cpu, disk)
    qed = _qed_fixture("qed_lineitem", doc["qed_lineitem"])

    for fx in (warm, cold, mysql):
        if not 0.0 <= fx.profile.alpha <= 1.0:
            raise ValueError(f"fixture {fx.name!r}: alpha outside [0, 1]")
    return FixtureSet(
        q5_commercial_warm=warm,
        q5_commercial_cold=cold,
        q5_mysql_memory=mysql,
        qed_lineitem=qed,
    )

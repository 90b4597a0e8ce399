"""edpsim: an energy-delay simulator for database workloads.

Models a processor's voltage/frequency ladder and a disk, executes single
table selections (alone or merged into batches) against them, and sweeps
operating settings to chart the energy versus response-time trade-off.
"""

from .config import AppConfig, data_path, load_config
from .engine import (
    CostParams,
    ExecutionReport,
    MergedQuery,
    Predicate,
    Query,
    SelectionEnv,
    Table,
    WorkProfile,
    execute_profile,
    execute_selection,
    generate_table,
    split_results,
    table_from_csv,
    table_to_csv,
)
from .power_model import (
    NO_DOWNGRADE,
    STOCK,
    CpuModel,
    DiskModel,
    DiskReport,
    PState,
    PvcSetting,
    SystemPowerTable,
    VoltageDowngrade,
    available_pstates,
    cpu_active_power,
    disk_read_sim,
    effective_frequency,
    effective_voltage,
    operating_point,
    system_baseline_power,
    wall_power,
)
from .pvc import (
    EdpCurve,
    OperatingPoint,
    SweepResult,
    below_edp_curve,
    calibrate_cpu_fraction,
    calibrate_voltage_factor,
    constant_edp_curve,
    default_settings,
    edp,
    parse_setting_label,
    run_sweep,
    select_operating_point,
    setting_label,
    theoretical_edp,
    trimmed_mean_of_five,
)
from .qed import (
    ComparisonReport,
    QueryQueue,
    WorkloadRun,
    accumulate,
    compare_runs,
    merge_batch,
    run_qed,
    run_sequential,
)
from .workload import (
    FixtureSet,
    ProfileFixture,
    QedFixture,
    SelectionWorkloadSpec,
    gen_pvc_workload,
    gen_selection_workload,
    generate_balanced_table,
    load_fixtures,
    read_workload,
    write_workload,
)

__version__ = "0.1.0"

__all__ = [
    "AppConfig",
    "ComparisonReport",
    "CostParams",
    "CpuModel",
    "DiskModel",
    "DiskReport",
    "EdpCurve",
    "ExecutionReport",
    "FixtureSet",
    "MergedQuery",
    "NO_DOWNGRADE",
    "OperatingPoint",
    "PState",
    "Predicate",
    "ProfileFixture",
    "PvcSetting",
    "QedFixture",
    "Query",
    "QueryQueue",
    "STOCK",
    "SelectionEnv",
    "SelectionWorkloadSpec",
    "SweepResult",
    "SystemPowerTable",
    "Table",
    "VoltageDowngrade",
    "WorkProfile",
    "WorkloadRun",
    "accumulate",
    "available_pstates",
    "below_edp_curve",
    "calibrate_cpu_fraction",
    "calibrate_voltage_factor",
    "compare_runs",
    "constant_edp_curve",
    "cpu_active_power",
    "data_path",
    "default_settings",
    "disk_read_sim",
    "edp",
    "effective_frequency",
    "effective_voltage",
    "execute_profile",
    "execute_selection",
    "gen_pvc_workload",
    "gen_selection_workload",
    "generate_balanced_table",
    "generate_table",
    "load_config",
    "load_fixtures",
    "merge_batch",
    "operating_point",
    "parse_setting_label",
    "read_workload",
    "run_qed",
    "run_sequential",
    "run_sweep",
    "select_operating_point",
    "setting_label",
    "split_results",
    "system_baseline_power",
    "table_from_csv",
    "table_to_csv",
    "theoretical_edp",
    "trimmed_mean_of_five",
    "wall_power",
]

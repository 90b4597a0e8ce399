"""Derive the calibrated constants in data/default.cfg and data/fixtures.cfg.

Everything is fitted against the frozen reference measurement tables below:
a warm-buffer and a cold-buffer run of the same decision-support query on a
commercial engine (elapsed seconds, CPU joules, disk joules), the relative
energy-delay deltas of six voltage/frequency settings on two engines, and
the batched-selection ratio table (per-query energy, mean response) for
batch sizes 35..50.

Run from the repository root after an editable install:

    python scripts/calibrate_fixtures.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from edpsim.engine import WorkProfile
from edpsim.power_model import (
    STOCK,
    CpuModel,
    DiskModel,
    PState,
    PvcSetting,
    VoltageDowngrade,
    cpu_active_power,
    operating_point,
)

DATA_DIR = REPO / "src" / "edpsim" / "data"

# ---------------------------------------------------------------- targets

# stock-run absolutes: elapsed s, CPU J, disk J
WARM = (48.5, 1228.7, 214.7)
COLD = (156.0, 2146.0, 1135.4)

# relative energy-delay product per setting (1.0 = stock)
EDP_TARGETS = {
    "commercial": {
        "small": {0.05: 0.70, 0.10: 0.78, 0.15: 0.85},
        "medium": {0.05: 0.53, 0.10: 0.62, 0.15: 0.77},
    },
    "mysql": {
        "small": {0.05: 0.93, 0.10: 0.996, 0.15: 1.09},
        "medium": {0.05: 0.84, 0.10: 0.92, 0.15: 1.00},
    },
}

# batched-selection targets: per-query ratios vs sequential
QED_RESPONSE = {35: 1.52, 40: 1.50, 50: 1.43}
QED_ENERGY = {35: 0.54, 40: 0.49, 50: 0.46}
QED_EDP = {35: 0.82, 40: 0.74}

# hardware framing
FSB_MHZ = 333.0
PSTATES = ((9.0, 1.25), (8.0, 1.20), (7.0, 1.15), (6.0, 1.10))
CPU_IDLE_W = 8.0
TRANSFER_MB_S = 80.0
SEEK_OVER_4KB_TRANSFER = 14.67  # calibrated from the random-read ratios
DISK_IDLE_W = 0.0
PSU_EFFICIENCY = 0.83
SYSTEM_LADDER_W = (9.2, 20.1, 49.7, 54.0, 55.7, 69.3)

# batching fixture framing (scale choices; only the ratios are calibrated)
QED_ROWS = 100_000
QED_DOMAIN = 50
QED_TAU_S = 0.25  # single-query stock elapsed
QED_SCAN_SHARE = 0.45  # share of tau spent on per-row scan handling
QED_TABLE_SEED = 20407
QED_WORKLOAD_SEED = 11213

MYSQL_STOCK_ELAPSED_S = 12.0  # CPU-bound profile; absolute scale is arbitrary


def underclock_labels(level: str) -> dict[float, str]:
    tag = {"small": "small", "medium": "med"}[level]
    return {u: f"u{round(u * 100)}-{tag}" for u in (0.05, 0.10, 0.15)}


def solve_power_rails() -> tuple[float, float]:
    """One CPU active power and one disk active power reproducing both the
    warm and the cold stock run exactly."""
    a = np.array([[WARM[1], WARM[2]], [COLD[1], COLD[2]]])
    b = np.array([WARM[0], COLD[0]])
    inv_cpu, inv_disk = np.linalg.solve(a, b)
    return 1.0 / inv_cpu, 1.0 / inv_disk


def qed_expected_evaluations(k: int, domain: int = QED_DOMAIN) -> float:
    """Mean predicate terms evaluated per row for a k-member disjunction of
    disjoint single values over a uniform domain, with short-circuiting."""
    return k * (k + 1) / (2 * domain) + k * (domain - k) / domain


def qed_ratio_model(knobs: np.ndarray, k: int) -> tuple[float, float]:
    """(response_ratio, energy_ratio) of the dimensionless batching model.

    knobs = (b, s, c): per-term scan share of tau, per-member split share
    of tau, and the energy intercept (scan share plus fixed overhead energy
    in units of active power times tau).
    """
    b, s, c = knobs
    g = qed_expected_evaluations(k)
    merged_time = 1.0 - b + b * g + s * k  # units of tau
    response_ratio = 2.0 * merged_time / (k + 1)
    energy_ratio = (c + b * g + s * k) / (k * (c + b))
    return response_ratio, energy_ratio


def qed_objective(knobs: np.ndarray) -> float:
    b, s, c = knobs
    if not (0.0 <= b <= 1.0 and s >= 0.0 and c >= 0.0):
        return np.inf
    dev = 0.0
    for k, target in QED_RESPONSE.items():
        dev = max(dev, abs(qed_ratio_model(knobs, k)[0] - target))
    for k, target in QED_ENERGY.items():
        dev = max(dev, abs(qed_ratio_model(knobs, k)[1] - target))
    for k, target in QED_EDP.items():
        r, e = qed_ratio_model(knobs, k)
        dev = max(dev, abs(r * e - target))
    return dev


def fit_qed_knobs() -> np.ndarray:
    """Deterministic minimax fit: grid seed, coordinate pattern search,
    then a simplex polish (coordinate moves alone stall on the minimax
    surface's non-smooth ridges)."""
    best = None
    for b in np.linspace(0.05, 0.95, 37):
        for s in np.linspace(0.30, 0.90, 61):
            for c in np.linspace(0.0, 3.0, 61):
                knobs = np.array([b, s, c])
                dev = qed_objective(knobs)
                if best is None or dev < best[0]:
                    best = (dev, knobs)
    dev, knobs = best
    step = 0.02
    while step > 1e-12:
        improved = False
        for i in range(3):
            for sign in (1.0, -1.0):
                trial = knobs.copy()
                trial[i] += sign * step
                d = qed_objective(trial)
                if d < dev:
                    dev, knobs = d, trial
                    improved = True
        if not improved:
            step *= 0.5
    try:
        from scipy.optimize import minimize
    except ImportError:
        return knobs
    result = minimize(
        qed_objective,
        knobs,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 20000},
    )
    if result.fun < dev:
        return np.asarray(result.x)
    return knobs


def toml_float(x: float) -> str:
    text = repr(float(x))
    if "e" not in text and "." not in text and "inf" not in text and "nan" not in text:
        text += ".0"
    return text


def main() -> None:
    p_cpu, p_disk = solve_power_rails()
    freq_stock = PSTATES[0][0] * FSB_MHZ * 1e6
    volt_stock = PSTATES[0][1]
    activity = p_cpu / (volt_stock**2 * freq_stock)

    transfer_kb_s = TRANSFER_MB_S * 1024.0
    seek_s = SEEK_OVER_4KB_TRANSFER * (4.0 / transfer_kb_s)

    cpu = CpuModel(
        fsb_base_hz=FSB_MHZ * 1e6,
        pstates=tuple(PState(m, v) for m, v in PSTATES),
        activity_constant=activity,
        idle_power_w=CPU_IDLE_W,
    )
    disk = DiskModel(
        seek_time_s=seek_s,
        transfer_rate_kb_s=transfer_kb_s,
        active_power_w=p_disk,
        idle_power_w=DISK_IDLE_W,
    )
    assert abs(cpu_active_power(cpu, volt_stock, freq_stock) - p_cpu) < 1e-9

    # system ladder must decompose into deltas that re-sum exactly
    deltas = [SYSTEM_LADDER_W[0]] + [
        SYSTEM_LADDER_W[i] - SYSTEM_LADDER_W[i - 1] for i in range(1, 6)
    ]
    acc = 0.0
    for delta, measured in zip(deltas, SYSTEM_LADDER_W):
        acc += delta
        assert acc == measured, f"ladder does not re-sum exactly at {measured}"

    # aggregate profiles: cycles from the CPU-time split, disk volume rounded
    # to a whole number of 32 KB blocks
    def build_profile(elapsed: float, cpu_j: float, disk_j: float) -> WorkProfile:
        cpu_time = cpu_j / p_cpu
        disk_time = disk_j / p_disk
        assert abs(cpu_time + disk_time - elapsed) < 1e-6
        disk_kb = round(disk_time * transfer_kb_s / 32.0) * 32.0
        return WorkProfile.build(
            cpu_cycles=cpu_time * freq_stock,
            disk_kb=disk_kb,
            disk_pattern="sequential",
            disk_block_kb=32.0,
            cpu=cpu,
            disk=disk,
        )

    warm = build_profile(*WARM)
    cold = build_profile(*COLD)
    mysql = WorkProfile.build(
        cpu_cycles=MYSQL_STOCK_ELAPSED_S * freq_stock,
        disk_kb=0.0,
        disk_pattern="sequential",
        disk_block_kb=32.0,
        cpu=cpu,
        disk=disk,
    )

    # per-setting voltage factors: pick v so the forward model reproduces
    # the target energy-delay ratio exactly given the profile's alpha
    def voltage_factors(alpha: float, targets: dict[str, dict[float, float]]):
        factors: dict[str, float] = {}
        for level, by_u in targets.items():
            labels = underclock_labels(level)
            for u, edp_target in by_u.items():
                time_ratio = alpha / (1.0 - u) + (1.0 - alpha)
                energy_ratio = edp_target / time_ratio
                factors[labels[u]] = float(np.sqrt(energy_ratio))
        return factors

    commercial_factors = voltage_factors(warm.alpha, EDP_TARGETS["commercial"])
    mysql_factors = voltage_factors(mysql.alpha, EDP_TARGETS["mysql"])

    # downgrade presets behave physically only if medium digs deeper
    for labels_small, labels_med in zip(
        underclock_labels("small").values(), underclock_labels("medium").values()
    ):
        assert commercial_factors[labels_med] < commercial_factors[labels_small]
        assert mysql_factors[labels_med] < mysql_factors[labels_small]

    # batching cost constants from the dimensionless minimax fit
    knobs = fit_qed_knobs()
    dev = qed_objective(knobs)
    print(f"batching fit knobs b,s,c = {knobs} (max deviation {dev * 100:.2f} pp)")
    assert dev < 0.022, "fit drifted; investigate before rewriting fixtures"
    energies = [qed_ratio_model(knobs, k)[1] for k in (35, 40, 45, 50)]
    decrements = [a - b for a, b in zip(energies, energies[1:])]
    assert decrements[0] > decrements[1] > decrements[2] > 1e-4

    b, s, c = knobs
    scan_share = QED_SCAN_SHARE
    overhead_time_share = 1.0 - scan_share - b
    energy_overhead_share = c - scan_share
    assert overhead_time_share > 0.0 and energy_overhead_share > 0.0

    cycle_budget = QED_TAU_S * freq_stock
    rows_per_value = QED_ROWS // QED_DOMAIN
    costs = {
        "cycles_scan_per_row": scan_share * cycle_budget / QED_ROWS,
        "cycles_per_predicate_term_per_row": b * cycle_budget / QED_ROWS,
        "cycles_split_per_result_row": s * cycle_budget / rows_per_value,
        "fixed_overhead_time_per_query": overhead_time_share * QED_TAU_S,
        "fixed_overhead_energy_per_query": energy_overhead_share * p_cpu * QED_TAU_S,
    }

    for k in (35, 40, 45, 50):
        r, e = qed_ratio_model(knobs, k)
        print(f"  batch {k}: response x{r:.4f}  energy x{e:.4f}  edp x{r * e:.4f}")

    # quick forward check of the sweep calibration
    for name, profile, factors, targets in (
        ("commercial", warm, commercial_factors, EDP_TARGETS["commercial"]),
        ("mysql", mysql, mysql_factors, EDP_TARGETS["mysql"]),
    ):
        for level, by_u in targets.items():
            labels = underclock_labels(level)
            for u, edp_target in by_u.items():
                setting = PvcSetting(u, VoltageDowngrade(level, factors[labels[u]]))
                freq, volt = operating_point(cpu, setting)
                time_ratio = profile.alpha / (1.0 - u) + (1.0 - profile.alpha)
                energy_ratio = (volt / volt_stock) ** 2 * (freq / freq_stock) / (1.0 - u)
                assert abs(energy_ratio * time_ratio - edp_target) < 1e-9
        print(f"{name}: alpha = {profile.alpha:.6f}, factors verified")

    write_default_cfg(activity, seek_s, p_disk)
    write_fixtures_cfg(
        warm, cold, mysql, commercial_factors, mysql_factors, costs
    )
    print(f"wrote {DATA_DIR / 'default.cfg'} and {DATA_DIR / 'fixtures.cfg'}")


def write_default_cfg(activity: float, seek_s: float, p_disk: float) -> None:
    lines = [
        "# Calibrated hardware models; regenerate with scripts/calibrate_fixtures.py.",
        "# The activity constant makes the stock core draw the reference 43.31 W;",
        "# the disk rail reproduces the reference 10.67 W active draw.",
        "",
        "[cpu]",
        f"fsb_base_mhz = {toml_float(FSB_MHZ)}",
        f"activity_constant = {toml_float(activity)}",
        f"idle_power_w = {toml_float(CPU_IDLE_W)}",
        "# generic presets; calibrated fixtures carry per-setting factors instead",
        "downgrade_small = 0.9",
        "downgrade_medium = 0.8",
        "",
    ]
    for mult, volt in PSTATES:
        lines += [
            "[[cpu.pstates]]",
            f"multiplier = {toml_float(mult)}",
            f"voltage = {toml_float(volt)}",
            "",
        ]
    lines += [
        "[disk]",
        "# seek time fixed at 14.67x the 4 KB transfer time, which puts the",
        "# random-over-sequential throughput ratios at 1.88 / 3.36 / 5.53 for",
        "# 8 / 16 / 32 KB blocks",
        f"seek_time_ms = {toml_float(seek_s * 1e3)}",
        f"transfer_rate_mb_s = {toml_float(TRANSFER_MB_S)}",
        f"disk_active_power_w = {toml_float(p_disk)}",
        f"disk_idle_power_w = {toml_float(DISK_IDLE_W)}",
        "",
    ]
    (DATA_DIR / "default.cfg").write_text("\n".join(lines))


def write_fixtures_cfg(
    warm: WorkProfile,
    cold: WorkProfile,
    mysql: WorkProfile,
    commercial_factors: dict[str, float],
    mysql_factors: dict[str, float],
    costs: dict[str, float],
) -> None:
    def profile_block(name: str, notes: str, profile: WorkProfile,
                      factors: dict[str, float]) -> list[str]:
        lines = [
            f"[{name}]",
            f'notes = "{notes}"',
            f"cpu_cycles = {toml_float(profile.cpu_cycles)}",
            f"disk_kb = {toml_float(profile.disk_kb)}",
            f'disk_pattern = "{profile.disk_pattern}"',
            f"disk_block_kb = {toml_float(profile.disk_block_kb)}",
            "queries_per_workload = 10",
            "",
            f"[{name}.voltage_factors]",
        ]
        for label in sorted(factors):
            lines.append(f'"{label}" = {toml_float(factors[label])}')
        lines.append("")
        return lines

    lines = [
        "# Calibrated reference fixtures; regenerate with",
        "# scripts/calibrate_fixtures.py.  Notes name the measured values each",
        "# fixture reproduces.",
        "",
    ]
    lines += profile_block(
        "q5_commercial_warm",
        "warm-buffer decision-support run: stock 48.5 s, 1228.7 J CPU, "
        "214.7 J disk; energy-delay deltas medium -47/-38/-23 pct, "
        "small -30/-22/-15 pct at 5/10/15 pct underclock",
        warm,
        commercial_factors,
    )
    lines += profile_block(
        "q5_commercial_cold",
        "cold-buffer rerun of the same query: stock 156 s, 2146.0 J CPU, "
        "1135.4 J disk",
        cold,
        commercial_factors,
    )
    lines += profile_block(
        "q5_mysql_memory",
        "memory-engine run, CPU bound (alpha = 1): energy-delay deltas "
        "medium -16/-8/-0 pct, small -7/-0.4/+9 pct at 5/10/15 pct underclock",
        mysql,
        mysql_factors,
    )
    lines += [
        "[qed_lineitem]",
        'notes = "single-value selections, 2 pct selectivity each, over a '
        "uniform 50-value key; batching reproduces per-query energy "
        '-46/-51/-54 pct and mean response +52/+50/+43 pct at batches 35/40/50"',
        'table_name = "lineitem"',
        'column = "l_quantity"',
        f"table_rows = {QED_ROWS}",
        f"domain_size = {QED_DOMAIN}",
        f"table_seed = {QED_TABLE_SEED}",
        f"workload_seed = {QED_WORKLOAD_SEED}",
        "kb_per_row = 0.15",
        "batch_sizes = [35, 40, 45, 50]",
        "",
        "[qed_lineitem.costs]",
        f"cycles_scan_per_row = {toml_float(costs['cycles_scan_per_row'])}",
        "cycles_per_predicate_term_per_row = "
        + toml_float(costs["cycles_per_predicate_term_per_row"]),
        "cycles_split_per_result_row = "
        + toml_float(costs["cycles_split_per_result_row"]),
        "fixed_overhead_time_per_query = "
        + toml_float(costs["fixed_overhead_time_per_query"]),
        "fixed_overhead_energy_per_query = "
        + toml_float(costs["fixed_overhead_energy_per_query"]),
        'buffer_state = "warm"',
        "",
    ]
    (DATA_DIR / "fixtures.cfg").write_text("\n".join(lines))


if __name__ == "__main__":
    main()

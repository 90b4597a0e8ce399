"""Analytic power, frequency and disk-timing models.

The CPU model is the classic switching-power law: active power scales with
activity_constant * voltage^2 * frequency, and execution time of a fixed
cycle budget scales with 1 / frequency.  Frequency is multiplier * FSB, and
two independent knobs lower it: capping the multiplier, or underclocking the
FSB by a fraction u so every p-state shifts down together.  Underclocking is
the finer-grained of the two because it preserves the whole multiplier
ladder instead of truncating it.

The disk model is a fixed-rate transfer plus one seek per block for random
access; sequential access pays no seeks, so its elapsed time is independent
of block size.

The system model is a ladder of per-component power deltas whose cumulative
sums reproduce a measured watt table for increasingly populated machines.
"""

from __future__ import annotations

from dataclasses import dataclass

DOWNGRADE_LEVELS = ("none", "small", "medium")

# Ladder order of the component power table.  Each component requires every
# component to its left to be enabled before its delta is meaningful.
SYSTEM_LADDER = ("psu_mobo", "sys_on", "cpu", "ram1", "ram2", "gpu")

DISK_PATTERNS = ("sequential", "random")


@dataclass(frozen=True)
class PState:
    """One multiplier/voltage operating point of the CPU."""

    multiplier: float
    core_voltage: float

    def __post_init__(self) -> None:
        if self.multiplier < 1.0:
            raise ValueError(f"multiplier must be >= 1, got {self.multiplier}")
        if self.core_voltage <= 0.0:
            raise ValueError(f"core_voltage must be > 0, got {self.core_voltage}")


@dataclass(frozen=True)
class VoltageDowngrade:
    """Named preset scaling the stock core voltage by `factor`.

    level "none" always carries factor 1.0; "small" and "medium" carry
    calibrated factors with medium <= small (a deeper downgrade).
    """

    level: str
    factor: float = 1.0

    def __post_init__(self) -> None:
        if self.level not in DOWNGRADE_LEVELS:
            raise ValueError(f"unknown downgrade level {self.level!r}")
        if self.level == "none" and self.factor != 1.0:
            raise ValueError("downgrade level 'none' must have factor 1.0")
        if not 0.0 < self.factor <= 1.0:
            raise ValueError(f"downgrade factor must be in (0, 1], got {self.factor}")


NO_DOWNGRADE = VoltageDowngrade("none", 1.0)


@dataclass(frozen=True)
class PvcSetting:
    """A voltage/frequency control point: underclock fraction, voltage
    downgrade, and an optional multiplier cap."""

    underclock_fraction: float = 0.0
    downgrade: VoltageDowngrade = NO_DOWNGRADE
    pstate_cap: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.underclock_fraction < 1.0:
            raise ValueError(
                f"underclock_fraction must be in [0, 1), got {self.underclock_fraction}"
            )


STOCK = PvcSetting(0.0, NO_DOWNGRADE, None)


@dataclass(frozen=True)
class CpuModel:
    """CPU frequency ladder plus the two constants of the power law.

    activity_constant has units W / (V^2 Hz); idle_power_w is the draw
    charged while the CPU waits on the disk.
    """

    fsb_base_hz: float
    pstates: tuple[PState, ...]
    activity_constant: float
    idle_power_w: float = 0.0

    def __post_init__(self) -> None:
        if self.fsb_base_hz <= 0.0:
            raise ValueError("fsb_base_hz must be > 0")
        if not self.pstates:
            raise ValueError("at least one p-state is required")
        mults = [p.multiplier for p in self.pstates]
        volts = [p.core_voltage for p in self.pstates]
        if any(a <= b for a, b in zip(mults, mults[1:])):
            raise ValueError("p-state multipliers must be strictly decreasing")
        if any(a < b for a, b in zip(volts, volts[1:])):
            raise ValueError("p-state voltages must be non-increasing")
        if self.activity_constant <= 0.0:
            raise ValueError("activity_constant must be > 0")
        if self.idle_power_w < 0.0:
            raise ValueError("idle_power_w must be >= 0")

    @property
    def max_multiplier(self) -> float:
        return self.pstates[0].multiplier


@dataclass(frozen=True)
class DiskModel:
    """Seek-plus-transfer disk with a flat active power draw."""

    seek_time_s: float
    transfer_rate_kb_s: float
    active_power_w: float
    idle_power_w: float = 0.0

    def __post_init__(self) -> None:
        if self.seek_time_s < 0.0:
            raise ValueError("seek_time_s must be >= 0")
        if self.transfer_rate_kb_s <= 0.0:
            raise ValueError("transfer_rate_kb_s must be > 0")
        if not self.active_power_w >= self.idle_power_w >= 0.0:
            raise ValueError("need active_power_w >= idle_power_w >= 0")


@dataclass(frozen=True)
class SystemPowerTable:
    """Per-component wall-power deltas, stored in ladder order so the
    cumulative sums rebuild the measured watt table exactly."""

    psu_mobo_off_w: float
    sys_on_delta_w: float
    cpu_delta_w: float
    ram1_delta_w: float
    ram2_delta_w: float
    gpu_delta_w: float

    def __post_init__(self) -> None:
        for name in (
            "psu_mobo_off_w",
            "sys_on_delta_w",
            "cpu_delta_w",
            "ram1_delta_w",
            "ram2_delta_w",
            "gpu_delta_w",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")

    def delta(self, component: str) -> float:
        return {
            "psu_mobo": self.psu_mobo_off_w,
            "sys_on": self.sys_on_delta_w,
            "cpu": self.cpu_delta_w,
            "ram1": self.ram1_delta_w,
            "ram2": self.ram2_delta_w,
            "gpu": self.gpu_delta_w,
        }[component]

    def ladder(self) -> tuple[float, ...]:
        """Cumulative watt readings for increasingly populated systems."""
        acc = 0.0
        out = []
        for comp in SYSTEM_LADDER:
            acc += self.delta(comp)
            out.append(acc)
        return tuple(out)


@dataclass(frozen=True)
class DiskReport:
    """Outcome of one simulated bulk read."""

    pattern: str
    block_kb: float
    total_kb: float
    seeks: int
    elapsed_s: float
    energy_j: float
    throughput_kb_s: float
    energy_per_kb_j: float


def validate_setting(cpu: CpuModel, setting: PvcSetting) -> None:
    """Raise if the setting's cap names a multiplier the CPU does not have."""
    if setting.pstate_cap is not None:
        if setting.pstate_cap not in [p.multiplier for p in cpu.pstates]:
            raise ValueError(
                f"pstate_cap {setting.pstate_cap} is not one of the CPU multipliers"
            )


def effective_fsb(cpu: CpuModel, setting: PvcSetting) -> float:
    """FSB in Hz after underclocking: fsb_base * (1 - u)."""
    validate_setting(cpu, setting)
    return cpu.fsb_base_hz * (1.0 - setting.underclock_fraction)


def available_pstates(cpu: CpuModel, setting: PvcSetting) -> tuple[PState, ...]:
    """P-states usable under the setting.

    Capping removes every p-state above the cap; underclocking keeps the
    whole ladder (that is why it is the finer-grained knob).
    """
    validate_setting(cpu, setting)
    if setting.pstate_cap is None:
        return cpu.pstates
    return tuple(p for p in cpu.pstates if p.multiplier <= setting.pstate_cap)


def effective_frequency(cpu: CpuModel, setting: PvcSetting, pstate: PState) -> float:
    """Clock in Hz for one p-state under the setting: multiplier * FSB * (1 - u)."""
    validate_setting(cpu, setting)
    if setting.pstate_cap is not None and pstate.multiplier > setting.pstate_cap:
        raise ValueError(
            f"multiplier {pstate.multiplier} exceeds the cap {setting.pstate_cap}"
        )
    return pstate.multiplier * effective_fsb(cpu, setting)


def effective_voltage(pstate: PState, downgrade: VoltageDowngrade) -> float:
    """Core voltage after applying the downgrade factor."""
    return pstate.core_voltage * downgrade.factor


def top_pstate(cpu: CpuModel, setting: PvcSetting) -> PState:
    """Fastest p-state available under the setting; the engine always runs
    flat out at this point."""
    avail = available_pstates(cpu, setting)
    if not avail:
        raise ValueError("no p-state available under this setting")
    return avail[0]


def operating_point(cpu: CpuModel, setting: PvcSetting) -> tuple[float, float]:
    """(frequency Hz, voltage V) of the top available p-state under the setting."""
    p = top_pstate(cpu, setting)
    return effective_frequency(cpu, setting, p), effective_voltage(p, setting.downgrade)


def cpu_active_power(cpu: CpuModel, voltage: float, frequency: float) -> float:
    """Switching power: activity_constant * V^2 * F."""
    if voltage <= 0.0 or frequency <= 0.0:
        raise ValueError("voltage and frequency must be > 0")
    return cpu.activity_constant * voltage * voltage * frequency


def system_baseline_power(table: SystemPowerTable, enabled: set[str] | frozenset[str]) -> float:
    """Wall power of a machine with the given components enabled.

    Components must respect the ladder: each one requires its predecessor,
    e.g. RAM deltas are meaningless without the CPU populated.
    """
    unknown = set(enabled) - set(SYSTEM_LADDER)
    if unknown:
        raise ValueError(f"unknown components: {sorted(unknown)}")
    total = 0.0
    for prev, comp in zip((None,) + SYSTEM_LADDER, SYSTEM_LADDER):
        if comp in enabled:
            if prev is not None and prev not in enabled:
                raise ValueError(f"component {comp!r} requires {prev!r} to be enabled")
            total += table.delta(comp)
    return total


def wall_power(dc_power_w: float, psu_efficiency: float) -> float:
    """AC wall draw for a DC load behind a lossy PSU."""
    if not 0.0 < psu_efficiency <= 1.0:
        raise ValueError(f"psu_efficiency must be in (0, 1], got {psu_efficiency}")
    if dc_power_w < 0.0:
        raise ValueError("dc_power_w must be >= 0")
    return dc_power_w / psu_efficiency


def disk_read_sim(
    disk: DiskModel, pattern: str, block_kb: float, total_kb: float
) -> DiskReport:
    """Simulate reading total_kb in block_kb chunks.

    Sequential reads pay transfer time only, so elapsed (hence energy per
    KB) does not depend on the block size.  Random reads pay one seek per
    block on top of the same transfer time.
    """
    if pattern not in DISK_PATTERNS:
        raise ValueError(f"unknown access pattern {pattern!r}")
    if block_kb <= 0.0 or total_kb <= 0.0:
        raise ValueError("block_kb and total_kb must be > 0")
    blocks_f = total_kb / block_kb
    blocks = round(blocks_f)
    if blocks < 1 or abs(blocks_f - blocks) > 1e-9 * max(1.0, blocks_f):
        raise ValueError(
            f"total_kb {total_kb} is not a positive multiple of block_kb {block_kb}"
        )
    seeks = blocks if pattern == "random" else 0
    elapsed = seeks * disk.seek_time_s + total_kb / disk.transfer_rate_kb_s
    energy = disk.active_power_w * elapsed
    return DiskReport(
        pattern=pattern,
        block_kb=block_kb,
        total_kb=total_kb,
        seeks=seeks,
        elapsed_s=elapsed,
        energy_j=energy,
        throughput_kb_s=total_kb / elapsed,
        energy_per_kb_j=energy / total_kb,
    )

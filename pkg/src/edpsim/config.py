"""TOML config loading for the hardware models.

Three sections, any of which may be omitted to fall back to the packaged
defaults: [cpu] (frequency ladder, power-law constants, downgrade presets),
[disk] (seek/transfer/power) and [system] (component power deltas and PSU
efficiency).  The packaged table1.cfg carries the measured system ladder;
default.cfg carries the calibrated cpu and disk models.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .power_model import CpuModel, DiskModel, PState, SystemPowerTable

_DATA_PACKAGE = "edpsim.data"
DEFAULT_CONFIG_NAME = "default.cfg"
TABLE1_CONFIG_NAME = "table1.cfg"


@dataclass(frozen=True)
class AppConfig:
    """Loaded hardware models plus the generic downgrade presets."""

    cpu: CpuModel
    disk: DiskModel
    system: SystemPowerTable
    psu_efficiency: float
    downgrade_factors: dict[str, float]


def data_path(name: str) -> Path:
    """Filesystem path of a packaged data file."""
    return Path(resources.files(_DATA_PACKAGE).joinpath(name))


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ValueError(f"missing config key {key!r} in [{where}]")
    return section[key]


def _load_toml(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def cpu_from_section(section: dict) -> tuple[CpuModel, dict[str, float]]:
    pstates = []
    for entry in _require(section, "pstates", "cpu"):
        pstates.append(
            PState(
                multiplier=float(_require(entry, "multiplier", "cpu.pstates")),
                core_voltage=float(_require(entry, "voltage", "cpu.pstates")),
            )
        )
    cpu = CpuModel(
        fsb_base_hz=float(_require(section, "fsb_base_mhz", "cpu")) * 1e6,
        pstates=tuple(pstates),
        activity_constant=float(_require(section, "activity_constant", "cpu")),
        idle_power_w=float(section.get("idle_power_w", 0.0)),
    )
    factors = {
        "small": float(_require(section, "downgrade_small", "cpu")),
        "medium": float(_require(section, "downgrade_medium", "cpu")),
    }
    if not factors["medium"] <= factors["small"] <= 1.0:
        raise ValueError("need downgrade_medium <= downgrade_small <= 1")
    return cpu, factors


def disk_from_section(section: dict) -> DiskModel:
    return DiskModel(
        seek_time_s=float(_require(section, "seek_time_ms", "disk")) / 1e3,
        transfer_rate_kb_s=float(_require(section, "transfer_rate_mb_s", "disk")) * 1024.0,
        active_power_w=float(_require(section, "disk_active_power_w", "disk")),
        idle_power_w=float(section.get("disk_idle_power_w", 0.0)),
    )


def system_from_section(section: dict) -> tuple[SystemPowerTable, float]:
    table = SystemPowerTable(
        psu_mobo_off_w=float(_require(section, "psu_mobo_off_w", "system")),
        sys_on_delta_w=float(_require(section, "sys_on_delta_w", "system")),
        cpu_delta_w=float(_require(section, "cpu_delta_w", "system")),
        ram1_delta_w=float(_require(section, "ram1_delta_w", "system")),
        ram2_delta_w=float(_require(section, "ram2_delta_w", "system")),
        gpu_delta_w=float(_require(section, "gpu_delta_w", "system")),
    )
    return table, float(section.get("psu_efficiency", 0.83))


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load a config file, back-filling missing sections from the packaged
    defaults (default.cfg for cpu/disk, table1.cfg for system)."""
    doc: dict = {}
    if path is not None:
        doc = _load_toml(path)
    defaults = _load_toml(data_path(DEFAULT_CONFIG_NAME))
    table1 = _load_toml(data_path(TABLE1_CONFIG_NAME))

    cpu_section = doc.get("cpu", defaults.get("cpu"))
    disk_section = doc.get("disk", defaults.get("disk"))
    system_section = doc.get("system", table1.get("system"))
    if cpu_section is None or disk_section is None or system_section is None:
        raise ValueError("config is missing a [cpu], [disk] or [system] section")

    cpu, factors = cpu_from_section(cpu_section)
    disk = disk_from_section(disk_section)
    system, efficiency = system_from_section(system_section)
    return AppConfig(
        cpu=cpu,
        disk=disk,
        system=system,
        psu_efficiency=efficiency,
        downgrade_factors=factors,
    )

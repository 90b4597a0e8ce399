"""Config loading, defaults, overrides, and packaged data files."""

import pytest

from edpsim import load_config
from edpsim.config import cpu_from_section, data_path


def test_default_config_values(config):
    assert config.cpu.fsb_base_hz == 333e6
    assert [p.multiplier for p in config.cpu.pstates] == [9.0, 8.0, 7.0, 6.0]
    assert [p.core_voltage for p in config.cpu.pstates] == [1.25, 1.2, 1.15, 1.1]
    assert config.cpu.idle_power_w == 8.0
    assert config.cpu.activity_constant > 0.0
    assert config.disk.transfer_rate_kb_s == 80.0 * 1024.0
    assert config.disk.seek_time_s > 0.0
    assert config.disk.active_power_w > config.disk.idle_power_w
    assert config.psu_efficiency == 0.83
    assert config.downgrade_factors == {"small": 0.9, "medium": 0.8}


def test_default_system_ladder_matches_wall_readings(config):
    assert config.system.ladder() == pytest.approx(
        (9.2, 20.1, 49.7, 54.0, 55.7, 69.3), abs=1e-12
    )


def test_partial_override_keeps_other_sections(tmp_path, config):
    path = tmp_path / "override.cfg"
    path.write_text(
        "[disk]\n"
        "seek_time_ms = 2.0\n"
        "transfer_rate_mb_s = 40.0\n"
        "disk_active_power_w = 5.0\n"
    )
    cfg = load_config(path)
    assert cfg.disk.seek_time_s == 0.002
    assert cfg.disk.transfer_rate_kb_s == 40.0 * 1024.0
    assert cfg.disk.idle_power_w == 0.0  # optional key defaults
    # untouched sections fall back to the packaged defaults
    assert cfg.cpu == config.cpu
    assert cfg.system == config.system
    assert cfg.psu_efficiency == config.psu_efficiency


def test_missing_key_error_names_key_and_section(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("[disk]\nseek_time_ms = 2.0\n")
    with pytest.raises(ValueError) as err:
        load_config(path)
    assert "transfer_rate_mb_s" in str(err.value)
    assert "[disk]" in str(err.value)


def test_downgrade_ordering_is_enforced():
    section = {
        "fsb_base_mhz": 333.0,
        "activity_constant": 1e-9,
        "downgrade_small": 0.8,
        "downgrade_medium": 0.9,  # deeper preset must not be the larger factor
        "pstates": [{"multiplier": 9.0, "voltage": 1.25}],
    }
    with pytest.raises(ValueError):
        cpu_from_section(section)


def test_packaged_data_files_exist():
    for name in ("default.cfg", "table1.cfg", "fixtures.cfg",
                 "calibration_targets.csv"):
        assert data_path(name).is_file(), name

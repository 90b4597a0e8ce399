"""Sweeps, ratios, operating-point selection, calibration inversions."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edpsim import (
    NO_DOWNGRADE,
    STOCK,
    OperatingPoint,
    PvcSetting,
    VoltageDowngrade,
    WorkProfile,
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
from edpsim.pvc import SweepResult, below_edp_curve


def pure_cpu_profile(config, cycles=3.0e9):
    return WorkProfile.build(
        cpu_cycles=cycles,
        disk_kb=0.0,
        disk_pattern="sequential",
        disk_block_kb=32.0,
        cpu=config.cpu,
        disk=config.disk,
    )


def sweep_of(points):
    baseline = next(p for p in points if p.label == "stock")
    return SweepResult(points=tuple(points), baseline=baseline)


def point(label, time_ratio, energy_ratio, u=0.0, scale=1.0):
    downgrade = NO_DOWNGRADE if label == "stock" else VoltageDowngrade("medium", 0.8)
    return OperatingPoint(
        setting=PvcSetting(u, downgrade),
        label=label,
        time_ratio=time_ratio,
        energy_ratio=energy_ratio,
        edp_ratio=time_ratio * energy_ratio,
        absolute_time_s=time_ratio * scale,
        absolute_energy_j=energy_ratio * scale,
    )


# ----------------------------------------------------------------- labels


def test_setting_label_round_trip():
    factors = {"small": 0.9, "medium": 0.8}
    for label in ("stock", "u5-med", "u10-small", "u15-med"):
        assert setting_label(parse_setting_label(label, factors)) == label


def test_parse_setting_label_prefers_per_label_factor():
    factors = {"medium": 0.8, "u5-med": 0.71}
    assert parse_setting_label("u5-med", factors).downgrade.factor == 0.71
    assert parse_setting_label("u10-med", factors).downgrade.factor == 0.8


def test_parse_setting_label_rejects_garbage():
    with pytest.raises(ValueError):
        parse_setting_label("turbo", {})
    with pytest.raises(ValueError):
        parse_setting_label("u5-huge", {"small": 0.9})
    with pytest.raises(ValueError):
        parse_setting_label("u5-med", {"small": 0.9})


def test_default_settings_is_stock_plus_six():
    settings_list = default_settings({"small": 0.9, "medium": 0.8})
    assert [setting_label(s) for s in settings_list] == [
        "stock",
        "u5-small",
        "u10-small",
        "u15-small",
        "u5-med",
        "u10-med",
        "u15-med",
    ]


# ----------------------------------------------------------- protocol ops


def test_trimmed_mean_of_five_basic():
    assert trimmed_mean_of_five([1.0, 2.0, 3.0, 4.0, 5.0]) == 3.0


def test_trimmed_mean_requires_five():
    with pytest.raises(ValueError):
        trimmed_mean_of_five([1.0, 2.0, 3.0])


@given(st.lists(st.floats(-1e6, 1e6), min_size=5, max_size=5), st.randoms())
def test_trimmed_mean_permutation_invariant_and_bounded(samples, rnd):
    value = trimmed_mean_of_five(samples)
    shuffled = list(samples)
    rnd.shuffle(shuffled)
    assert trimmed_mean_of_five(shuffled) == value
    # bounded by the extremes up to summation rounding (a few ulp)
    slack = 4.0 * math.ulp(max(abs(min(samples)), abs(max(samples))))
    assert min(samples) - slack <= value <= max(samples) + slack


def test_edp_and_theoretical_edp():
    assert edp(2.0, 3.0) == 6.0
    assert theoretical_edp(1.0, 1.0) == 1.0
    assert theoretical_edp(1.0, 0.5) == 2.0 * theoretical_edp(1.0, 1.0)
    with pytest.raises(ValueError):
        theoretical_edp(0.0, 1.0)


# ----------------------------------------------------------------- sweeps


def test_run_sweep_requires_stock(config):
    profile = pure_cpu_profile(config)
    with pytest.raises(ValueError):
        run_sweep(profile, [PvcSetting(0.05, NO_DOWNGRADE)], config.cpu, config.disk)


def test_stock_only_sweep_is_unit_point(config):
    profile = pure_cpu_profile(config)
    sweep = run_sweep(profile, [STOCK], config.cpu, config.disk)
    assert len(sweep.points) == 1
    p = sweep.baseline
    assert (p.time_ratio, p.energy_ratio, p.edp_ratio) == (1.0, 1.0, 1.0)


def test_pure_cpu_sweep_matches_closed_form(config):
    """u=0.05 with voltage factor v: time 1/0.95, energy v^2, edp v^2/0.95."""
    profile = pure_cpu_profile(config)
    v = 0.8
    setting = PvcSetting(0.05, VoltageDowngrade("medium", v))
    sweep = run_sweep(profile, [STOCK, setting], config.cpu, config.disk)
    p = sweep.point("u5-med")
    assert p.time_ratio == pytest.approx(1.0 / 0.95, rel=1e-12)
    assert p.energy_ratio == pytest.approx(v * v, rel=1e-12)
    assert p.edp_ratio == pytest.approx(v * v / 0.95, rel=1e-12)


def test_mixed_profile_time_ratio_uses_alpha(config, fixtures):
    profile = fixtures.q5_commercial_warm.profile
    u = 0.10
    setting = PvcSetting(u, NO_DOWNGRADE)
    sweep = run_sweep(profile, [STOCK, setting], config.cpu, config.disk)
    expected = profile.alpha / (1.0 - u) + (1.0 - profile.alpha)
    assert sweep.points[1].time_ratio == pytest.approx(expected, rel=1e-12)


def test_edp_worsens_with_deeper_underclock_at_fixed_voltage(config):
    """At a fixed downgrade factor, edp_ratio = v^2/(1-u) strictly grows
    with u: underclocking beyond the first step buys nothing back."""
    profile = pure_cpu_profile(config)
    v = VoltageDowngrade("medium", 0.8)
    settings_list = [STOCK] + [PvcSetting(u, v) for u in (0.05, 0.10, 0.15)]
    sweep = run_sweep(profile, settings_list, config.cpu, config.disk)
    ratios = [p.edp_ratio for p in sweep.points[1:]]
    assert ratios[0] < ratios[1] < ratios[2]


@settings(deadline=None, max_examples=40)
@given(
    u=st.floats(0.0, 0.5),
    factor=st.floats(0.5, 1.0),
)
def test_operating_points_satisfy_edp_identity(config, u, factor):
    profile = pure_cpu_profile(config)
    setting = PvcSetting(u, VoltageDowngrade("small", factor))
    sweep = run_sweep(profile, [STOCK, setting], config.cpu, config.disk)
    for p in sweep.points:
        assert abs(p.edp_ratio - p.energy_ratio * p.time_ratio) <= 1e-12


def test_noise_protocol_is_seeded_and_stays_close(config):
    profile = pure_cpu_profile(config)
    settings_list = default_settings({"small": 0.9, "medium": 0.8})
    a = run_sweep(
        profile, settings_list, config.cpu, config.disk, noise_sigma=0.02, seed=42
    )
    b = run_sweep(
        profile, settings_list, config.cpu, config.disk, noise_sigma=0.02, seed=42
    )
    clean = run_sweep(profile, settings_list, config.cpu, config.disk)
    for pa, pb, pc in zip(a.points, b.points, clean.points):
        assert pa.time_ratio == pb.time_ratio  # same seed, same draw
        assert pa.time_ratio == pytest.approx(pc.time_ratio, rel=0.1)


def test_noisy_baseline_ratio_is_still_exactly_one(config):
    profile = pure_cpu_profile(config)
    sweep = run_sweep(
        profile, [STOCK], config.cpu, config.disk, noise_sigma=0.02, seed=7
    )
    assert sweep.baseline.time_ratio == 1.0
    assert sweep.baseline.energy_ratio == 1.0


# ------------------------------------------------------------- edp curves


def test_constant_edp_curve_is_reciprocal():
    curve = constant_edp_curve(0.5, 2.0, samples=7)
    assert len(curve.time_ratios) == 7
    assert curve.time_ratios[0] == 0.5 and curve.time_ratios[-1] == 2.0
    for t, e in zip(curve.time_ratios, curve.energy_ratios):
        assert t * e == pytest.approx(1.0, rel=1e-12)


def test_constant_edp_curve_validates():
    with pytest.raises(ValueError):
        constant_edp_curve(0.0, 2.0)
    with pytest.raises(ValueError):
        constant_edp_curve(2.0, 1.0)
    with pytest.raises(ValueError):
        constant_edp_curve(0.5, 2.0, samples=1)


def test_below_edp_curve():
    assert below_edp_curve(point("u5-med", 1.03, 0.51, u=0.05))
    assert not below_edp_curve(point("stock", 1.0, 1.0))
    assert not below_edp_curve(point("u15-med", 1.2, 0.9, u=0.15))


# -------------------------------------------------------- point selection


def test_select_operating_point_stock_at_unit_budget():
    sweep = sweep_of(
        [
            point("stock", 1.0, 1.0),
            point("u5-med", 1.03, 0.51, u=0.05),
            point("u10-med", 1.06, 0.58, u=0.10),
        ]
    )
    chosen = select_operating_point(sweep, max_time_ratio=1.0)
    assert chosen.label == "stock"


def test_select_operating_point_picks_cheapest_feasible():
    sweep = sweep_of(
        [
            point("stock", 1.0, 1.0),
            point("u5-med", 1.03, 0.51, u=0.05),
            point("u10-med", 1.06, 0.58, u=0.10),
            point("u15-med", 1.10, 0.70, u=0.15),
        ]
    )
    chosen = select_operating_point(sweep, max_time_ratio=1.05)
    assert chosen.label == "u5-med"


def test_select_operating_point_ignores_dominated_points():
    """Points that cost more energy and more time never win."""
    sweep = sweep_of(
        [
            point("stock", 1.0, 1.0),
            point("u5-med", 1.03, 0.51, u=0.05),
            point("u10-med", 1.05, 0.60, u=0.10),
            point("u15-med", 1.04, 0.55, u=0.15),
        ]
    )
    chosen = select_operating_point(sweep, max_time_ratio=1.05)
    assert chosen.label == "u5-med"


def test_select_operating_point_errors_when_infeasible():
    sweep = sweep_of([point("stock", 1.0, 1.0), point("u5-med", 1.03, 0.51, u=0.05)])
    with pytest.raises(ValueError):
        select_operating_point(sweep, max_time_ratio=0.5)


@given(scale=st.floats(1e-3, 1e6))
def test_selection_invariant_under_uniform_scaling(scale):
    points = [
        point("stock", 1.0, 1.0),
        point("u5-med", 1.03, 0.51, u=0.05),
        point("u10-med", 1.06, 0.58, u=0.10),
    ]
    scaled = [
        point(p.label, p.time_ratio, p.energy_ratio, p.setting.underclock_fraction, scale)
        for p in points
    ]
    a = select_operating_point(sweep_of(points), 1.05)
    b = select_operating_point(sweep_of(scaled), 1.05)
    assert a.label == b.label


# ------------------------------------------------------------ calibration


def test_calibrate_voltage_factor_examples():
    assert calibrate_voltage_factor(1.0, 0.0) == 1.0
    assert calibrate_voltage_factor(0.53, 0.05) == pytest.approx(0.7096, abs=5e-4)
    assert calibrate_voltage_factor(0.84, 0.05) == pytest.approx(0.8934, abs=5e-4)


def test_calibrate_voltage_factor_validates_args():
    with pytest.raises(ValueError):
        calibrate_voltage_factor(0.0, 0.05)
    with pytest.raises(ValueError):
        calibrate_voltage_factor(0.5, 1.0)


def test_calibrate_voltage_factor_can_exceed_stock():
    assert calibrate_voltage_factor(1.2, 0.05) > 1.0


def test_calibrate_cpu_fraction_examples():
    assert calibrate_cpu_fraction(1.03, 0.05) == pytest.approx(0.57, rel=1e-12)
    assert calibrate_cpu_fraction(1.0, 0.10) == 0.0


def test_calibrate_cpu_fraction_rejects_out_of_range():
    with pytest.raises(ValueError):
        calibrate_cpu_fraction(0.99, 0.05)
    with pytest.raises(ValueError):
        calibrate_cpu_fraction(1.2, 0.05)  # beyond 1/0.95
    with pytest.raises(ValueError):
        calibrate_cpu_fraction(1.03, 0.0)


@given(alpha=st.floats(0.0, 1.0), u=st.floats(0.01, 0.9))
def test_calibrate_cpu_fraction_round_trips_forward_model(alpha, u):
    observed = alpha / (1.0 - u) + (1.0 - alpha)
    assert calibrate_cpu_fraction(observed, u) == pytest.approx(alpha, abs=1e-9)


@given(v=st.floats(0.1, 1.0), u=st.floats(0.0, 0.9))
def test_calibrate_voltage_factor_round_trips_forward_model(v, u):
    observed = v * v / (1.0 - u)
    assert calibrate_voltage_factor(observed, u) == pytest.approx(v, rel=1e-9)


def test_sweep_then_calibrate_recovers_fixture_factors(config, fixtures):
    """Measuring the simulator and inverting the measurement returns the
    voltage factors the fixture was built with (on CPU-bound work)."""
    my = fixtures.q5_mysql_memory
    sweep = run_sweep(
        my.profile,
        default_settings(my.voltage_factors),
        config.cpu,
        config.disk,
    )
    for label, factor in my.voltage_factors.items():
        p = sweep.point(label)
        recovered = calibrate_voltage_factor(
            p.edp_ratio, p.setting.underclock_fraction
        )
        assert recovered == pytest.approx(factor, rel=1e-9)

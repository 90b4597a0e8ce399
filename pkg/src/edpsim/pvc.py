"""Voltage/frequency sweeps, operating-point selection and calibration.

Everything here works in ratio space against the stock setting.  For a
purely CPU-bound workload the model predicts

    time_ratio   = 1 / (1 - u)
    energy_ratio = v^2
    edp_ratio    = v^2 / (1 - u)

where u is the underclock fraction and v the voltage downgrade factor.
Mixed workloads stretch only their CPU-bound fraction alpha, so
time_ratio = alpha / (1 - u) + (1 - alpha).  The two calibration helpers
invert these relations from observed ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import Query, SelectionEnv, WorkProfile, execute_profile, execute_selection
from .power_model import (
    STOCK,
    CpuModel,
    DiskModel,
    PvcSetting,
    VoltageDowngrade,
)

DEFAULT_UNDERCLOCKS = (0.05, 0.10, 0.15)

_LEVEL_TAGS = {"small": "small", "medium": "med"}


def setting_label(setting: PvcSetting) -> str:
    """Stable label: "stock" or "u{percent}-{small|med}"."""
    if (
        setting.underclock_fraction == 0.0
        and setting.downgrade.level == "none"
        and setting.pstate_cap is None
    ):
        return "stock"
    pct = round(setting.underclock_fraction * 100)
    tag = _LEVEL_TAGS.get(setting.downgrade.level, setting.downgrade.level)
    return f"u{pct}-{tag}"


def parse_setting_label(label: str, factors: dict[str, float]) -> PvcSetting:
    """Inverse of setting_label given per-level (or per-label) voltage factors."""
    if label == "stock":
        return STOCK
    if not label.startswith("u") or "-" not in label:
        raise ValueError(f"cannot parse setting label {label!r}")
    pct_part, tag = label[1:].split("-", 1)
    level = {"med": "medium", "small": "small"}.get(tag)
    if level is None:
        raise ValueError(f"unknown downgrade tag {tag!r} in {label!r}")
    factor = factors.get(label, factors.get(level))
    if factor is None:
        raise ValueError(f"no voltage factor known for {label!r}")
    return PvcSetting(int(pct_part) / 100.0, VoltageDowngrade(level, factor))


def default_settings(factors: dict[str, float]) -> list[PvcSetting]:
    """Stock plus {5, 10, 15}% underclock at small and medium downgrades.

    factors may be keyed by level ("small"/"medium") or by full setting
    label ("u5-med", ...) for per-setting calibrated values.
    """
    settings = [STOCK]
    for level in ("small", "medium"):
        for u in DEFAULT_UNDERCLOCKS:
            label = f"u{round(u * 100)}-{_LEVEL_TAGS[level]}"
            factor = factors.get(label, factors.get(level))
            if factor is None:
                raise ValueError(f"no voltage factor for {label!r}")
            settings.append(PvcSetting(u, VoltageDowngrade(level, factor)))
    return settings


@dataclass(frozen=True)
class OperatingPoint:
    """One sweep point: ratios against stock plus the absolute numbers."""

    setting: PvcSetting
    label: str
    time_ratio: float
    energy_ratio: float
    edp_ratio: float
    absolute_time_s: float
    absolute_energy_j: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple[OperatingPoint, ...]
    baseline: OperatingPoint

    def point(self, label: str) -> OperatingPoint:
        for p in self.points:
            if p.label == label:
                return p
        raise KeyError(label)


@dataclass(frozen=True)
class EdpCurve:
    """Samples of the constant energy-delay-product curve e * t = 1."""

    time_ratios: tuple[float, ...]
    energy_ratios: tuple[float, ...]


def edp(energy_j: float, time_s: float) -> float:
    """Energy-delay product: energy times elapsed time."""
    return energy_j * time_s


def theoretical_edp(voltage: float, frequency: float) -> float:
    """Power-law prediction, proportional form: V^2 / F.

    The ratio of two of these is the predicted edp_ratio between two
    operating points for CPU-bound work.
    """
    if voltage <= 0.0 or frequency <= 0.0:
        raise ValueError("voltage and frequency must be > 0")
    return voltage * voltage / frequency


def trimmed_mean_of_five(samples: list[float] | tuple[float, ...]) -> float:
    """Mean of the middle three of five samples (min and max dropped)."""
    if len(samples) != 5:
        raise ValueError(f"need exactly 5 samples, got {len(samples)}")
    return sum(sorted(samples)[1:4]) / 3.0


def _measure(
    work: WorkProfile | list[Query],
    cpu: CpuModel,
    disk: DiskModel,
    setting: PvcSetting,
    env: SelectionEnv | None,
    noise_sigma: float,
    rng: np.random.Generator | None,
) -> tuple[float, float]:
    """(elapsed, cpu_energy) for one setting, optionally via the 5-run
    trimmed-mean protocol with multiplicative noise on elapsed time."""
    if isinstance(work, WorkProfile):
        report = execute_profile(work, cpu, disk, setting)
        elapsed, cpu_energy = report.elapsed_s, report.cpu_energy_j
    else:
        if env is None:
            raise ValueError("selection workloads need a SelectionEnv")
        elapsed = 0.0
        cpu_energy = 0.0
        for q in work:
            report = execute_selection(env, q, setting)
            elapsed += report.elapsed_s
            cpu_energy += report.cpu_energy_j
    if noise_sigma <= 0.0:
        return elapsed, cpu_energy
    if rng is None:
        raise ValueError("noise requires a seeded generator")
    # busy time scales with the noise factor, so energy scales along
    factors = 1.0 + noise_sigma * rng.standard_normal(5)
    factors = np.clip(factors, 0.01, None)
    times = [elapsed * f for f in factors]
    energies = [cpu_energy * f for f in factors]
    return trimmed_mean_of_five(times), trimmed_mean_of_five(energies)


def run_sweep(
    work: WorkProfile | list[Query],
    settings: list[PvcSetting],
    cpu: CpuModel,
    disk: DiskModel,
    env: SelectionEnv | None = None,
    noise_sigma: float = 0.0,
    seed: int | None = None,
) -> SweepResult:
    """Measure the workload under every setting and form ratios vs stock.

    Ratios use CPU energy, matching a meter on the CPU power rail.  The
    stock setting must be part of the sweep; it becomes the baseline.
    """
    if not any(
        s.underclock_fraction == 0.0
        and s.downgrade.level == "none"
        and s.pstate_cap is None
        for s in settings
    ):
        raise ValueError("the sweep must include the stock setting")
    rng = np.random.Generator(np.random.PCG64(seed)) if noise_sigma > 0.0 else None

    base_time, base_energy = _measure(work, cpu, disk, STOCK, env, noise_sigma, rng)
    points = []
    for setting in settings:
        t, e = (
            (base_time, base_energy)
            if setting == STOCK
            else _measure(work, cpu, disk, setting, env, noise_sigma, rng)
        )
        points.append(
            OperatingPoint(
                setting=setting,
                label=setting_label(setting),
                time_ratio=t / base_time,
                energy_ratio=e / base_energy,
                edp_ratio=(e / base_energy) * (t / base_time),
                absolute_time_s=t,
                absolute_energy_j=e,
            )
        )
    baseline = next(p for p in points if p.label == "stock")
    return SweepResult(points=tuple(points), baseline=baseline)


def constant_edp_curve(
    t_min: float = 0.5, t_max: float = 2.0, samples: int = 151
) -> EdpCurve:
    """The break-even curve e = 1/t in ratio space.  Points below it have a
    better energy-delay product than stock."""
    if not 0.0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    ts = np.linspace(t_min, t_max, samples)
    return EdpCurve(
        time_ratios=tuple(float(t) for t in ts),
        energy_ratios=tuple(float(1.0 / t) for t in ts),
    )


def below_edp_curve(point: OperatingPoint) -> bool:
    """True when the point beats the constant-EDP break-even curve."""
    return point.edp_ratio < 1.0


def select_operating_point(
    sweep: SweepResult, max_time_ratio: float
) -> OperatingPoint:
    """Cheapest-energy point whose slowdown stays within max_time_ratio.

    Ties break toward the lower time ratio, then the lower underclock, so
    the choice is deterministic.
    """
    feasible = [p for p in sweep.points if p.time_ratio <= max_time_ratio]
    if not feasible:
        raise ValueError(f"no sweep point satisfies time_ratio <= {max_time_ratio}")
    return min(
        feasible,
        key=lambda p: (
            p.energy_ratio,
            p.time_ratio,
            p.setting.underclock_fraction,
        ),
    )


def calibrate_voltage_factor(observed_edp_ratio: float, underclock: float) -> float:
    """Invert edp_ratio = v^2 / (1 - u) for CPU-bound work: v = sqrt(r (1 - u)).

    A result above 1.0 means the observation implies a voltage above stock
    (not reachable by downgrading); callers decide how to flag that.
    """
    if observed_edp_ratio <= 0.0:
        raise ValueError("observed_edp_ratio must be > 0")
    if not 0.0 <= underclock < 1.0:
        raise ValueError("underclock must be in [0, 1)")
    return math.sqrt(observed_edp_ratio * (1.0 - underclock))


def calibrate_cpu_fraction(observed_time_ratio: float, underclock: float) -> float:
    """Invert time_ratio = alpha / (1 - u) + (1 - alpha) for alpha.

    The observable must lie in [1, 1/(1-u)]; anything else cannot be
    explained by the 1/frequency time model.
    """
    if not 0.0 < underclock < 1.0:
        raise ValueError("underclock must be in (0, 1) to calibrate alpha")
    lo, hi = 1.0, 1.0 / (1.0 - underclock)
    if not lo <= observed_time_ratio <= hi:
        raise ValueError(
            f"time ratio {observed_time_ratio} outside [{lo}, {hi:.6f}]; the "
            f"1/frequency time model cannot explain it at u={underclock}"
        )
    return (observed_time_ratio - 1.0) * (1.0 - underclock) / underclock

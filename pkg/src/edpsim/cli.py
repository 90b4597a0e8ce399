"""Command-line front end.

Four subcommands, each writing plot-ready CSV files into --out:

    edpsim pvc-sweep   voltage/frequency sweep of a fixture workload
    edpsim qed-sweep   batched-versus-sequential selection comparison
    edpsim disk-sweep  sequential/random disk throughput and energy
    edpsim calibrate   invert observed ratios into model parameters

Every subcommand is deterministic given (config, seed): reruns produce
byte-identical files.  Exit code is 0 iff all requested rows were written;
config and fixture errors exit nonzero with a one-line diagnostic.  The
EDPSIM_OUT environment variable overrides the default output directory.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from .config import AppConfig, data_path, load_config
from .engine import SelectionEnv
from .power_model import disk_read_sim
from .pvc import (
    below_edp_curve,
    calibrate_cpu_fraction,
    calibrate_voltage_factor,
    constant_edp_curve,
    default_settings,
    parse_setting_label,
    run_sweep,
)
from .qed import compare_runs, run_qed, run_sequential
from .workload import FixtureSet, load_fixtures, read_workload

PROFILE_FIXTURE_NAMES = (
    "q5_commercial_warm",
    "q5_commercial_cold",
    "q5_mysql_memory",
)
CALIBRATION_TARGETS_NAME = "calibration_targets.csv"

# sigma of the multiplicative measurement noise enabled by --noise
NOISE_SIGMA = 0.02

DEFAULT_DISK_TOTAL_KB = 1.6e6
DEFAULT_DISK_BLOCKS_KB = (4.0, 8.0, 16.0, 32.0)


def _fmt(value) -> str:
    """Stable CSV cell formatting: shortest round-trip repr for floats."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _out_dir(args) -> Path:
    out = Path(args.out).resolve()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> tuple[AppConfig, FixtureSet]:
    config = load_config(args.config)
    fixtures = load_fixtures(config.cpu, config.disk, path=args.fixtures)
    return config, fixtures


def cmd_pvc_sweep(args) -> int:
    config, fixtures = _load(args)
    if args.fixture not in PROFILE_FIXTURE_NAMES:
        raise ValueError(
            f"unknown profile fixture {args.fixture!r}; "
            f"choose one of {', '.join(PROFILE_FIXTURE_NAMES)}"
        )
    fixture = getattr(fixtures, args.fixture)
    factors = dict(config.downgrade_factors)
    factors.update(fixture.voltage_factors)

    if args.settings:
        labels = [s.strip() for s in args.settings.split(",") if s.strip()]
        settings = [parse_setting_label(label, factors) for label in labels]
    else:
        settings = default_settings(factors)

    sweep = run_sweep(
        fixture.profile,
        settings,
        config.cpu,
        config.disk,
        noise_sigma=NOISE_SIGMA if args.noise else 0.0,
        seed=args.seed,
    )

    out = _out_dir(args)
    rows = [
        [
            p.label,
            round(p.setting.underclock_fraction * 100),
            p.setting.downgrade.level,
            p.absolute_time_s,
            p.absolute_energy_j,
            p.time_ratio,
            p.energy_ratio,
            p.edp_ratio,
            below_edp_curve(p),
        ]
        for p in sweep.points
    ]
    _write_csv(
        out / "pvc_sweep.csv",
        [
            "setting_label",
            "underclock_pct",
            "downgrade",
            "time_s",
            "cpu_energy_j",
            "time_ratio",
            "energy_ratio",
            "edp_ratio",
            "below_edp_curve",
        ],
        rows,
    )
    curve = constant_edp_curve()
    _write_csv(
        out / "edp_curve.csv",
        ["time_ratio", "energy_ratio"],
        [[t, e] for t, e in zip(curve.time_ratios, curve.energy_ratios)],
    )
    print(f"wrote {out / 'pvc_sweep.csv'} ({len(rows)} settings) and edp_curve.csv")
    return 0


def cmd_qed_sweep(args) -> int:
    config, fixtures = _load(args)
    fixture = fixtures.qed_lineitem
    env = SelectionEnv(
        table=fixture.table,
        cpu=config.cpu,
        disk=config.disk,
        costs=fixture.costs,
    )
    workload = (
        read_workload(args.workload) if args.workload else list(fixture.workload)
    )
    for q in workload:
        if q.table != fixture.table.name or q.predicate.column != fixture.table.column:
            raise ValueError(
                f"query {q.id!r} targets {q.table}.{q.predicate.column}, "
                f"but the fixture table is "
                f"{fixture.table.name}.{fixture.table.column}"
            )

    if args.batch_sizes:
        batch_sizes = [int(b) for b in args.batch_sizes.split(",") if b.strip()]
    else:
        batch_sizes = list(fixture.batch_sizes)
    for k in batch_sizes:
        if not 1 <= k <= len(workload):
            raise ValueError(
                f"batch size {k} outside 1..{len(workload)} (workload size)"
            )

    out = _out_dir(args)
    comparison_rows: list[list] = [["sequential", 1.0, 1.0, 1.0]]
    for k in batch_sizes:
        # a run at batch size k is one full batch: the first k queries
        queries = workload[:k]
        seq = run_sequential(queries, env)
        batched = run_qed(queries, k, env)
        report = compare_runs(seq, batched)
        comparison_rows.append(
            [k, report.energy_ratio, report.avg_response_ratio, report.edp_ratio]
        )
        run_rows = [
            [q.id, run.scheme, run.responses[q.id], run.batch_index[q.id]]
            for run in (seq, batched)
            for q in queries
        ]
        _write_csv(
            out / f"qed_run_{k}.csv",
            ["query_id", "scheme", "response_s", "batch_index"],
            run_rows,
        )
    _write_csv(
        out / "qed_sweep.csv",
        ["batch_size", "energy_ratio", "response_ratio", "edp_ratio"],
        comparison_rows,
    )
    print(
        f"wrote {out / 'qed_sweep.csv'} ({len(batch_sizes)} batch sizes "
        "plus the sequential baseline) and per-run reports"
    )
    return 0


def cmd_disk_sweep(args) -> int:
    config = load_config(args.config)
    if args.blocks:
        blocks = [float(b) for b in args.blocks.split(",") if b.strip()]
    else:
        blocks = list(DEFAULT_DISK_BLOCKS_KB)
    total_kb = args.total_kb

    rows = []
    for pattern in ("sequential", "random"):
        for block in blocks:
            report = disk_read_sim(config.disk, pattern, block, total_kb)
            rows.append(
                [pattern, block, report.throughput_kb_s, report.energy_per_kb_j]
            )
    out = _out_dir(args)
    _write_csv(
        out / "disk_sweep.csv",
        ["pattern", "block_kb", "throughput_kb_s", "energy_per_kb"],
        rows,
    )
    print(f"wrote {out / 'disk_sweep.csv'} ({len(rows)} rows)")
    return 0


def _parse_pct(label: str) -> float:
    if label == "stock":
        return 0.0
    return int(label[1:].split("-", 1)[0]) / 100.0


def cmd_calibrate(args) -> int:
    targets_path = Path(args.targets) if args.targets else data_path(
        CALIBRATION_TARGETS_NAME
    )
    with open(targets_path, newline="") as fh:
        reader = csv.DictReader(fh)
        targets = list(reader)

    rows = []
    for target in targets:
        label = target["setting_label"].strip()
        edp_observed = float(target["observed_edp_ratio"])
        time_observed = float(target["observed_time_ratio"])
        u = _parse_pct(label)
        notes = []

        voltage_factor: float | str = ""
        try:
            voltage_factor = calibrate_voltage_factor(edp_observed, u)
        except ValueError as exc:
            notes.append(f"voltage factor infeasible: {exc}")
        else:
            if voltage_factor > 1.0:
                notes.append(
                    "voltage factor above stock; not reachable by downgrading"
                )

        cpu_fraction: float | str = ""
        if u == 0.0:
            notes.append("cpu fraction needs a nonzero underclock")
        else:
            try:
                cpu_fraction = calibrate_cpu_fraction(time_observed, u)
            except ValueError as exc:
                notes.append(f"cpu fraction infeasible: {exc}")

        if voltage_factor != "" and cpu_fraction != "":
            model_time = cpu_fraction / (1.0 - u) + (1.0 - cpu_fraction)
            model_edp = voltage_factor**2 * model_time
        elif voltage_factor != "":
            model_time = 1.0 / (1.0 - u)
            model_edp = voltage_factor**2 / (1.0 - u)
            if u > 0.0:
                notes.append("forward model assumes a pure-CPU workload")
        else:
            model_time = ""
            model_edp = ""

        rows.append(
            [
                label,
                round(u * 100),
                edp_observed,
                time_observed,
                voltage_factor,
                cpu_fraction,
                model_time,
                model_edp,
                "" if model_time == "" else model_time - time_observed,
                "" if model_edp == "" else model_edp - edp_observed,
                "; ".join(notes) if notes else "ok",
            ]
        )

    out = _out_dir(args)
    _write_csv(
        out / "calibration.csv",
        [
            "setting_label",
            "underclock_pct",
            "observed_edp_ratio",
            "observed_time_ratio",
            "voltage_factor",
            "cpu_fraction",
            "model_time_ratio",
            "model_edp_ratio",
            "time_residual",
            "edp_residual",
            "note",
        ],
        rows,
    )
    print(f"wrote {out / 'calibration.csv'} ({len(rows)} settings)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edpsim",
        description="Energy-delay simulator for database workloads: "
        "voltage/frequency sweeps, batched selections, disk experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="config file (TOML)")
        p.add_argument(
            "--fixtures", default=None, help="fixture file overriding the packaged one"
        )
        p.add_argument(
            "--out",
            default=os.environ.get("EDPSIM_OUT", "."),
            help="output directory (default: EDPSIM_OUT or the cwd)",
        )
        p.add_argument("--seed", type=int, default=0, help="RNG seed")

    p = sub.add_parser("pvc-sweep", help="voltage/frequency sweep of a fixture")
    common(p)
    p.add_argument(
        "--fixture",
        default="q5_commercial_warm",
        help=f"profile fixture name ({', '.join(PROFILE_FIXTURE_NAMES)})",
    )
    p.add_argument(
        "--settings",
        default=None,
        help="comma-separated setting labels, e.g. stock,u5-med,u10-small",
    )
    p.add_argument(
        "--noise",
        action="store_true",
        help="measure each point as the trimmed mean of 5 noisy runs",
    )
    p.set_defaults(func=cmd_pvc_sweep)

    p = sub.add_parser("qed-sweep", help="batched vs sequential selections")
    common(p)
    p.add_argument(
        "--batch-sizes",
        default=None,
        help="comma-separated batch sizes (default: the fixture's sizes)",
    )
    p.add_argument(
        "--workload", default=None, help="workload CSV overriding the fixture's"
    )
    p.set_defaults(func=cmd_qed_sweep)

    p = sub.add_parser("disk-sweep", help="disk throughput and energy per KB")
    common(p)
    p.add_argument(
        "--blocks", default=None, help="comma-separated block sizes in KB"
    )
    p.add_argument(
        "--total-kb",
        type=float,
        default=DEFAULT_DISK_TOTAL_KB,
        help="total KB read per sweep point",
    )
    p.set_defaults(func=cmd_disk_sweep)

    p = sub.add_parser("calibrate", help="invert observed ratios into parameters")
    common(p)
    p.add_argument(
        "--targets",
        default=None,
        help="CSV of observed ratios (default: the packaged targets)",
    )
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # argparse handles its own usage errors
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

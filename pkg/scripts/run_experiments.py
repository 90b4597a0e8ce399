#!/usr/bin/env python3
"""Reproduce every reference table in one go.

Runs the four CLI experiments into results/<name>/ so the CSVs can be
plotted or diffed.  Everything is deterministic; rerunning overwrites the
same bytes.

    python3 scripts/run_experiments.py [--out results]
"""

import argparse
import sys
from pathlib import Path

from edpsim import cli

RUNS = [
    ("pvc_warm", ["pvc-sweep", "--fixture", "q5_commercial_warm"]),
    ("pvc_cold", ["pvc-sweep", "--fixture", "q5_commercial_cold"]),
    ("pvc_mysql", ["pvc-sweep", "--fixture", "q5_mysql_memory"]),
    ("pvc_warm_noisy", ["pvc-sweep", "--noise", "--seed", "1"]),
    ("qed", ["qed-sweep"]),
    ("disk", ["disk-sweep"]),
    ("calibration", ["calibrate"]),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output root directory")
    args = parser.parse_args()

    root = Path(args.out)
    for name, argv in RUNS:
        rc = cli.main(argv + ["--out", str(root / name)])
        if rc != 0:
            print(f"experiment {name!r} failed (exit {rc})", file=sys.stderr)
            return rc
    print(f"all experiments written under {root}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())

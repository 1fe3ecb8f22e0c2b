#!/usr/bin/env python3
"""Reduced-budget accuracy check on the small benchmarks.

Five seeded runs per dataset with a capped generation count. Prints one
line per dataset and exits nonzero if any mean falls below its floor.
"""

import argparse
import sys
from pathlib import Path

import tribefs as t

FLOORS = {"wine": 97.0, "wbcd": 96.5, "zoo": 95.0}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", type=Path, default=Path("data"))
    parser.add_argument("--datasets", nargs="+", default=sorted(FLOORS),
                        help="descriptor names (default: %(default)s)")
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--max-generations", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    failures = 0
    for name in args.datasets:
        config = t.RunConfig(
            dataset=name,
            data_dir=str(args.data_dir),
            runs=args.runs,
            max_generations=args.max_generations,
            patience=10,
            seed=args.seed,
        )
        try:
            report = t.run_experiment(config)
        except (FileNotFoundError, t.DataError, t.ConfigError) as err:
            print(f"{name}: {err}", file=sys.stderr)
            return 1
        floor = FLOORS.get(name)
        verdict = ""
        if floor is not None:
            ok = report.accuracy_mean >= floor
            failures += not ok
            verdict = f"  floor {floor:.1f} {'ok' if ok else 'MISSED'}"
        print(f"{name:12s} mean {report.accuracy_mean:6.2f}  "
              f"std {report.accuracy_std:5.2f}  "
              f"{report.wall_time:6.1f}s{verdict}")
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Sweep the contest interval and report mean accuracy per setting.

Contests every generation churn tribe sizes before selection can act on
the new members; the interesting comparison is interval 1 against 2.
"""

import argparse
import sys
from pathlib import Path

import tribefs as t


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", default="sonar")
    parser.add_argument("--data-dir", type=Path, default=Path("data"))
    parser.add_argument("--values", type=int, nargs="+", default=[1, 2, 4, 8])
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--max-generations", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    config = t.RunConfig(
        dataset=args.dataset,
        data_dir=str(args.data_dir),
        runs=args.runs,
        max_generations=args.max_generations,
        patience=10,
        seed=args.seed,
    )
    try:
        points = t.sweep(config, "competition_interval", args.values)
    except (FileNotFoundError, t.DataError, t.ConfigError) as err:
        print(err, file=sys.stderr)
        return 1
    for value, report in points:
        print(f"interval {value:3d}  mean {report.accuracy_mean:6.2f}  "
              f"std {report.accuracy_std:5.2f}  {report.wall_time:6.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points.

Subcommands: ``run`` (one experiment), ``sweep`` (one layout parameter over
several values), ``oracle`` (exhaustive search), ``stats`` (rank and paired
tests over collected results), and ``fetch-data`` (benchmark downloads).
Exit codes: 0 on success, 1 for configuration or data problems, 2 for
anything unexpected at runtime.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .core import mask_to_string
from .data import DataError, fetch_dataset, load_descriptors
from .fitness import CLASSIFIER_KINDS, FitnessProtocol
from .harness import (
    SWEEPABLE,
    ConfigError,
    RunConfig,
    friedman_test,
    paired_t_test,
    resolve_dataset,
    run_experiment,
    sweep,
)
from .oracle import exhaustive_best_subset

USAGE_EXIT = 1
RUNTIME_EXIT = 2


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, DataError, FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_EXIT
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_EXIT
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return RUNTIME_EXIT
    except Exception as err:  # noqa: BLE001 - boundary of the program
        print(f"unexpected failure: {err}", file=sys.stderr)
        return RUNTIME_EXIT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tribefs",
        description="Tribe-based genetic feature selection",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one experiment")
    _add_experiment_arguments(run)
    run.add_argument("--out", help="directory for report.json and CSV tables")
    run.set_defaults(handler=_cmd_run)

    sweep_cmd = commands.add_parser("sweep", help="vary one parameter")
    _add_experiment_arguments(sweep_cmd)
    sweep_cmd.add_argument("--param", required=True, choices=SWEEPABLE)
    sweep_cmd.add_argument(
        "--values", required=True, help="comma-separated integers, e.g. 1,2,4"
    )
    sweep_cmd.add_argument("--out", help="directory for sweep.csv and sub-reports")
    sweep_cmd.set_defaults(handler=_cmd_sweep)

    oracle = commands.add_parser("oracle", help="exhaustive subset search")
    oracle.add_argument("--dataset", required=True, help="descriptor name or CSV path")
    oracle.add_argument("--data-dir", default="data")
    oracle.add_argument("--classifier", choices=CLASSIFIER_KINDS)
    oracle.add_argument("--folds", type=int)
    oracle.add_argument("--fold-seed", type=int)
    oracle.add_argument("--regularization", type=float)
    oracle.add_argument(
        "--max-features",
        type=int,
        default=20,
        help="refuse exhaustive search beyond this many features",
    )
    oracle.add_argument("--out", help="file for the oracle result JSON")
    oracle.set_defaults(handler=_cmd_oracle)

    stats = commands.add_parser("stats", help="statistics over collected results")
    stats_sub = stats.add_subparsers(dest="stats_command", required=True)

    friedman = stats_sub.add_parser(
        "friedman", help="Friedman rank test over a methods-by-datasets matrix"
    )
    friedman.add_argument("matrix", help="CSV: method name, then one column per dataset")
    friedman.set_defaults(handler=_cmd_friedman)

    ttest = stats_sub.add_parser(
        "ttest", help="paired t-test between two rows of a matrix"
    )
    ttest.add_argument("matrix")
    ttest.add_argument("--method-a", required=True)
    ttest.add_argument("--method-b", required=True)
    ttest.set_defaults(handler=_cmd_ttest)

    collect = stats_sub.add_parser(
        "collect", help="append one matrix row from report.json files"
    )
    collect.add_argument("reports", nargs="+", help="report.json files, one per dataset")
    collect.add_argument("--method", required=True, help="row name for these reports")
    collect.add_argument("--out", required=True, help="matrix CSV to create or extend")
    collect.set_defaults(handler=_cmd_collect)

    fetch = commands.add_parser("fetch-data", help="download benchmark datasets")
    group = fetch.add_mutually_exclusive_group(required=True)
    group.add_argument("--name", action="append", help="descriptor name (repeatable)")
    group.add_argument("--all", action="store_true", help="fetch every descriptor")
    fetch.add_argument("--data-dir", default="data")
    fetch.add_argument("--descriptors", help="alternative descriptor JSON file")
    fetch.add_argument("--force", action="store_true", help="re-download existing files")
    fetch.set_defaults(handler=_cmd_fetch)

    return parser


def _add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", help="descriptor name or CSV path")
    parser.add_argument("--data-dir", dest="data_dir")
    parser.add_argument("--config", help="JSON config file; flags override its keys")
    parser.add_argument("--tribe-size", dest="tribe_size", type=int)
    parser.add_argument("--n-tribes", dest="n_tribes", type=int)
    parser.add_argument("--means", help="comma-separated tribe means, e.g. 2,5,8")
    parser.add_argument("--sigma", type=float)
    parser.add_argument(
        "--allow-infeasible",
        dest="allow_infeasible",
        action="store_const",
        const=True,
        help="run even when the plan fails validation",
    )
    parser.add_argument("--classifier", choices=CLASSIFIER_KINDS)
    parser.add_argument("--folds", type=int)
    parser.add_argument("--fold-seed", dest="fold_seed", type=int)
    parser.add_argument("--regularization", type=float)
    parser.add_argument("--subsample", type=float)
    parser.add_argument("--crossover-rate", dest="crossover_rate", type=float)
    parser.add_argument("--mutation-rate", dest="mutation_rate", type=float)
    parser.add_argument("--selection-pressure", dest="selection_pressure", type=float)
    parser.add_argument(
        "--competition-interval", dest="competition_interval", type=int
    )
    parser.add_argument("--award", type=int)
    parser.add_argument("--penalty", type=int)
    parser.add_argument("--min-tribe-size", dest="min_tribe_size", type=int)
    parser.add_argument(
        "--max-generations", "--generations", dest="max_generations", type=int
    )
    parser.add_argument("--patience", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--runs", type=int)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    if args.config:
        merged.update(json.loads(Path(args.config).read_text()))
    for name in (
        "dataset", "data_dir", "tribe_size", "n_tribes", "sigma",
        "allow_infeasible", "classifier", "folds", "fold_seed", "regularization",
        "subsample", "crossover_rate", "mutation_rate", "selection_pressure",
        "competition_interval", "award", "penalty", "min_tribe_size",
        "max_generations", "patience", "seed", "runs",
    ):
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    if getattr(args, "means", None) is not None:
        merged["means"] = _parse_int_list(args.means, "--means")
    return RunConfig.from_dict(merged)


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(piece) for piece in text.split(",") if piece.strip()]
    except ValueError as err:
        raise ConfigError(f"{flag} expects comma-separated integers: {text!r}") from err


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = run_experiment(config)
    print(
        f"{report.dataset_name}: "
        f"accuracy {report.accuracy_mean:.2f} +/- {report.accuracy_std:.2f} "
        f"({len(report.results)} run(s)), {report.mean_selected:.1f} features"
    )
    for result in report.results:
        print(
            f"  run {result.run}: {result.best_accuracy:.2f}% "
            f"with {result.best_count} features ({result.best_mask}) "
            f"in {result.generations} generations"
        )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report.save_json(out / "report.json")
        report.save_tables(out)
        print(f"report written to {out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    values = _parse_int_list(args.values, "--values")
    if not values:
        raise ConfigError("--values is empty")
    points = sweep(config, args.param, values)
    rows = [
        (value, report.accuracy_mean, report.accuracy_std, report.mean_selected)
        for value, report in points
    ]
    print(f"{args.param}: " + ", ".join(f"{v}={a:.2f}" for v, a, _, _ in rows))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                [args.param, "accuracy_mean", "accuracy_std", "mean_selected"]
            )
            for value, mean, std, selected in rows:
                writer.writerow([value, f"{mean:.6f}", f"{std:.6f}", f"{selected:.3f}"])
        for value, report in points:
            point_dir = out / f"{args.param}-{value}"
            point_dir.mkdir(exist_ok=True)
            report.save_json(point_dir / "report.json")
            report.save_tables(point_dir)
        print(f"sweep written to {out}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    protocol_kwargs = {}
    if args.classifier is not None:
        protocol_kwargs["classifier"] = args.classifier
    if args.folds is not None:
        protocol_kwargs["folds"] = args.folds
    if args.fold_seed is not None:
        protocol_kwargs["fold_seed"] = args.fold_seed
    if args.regularization is not None:
        protocol_kwargs["regularization"] = args.regularization
    protocol = FitnessProtocol(**protocol_kwargs)
    config = RunConfig(dataset=args.dataset, data_dir=args.data_dir)
    dataset = resolve_dataset(config)
    result = exhaustive_best_subset(dataset, protocol, max_features=args.max_features)
    mask_text = mask_to_string(result.best_mask)
    print(
        f"{dataset.name}: best {result.best_accuracy:.4f}% with "
        f"{int(result.best_mask.sum())} features ({mask_text}); "
        f"{result.evaluations} subsets in {result.wall_time:.1f}s"
    )
    if args.out:
        payload = {
            "dataset": dataset.name,
            "best_mask": mask_text,
            "best_accuracy": result.best_accuracy,
            "evaluations": result.evaluations,
            "wall_time": result.wall_time,
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def _read_matrix(path) -> tuple[list[str], list[str], np.ndarray]:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 2 or len(rows[0]) < 2:
        raise DataError(f"{path}: expected a header and at least one method row")
    datasets = rows[0][1:]
    methods = [row[0] for row in rows[1:]]
    try:
        values = np.array([[float(cell) for cell in row[1:]] for row in rows[1:]])
    except ValueError as err:
        raise DataError(f"{path}: non-numeric accuracy cell ({err})") from err
    if values.shape[1] != len(datasets):
        raise DataError(f"{path}: ragged matrix")
    return methods, datasets, values


def _cmd_friedman(args: argparse.Namespace) -> int:
    methods, datasets, values = _read_matrix(args.matrix)
    result = friedman_test(values)
    print(
        f"Friedman over {result.n_methods} methods x {result.n_datasets} datasets: "
        f"chi2 = {result.statistic:.4f}, p = {result.p_value:.6g}"
    )
    for method, rank in zip(methods, result.average_ranks):
        print(f"  {method}: average rank {rank:.3f}")
    return 0


def _cmd_ttest(args: argparse.Namespace) -> int:
    methods, _, values = _read_matrix(args.matrix)
    try:
        row_a = methods.index(args.method_a)
        row_b = methods.index(args.method_b)
    except ValueError as err:
        raise DataError(f"method not in matrix: {err}") from err
    result = paired_t_test(values[row_a], values[row_b])
    print(
        f"paired t-test {args.method_a} vs {args.method_b}: "
        f"t = {result.statistic:.4f}, p = {result.p_value:.6g}, "
        f"mean difference = {result.mean_difference:.4f} over {result.n} datasets"
    )
    return 0


def _cmd_collect(args: argparse.Namespace) -> int:
    names, accuracies = [], []
    for path in args.reports:
        payload = json.loads(Path(path).read_text())
        names.append(payload["dataset_name"])
        accuracies.append(float(payload["accuracy_mean"]))
    out = Path(args.out)
    if out.exists():
        with open(out, newline="") as handle:
            rows = list(csv.reader(handle))
        if rows and rows[0][1:] != names:
            raise DataError(
                f"{out}: existing matrix covers datasets {rows[0][1:]}, "
                f"these reports cover {names}"
            )
    else:
        rows = [["method", *names]]
    rows.append([args.method, *[f"{a:.6f}" for a in accuracies]])
    with open(out, "w", newline="") as handle:
        csv.writer(handle).writerows(rows)
    print(f"added row {args.method!r} ({len(names)} datasets) to {out}")
    return 0


def _cmd_fetch(args: argparse.Namespace) -> int:
    descriptors = load_descriptors(args.descriptors)
    names = sorted(descriptors) if args.all else args.name
    for name in names:
        path = fetch_dataset(name, args.data_dir, descriptors, force=args.force)
        print(f"{name}: ready at {path}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

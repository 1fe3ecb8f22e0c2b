"""Experiment orchestration: seeded runs, reports, sweeps, and statistics.

A run config is a flat record (it mirrors the JSON config file one to one)
from which the tribe plan, operator settings, and fitness protocol are
built. Runs are seeded through a spawning seed tree, so run r of a config is
the same bit for bit no matter how many runs precede it, and a report's
fingerprint covers everything except wall-clock timing.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

from .competition import CompetitionConfig, apply_competition
from .core import (
    Individual,
    Population,
    best_individual,
    count_selected,
    mask_to_string,
)
from .data import CsvSchema, Dataset, load_csv, load_descriptors, load_named
from .evolution import EvolutionConfig, evolve_generation
from .fitness import FitnessCache, FitnessProtocol, make_evaluator
from .genesis import init_population
from .params import TribePlan

__all__ = [
    "ConfigError",
    "RunConfig",
    "GenerationRecord",
    "CompetitionEvent",
    "RunResult",
    "RunReport",
    "resolve_dataset",
    "run_experiment",
    "sweep",
    "SWEEPABLE",
    "friedman_test",
    "FriedmanResult",
    "paired_t_test",
    "TTestResult",
]


class ConfigError(ValueError):
    """A run configuration is malformed."""


@dataclass(frozen=True)
class RunConfig:
    """One experiment, flat and JSON-serializable.

    ``dataset`` is a descriptor name (resolved under ``data_dir``) or a CSV
    path; in-memory datasets are passed to :func:`run_experiment` directly
    instead. ``n_tribes``, ``means`` and ``sigma`` default to the derived
    layout; ``patience`` stops a run early after that many generations
    without improvement (0 disables early stopping).
    """

    dataset: str | None = None
    data_dir: str = "data"
    tribe_size: int = 600
    n_tribes: int | None = None
    means: tuple[int, ...] | None = None
    sigma: float | None = None
    allow_infeasible: bool = False
    classifier: str = "linear-svm"
    folds: int = 10
    fold_seed: int = 0
    regularization: float = 1.0
    subsample: float | None = None
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    selection_pressure: float = 1.8
    competition_interval: int = 2
    award: int = 1
    penalty: int = 1
    min_tribe_size: int = 2
    max_generations: int = 100
    patience: int = 30
    seed: int = 0
    runs: int = 1

    def __post_init__(self):
        if self.max_generations < 0:
            raise ConfigError("max_generations must be non-negative")
        if self.patience < 0:
            raise ConfigError("patience must be non-negative")
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        if self.means is not None:
            object.__setattr__(self, "means", tuple(int(m) for m in self.means))
        # Fail fast on bad operator settings instead of inside run r of n.
        self.evolution()
        self.competition()
        self.protocol()

    def evolution(self) -> EvolutionConfig:
        try:
            return EvolutionConfig(
                crossover_rate=self.crossover_rate,
                mutation_rate=self.mutation_rate,
                selection_pressure=self.selection_pressure,
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def competition(self) -> CompetitionConfig:
        try:
            return CompetitionConfig(
                interval=self.competition_interval,
                award=self.award,
                penalty=self.penalty,
                min_tribe_size=self.min_tribe_size,
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def protocol(self) -> FitnessProtocol:
        try:
            return FitnessProtocol(
                classifier=self.classifier,
                folds=self.folds,
                fold_seed=self.fold_seed,
                regularization=self.regularization,
                subsample=self.subsample,
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def plan(self, n_features: int) -> TribePlan:
        try:
            return TribePlan.derive(
                n_features,
                tribe_size=self.tribe_size,
                n_tribes=self.n_tribes,
                means=self.means,
                sigma=self.sigma,
                allow_infeasible=self.allow_infeasible,
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["means"] is not None:
            out["means"] = list(out["means"])
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cleaned = dict(raw)
        if cleaned.get("means") is not None:
            cleaned["means"] = tuple(int(m) for m in cleaned["means"])
        try:
            return cls(**cleaned)
        except TypeError as err:
            raise ConfigError(str(err)) from err

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class GenerationRecord:
    """Per-generation telemetry row."""

    generation: int
    tribe_sizes: tuple[int, ...]
    tribe_best: tuple[float, ...]
    best_accuracy: float
    best_count: int


@dataclass(frozen=True)
class CompetitionEvent:
    """A contest that actually moved individuals."""

    generation: int
    winner: int
    loser: int
    sizes: tuple[int, ...]


@dataclass(frozen=True)
class RunResult:
    """Final state and trace of a single seeded run."""

    run: int
    best_mask: str
    best_accuracy: float
    best_count: int
    generations: int
    evaluations: int
    wall_time: float
    history: tuple[GenerationRecord, ...]
    competitions: tuple[CompetitionEvent, ...]


@dataclass(frozen=True)
class RunReport:
    """Everything one experiment produced.

    ``fingerprint`` hashes the canonical JSON form, which excludes wall
    times; two reports from the same config and seed have equal
    fingerprints on any machine.
    """

    config: dict
    dataset_name: str
    n_features: int
    n_instances: int
    results: tuple[RunResult, ...]
    accuracy_mean: float
    accuracy_std: float
    mean_selected: float
    wall_time: float

    def canonical_dict(self) -> dict:
        out = self.to_dict()
        out.pop("wall_time")
        for result in out["results"]:
            result.pop("wall_time")
        return out

    def to_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "dataset_name": self.dataset_name,
            "n_features": self.n_features,
            "n_instances": self.n_instances,
            "results": [
                {
                    "run": r.run,
                    "best_mask": r.best_mask,
                    "best_accuracy": r.best_accuracy,
                    "best_count": r.best_count,
                    "generations": r.generations,
                    "evaluations": r.evaluations,
                    "wall_time": r.wall_time,
                    "history": [dataclasses.asdict(g) for g in r.history],
                    "competitions": [dataclasses.asdict(c) for c in r.competitions],
                }
                for r in self.results
            ],
            "accuracy_mean": self.accuracy_mean,
            "accuracy_std": self.accuracy_std,
            "mean_selected": self.mean_selected,
            "wall_time": self.wall_time,
        }

    def fingerprint(self) -> str:
        canonical = json.dumps(self.canonical_dict(), sort_keys=True, default=_plain)
        return hashlib.sha256(canonical.encode()).hexdigest()

    def save_json(self, path) -> None:
        payload = self.to_dict()
        payload["fingerprint"] = self.fingerprint()
        Path(path).write_text(json.dumps(payload, indent=2, default=_plain) + "\n")

    def save_tables(self, out_dir) -> None:
        """Write summary.csv, trace.csv, and competitions.csv under out_dir."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "summary.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["run", "best_accuracy", "best_count", "best_mask",
                 "generations", "evaluations", "wall_time"]
            )
            for r in self.results:
                writer.writerow(
                    [r.run, f"{r.best_accuracy:.6f}", r.best_count, r.best_mask,
                     r.generations, r.evaluations, f"{r.wall_time:.3f}"]
                )
        with open(out_dir / "trace.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["run", "generation", "best_accuracy", "best_count",
                 "tribe_sizes", "tribe_best"]
            )
            for r in self.results:
                for g in r.history:
                    writer.writerow(
                        [r.run, g.generation, f"{g.best_accuracy:.6f}", g.best_count,
                         " ".join(map(str, g.tribe_sizes)),
                         " ".join(f"{b:.4f}" for b in g.tribe_best)]
                    )
        with open(out_dir / "competitions.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["run", "generation", "winner", "loser", "sizes"])
            for r in self.results:
                for c in r.competitions:
                    writer.writerow(
                        [r.run, c.generation, c.winner, c.loser,
                         " ".join(map(str, c.sizes))]
                    )


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    raise TypeError(f"not JSON-serializable: {type(value)}")


def resolve_dataset(config: RunConfig) -> Dataset:
    """Turn the config's dataset reference into a loaded dataset.

    Descriptor names resolve under ``data_dir``; anything else must be a CSV
    path. A bare CSV loads with the default schema (no header, label last),
    except files in this package's own export format, recognized by their
    trailing ``class`` header cell, which load with their header.
    """
    if config.dataset is None:
        raise ConfigError("config names no dataset")
    descriptors = load_descriptors()
    if config.dataset in descriptors:
        return load_named(config.dataset, config.data_dir, descriptors)
    path = Path(config.dataset)
    if not path.exists():
        raise FileNotFoundError(
            f"{config.dataset!r} is neither a known dataset name nor a file"
        )
    with open(path, newline="") as handle:
        first = next(csv.reader(handle), None)
    if first and first[-1].strip() == "class":
        return load_csv(path, CsvSchema(label_column="class", header=True))
    return load_csv(path)


def run_experiment(config: RunConfig, dataset: Dataset | None = None) -> RunReport:
    """Execute ``config.runs`` seeded runs and aggregate them into a report.

    The fitness cache is shared across runs (values are deterministic, so
    this only saves time); each run's RNG streams branch from one master
    seed, keeping runs independent of each other's consumption.
    """
    if dataset is None:
        dataset = resolve_dataset(config)
    plan = config.plan(dataset.n_features)
    protocol = config.protocol()
    cache = FitnessCache()
    evaluate = make_evaluator(dataset, protocol, cache)
    started = time.perf_counter()
    run_seeds = np.random.SeedSequence(config.seed).spawn(config.runs)
    results = tuple(
        _single_run(r, seed, dataset, plan, config, evaluate, cache)
        for r, seed in enumerate(run_seeds)
    )
    accuracies = np.array([r.best_accuracy for r in results])
    counts = np.array([r.best_count for r in results])
    return RunReport(
        config=config.to_dict(),
        dataset_name=dataset.name,
        n_features=dataset.n_features,
        n_instances=dataset.n_instances,
        results=results,
        accuracy_mean=float(accuracies.mean()),
        accuracy_std=float(accuracies.std(ddof=1)) if len(results) > 1 else 0.0,
        mean_selected=float(counts.mean()),
        wall_time=time.perf_counter() - started,
    )


def _single_run(
    run_index: int,
    seed: np.random.SeedSequence,
    dataset: Dataset,
    plan: TribePlan,
    config: RunConfig,
    evaluate,
    cache: FitnessCache,
) -> RunResult:
    started = time.perf_counter()
    misses_before = cache.misses
    init_seed, evolve_seed, contest_seed = seed.spawn(3)
    population = init_population(plan, np.random.default_rng(init_seed))
    for tribe in population.tribes:
        for individual in tribe.individuals:
            individual.fitness = evaluate(individual)

    evolution = config.evolution()
    competition = config.competition()
    evolve_rng = np.random.default_rng(evolve_seed)
    contest_rng = np.random.default_rng(contest_seed)

    best = _population_best(population)
    history = [_record(0, population, best)]
    events: list[CompetitionEvent] = []
    last_improvement = 0
    generations_run = 0
    for generation in range(1, config.max_generations + 1):
        population = Population(
            tribes=[
                evolve_generation(tribe, evolution, evaluate, evolve_rng)
                for tribe in population.tribes
            ]
        )
        if generation % competition.interval == 0:
            population, record = apply_competition(
                population, competition, evaluate, contest_rng
            )
            if record is not None:
                events.append(
                    CompetitionEvent(
                        generation=generation,
                        winner=record.winner,
                        loser=record.loser,
                        sizes=record.sizes,
                    )
                )
        generations_run = generation
        challenger = _population_best(population)
        if _better(challenger, best):
            best = challenger
            last_improvement = generation
        history.append(_record(generation, population, best))
        if config.patience and generation - last_improvement >= config.patience:
            break
    return RunResult(
        run=run_index,
        best_mask=mask_to_string(best.mask),
        best_accuracy=best.fitness,
        best_count=count_selected(best),
        generations=generations_run,
        evaluations=cache.misses - misses_before,
        wall_time=time.perf_counter() - started,
        history=tuple(history),
        competitions=tuple(events),
    )


def _population_best(population: Population) -> Individual:
    candidates = [best_individual(tribe) for tribe in population.tribes]
    return min(
        candidates,
        key=lambda ind: (-ind.fitness, count_selected(ind), ind.mask.tobytes()),
    )


def _better(challenger: Individual, incumbent: Individual) -> bool:
    challenger_key = (
        -challenger.fitness,
        count_selected(challenger),
        challenger.mask.tobytes(),
    )
    incumbent_key = (
        -incumbent.fitness,
        count_selected(incumbent),
        incumbent.mask.tobytes(),
    )
    return challenger_key < incumbent_key


def _record(
    generation: int, population: Population, best: Individual
) -> GenerationRecord:
    return GenerationRecord(
        generation=generation,
        tribe_sizes=tuple(tribe.size for tribe in population.tribes),
        tribe_best=tuple(
            float(best_individual(tribe).fitness) for tribe in population.tribes
        ),
        best_accuracy=float(best.fitness),
        best_count=count_selected(best),
    )


SWEEPABLE = ("n_tribes", "competition_interval")


def sweep(
    config: RunConfig,
    parameter: str,
    values,
    dataset: Dataset | None = None,
) -> list[tuple[int, RunReport]]:
    """Re-run one config across values of one layout parameter.

    Every point reuses the same master seed, so the sweep isolates the
    parameter. Sweeping ``n_tribes`` re-derives means and sigma for each
    count; explicit overrides would defeat the point, so they are rejected.
    """
    if parameter not in SWEEPABLE:
        raise ConfigError(f"can only sweep {SWEEPABLE}, not {parameter!r}")
    if parameter == "n_tribes" and (
        config.means is not None or config.sigma is not None
    ):
        raise ConfigError("sweeping n_tribes requires derived means and sigma")
    if dataset is None:
        dataset = resolve_dataset(config)
    points = []
    for value in values:
        point = config.replace(**{parameter: int(value)})
        points.append((int(value), run_experiment(point, dataset)))
    return points


@dataclass(frozen=True)
class FriedmanResult:
    """Friedman rank test over a methods-by-datasets accuracy matrix."""

    statistic: float
    p_value: float
    average_ranks: tuple[float, ...]
    n_methods: int
    n_datasets: int


def friedman_test(matrix) -> FriedmanResult:
    """Friedman test on rows=methods, columns=datasets.

    Higher accuracy earns a higher rank (ties share the average), and the
    statistic is the classic chi-square form without a tie correction,
    referred to the chi-square distribution with ``methods - 1`` degrees of
    freedom.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2 or matrix.shape[1] < 2:
        raise ValueError("need at least 2 methods and 2 datasets")
    if not np.isfinite(matrix).all():
        raise ValueError("accuracy matrix contains non-finite values")
    k, n = matrix.shape
    ranks = np.apply_along_axis(
        lambda column: scipy_stats.rankdata(column, method="average"), 0, matrix
    )
    average_ranks = ranks.mean(axis=1)
    statistic = (12.0 * n / (k * (k + 1))) * (
        float((average_ranks**2).sum()) - k * (k + 1) ** 2 / 4.0
    )
    p_value = float(scipy_stats.chi2.sf(statistic, k - 1))
    return FriedmanResult(
        statistic=float(statistic),
        p_value=p_value,
        average_ranks=tuple(float(r) for r in average_ranks),
        n_methods=k,
        n_datasets=n,
    )


@dataclass(frozen=True)
class TTestResult:
    """Two-sided paired t-test outcome; p is NaN when differences are constant."""

    statistic: float
    p_value: float
    mean_difference: float
    n: int


def paired_t_test(a, b) -> TTestResult:
    """Two-sided paired t-test of accuracy vectors ``a`` and ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired vectors must be 1-D and equally long")
    if a.size < 2:
        raise ValueError("need at least two pairs")
    differences = a - b
    spread = float(differences.std(ddof=1))
    mean = float(differences.mean())
    if spread == 0.0:
        # Identical per-pair differences: the statistic is undefined.
        return TTestResult(
            statistic=float("nan"),
            p_value=float("nan"),
            mean_difference=mean,
            n=a.size,
        )
    statistic = mean / (spread / np.sqrt(a.size))
    p_value = 2.0 * float(scipy_stats.t.sf(abs(statistic), a.size - 1))
    return TTestResult(
        statistic=float(statistic),
        p_value=p_value,
        mean_difference=mean,
        n=a.size,
    )

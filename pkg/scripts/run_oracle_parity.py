#!/usr/bin/env python3
"""Compare the engine against an exhaustive subset search on one dataset.

Both searches share a single evaluation protocol and fitness cache, so a
matching best accuracy means the engine found a subset the exhaustive
search scored identically, not merely a similar number.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

import tribefs as t


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", default="wbcd",
                        help="descriptor name or CSV path (default: wbcd)")
    parser.add_argument("--data-dir", type=Path, default=Path("data"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-generations", type=int, default=100)
    parser.add_argument("--max-features", type=int, default=20,
                        help="refuse exhaustive searches above this width")
    args = parser.parse_args(argv)

    config = t.RunConfig(
        dataset=args.dataset,
        data_dir=str(args.data_dir),
        seed=args.seed,
        runs=1,
        max_generations=args.max_generations,
        patience=args.max_generations,
    )
    try:
        dataset = t.resolve_dataset(config)
    except (FileNotFoundError, t.DataError) as err:
        print(err, file=sys.stderr)
        return 1
    protocol = config.protocol()
    cache = t.FitnessCache()

    started = time.perf_counter()
    oracle = t.exhaustive_best_subset(
        dataset, protocol, max_features=args.max_features, cache=cache
    )
    oracle_time = time.perf_counter() - started
    print(f"exhaustive: {oracle.best_accuracy:.4f} "
          f"({oracle.evaluations} subsets, {oracle_time:.1f}s)")

    evaluate = t.make_evaluator(dataset, protocol, cache)
    plan = config.plan(dataset.n_features)
    rng_init, rng_evolve, rng_contest = (
        np.random.default_rng(s)
        for s in np.random.SeedSequence(config.seed).spawn(3)
    )
    population = t.init_population(plan, rng_init)
    for tribe in population.tribes:
        for ind in tribe.individuals:
            ind.fitness = evaluate(ind)
    evolution = config.evolution()
    contest = config.competition()

    best = -1.0
    reached_at = None
    for generation in range(1, config.max_generations + 1):
        population = t.Population(
            tribes=[
                t.evolve_generation(tribe, evolution, evaluate, rng_evolve)
                for tribe in population.tribes
            ]
        )
        if generation % contest.interval == 0:
            population, _ = t.apply_competition(
                population, contest, evaluate, rng_contest
            )
        best = max(
            best,
            max(t.best_individual(tribe).fitness for tribe in population.tribes),
        )
        if best == oracle.best_accuracy:
            reached_at = generation
            break
    engine_time = time.perf_counter() - started - oracle_time
    print(f"engine:     {best:.4f} ({engine_time:.1f}s)")

    if best == oracle.best_accuracy:
        print(f"PARITY at generation {reached_at}")
        return 0
    print(f"NO PARITY after {config.max_generations} generations "
          f"(gap {oracle.best_accuracy - best:.4f})")
    return 2


if __name__ == "__main__":
    sys.exit(main())

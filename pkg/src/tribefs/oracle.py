"""Reference implementations the engine is checked against.

The exhaustive search scores every non-empty feature subset under the exact
evaluation protocol the engine uses, so engine results can be compared for
strict equality rather than proximity. The histogram recount is a deliberate
reimplementation of the tribe histogram with plain Python loops; property
tests use it to catch vectorization mistakes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import CountHistogram, Tribe
from .data import Dataset, stratified_folds
from .fitness import FitnessCache, FitnessProtocol, kfold_accuracy

__all__ = ["OracleResult", "exhaustive_best_subset", "brute_force_histogram"]


@dataclass(frozen=True)
class OracleResult:
    """Outcome of an exhaustive subset search."""

    best_mask: np.ndarray
    best_accuracy: float
    evaluations: int
    wall_time: float


def exhaustive_best_subset(
    dataset: Dataset,
    protocol: FitnessProtocol = FitnessProtocol(),
    max_features: int = 20,
    cache: FitnessCache | None = None,
) -> OracleResult:
    """Score all 2^N - 1 subsets and return the best.

    Ties resolve exactly as the engine resolves them: higher accuracy, then
    fewer selected features, then the lexicographically smallest mask.
    Refuses feature counts above ``max_features``; raise it knowingly for
    bigger searches. When a cache is supplied every subset's score lands in
    it, which lets an engine run replay the same numbers verbatim.
    """
    n = dataset.n_features
    if n > max_features:
        raise ValueError(
            f"exhaustive search over {n} features means 2^{n}-1 evaluations; "
            f"pass max_features={n} to insist"
        )
    fold_plan = stratified_folds(dataset, protocol.folds, protocol.fold_seed)
    start = time.perf_counter()
    best_key = None
    best_mask = None
    best_accuracy = -1.0
    evaluations = 0
    for code in range(1, 1 << n):
        mask = np.array([(code >> i) & 1 for i in range(n)], dtype=np.uint8)
        accuracy = kfold_accuracy(dataset, mask, protocol, fold_plan)
        evaluations += 1
        if cache is not None:
            cache.put(mask.tobytes(), accuracy)
        key = (-accuracy, int(mask.sum()), mask.tobytes())
        if best_key is None or key < best_key:
            best_key = key
            best_mask = mask
            best_accuracy = accuracy
    return OracleResult(
        best_mask=best_mask,
        best_accuracy=best_accuracy,
        evaluations=evaluations,
        wall_time=time.perf_counter() - start,
    )


def brute_force_histogram(tribe: Tribe) -> CountHistogram:
    """Recount a tribe's selected-count histogram without numpy."""
    counts: CountHistogram = {}
    for individual in tribe.individuals:
        selected = 0
        for bit in individual.mask.tolist():
            if bit:
                selected += 1
        counts[selected] = counts.get(selected, 0) + 1
    return counts

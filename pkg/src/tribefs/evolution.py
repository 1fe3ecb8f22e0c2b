"""Intra-tribe generation step.

Every operator here preserves the tribe's selected-count histogram exactly:
selection resamples individuals, crossover children inherit their own
parent's cardinality via a union-and-repair construction, and mutation only
moves an individual between adjacent cardinality classes by simultaneously
moving a partner the opposite way. A generation is rank selection, matched
crossover, paired mutation, evaluation, and elitist inheritance, in that
order.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .core import Individual, Tribe, best_index, count_selected

__all__ = [
    "EvolutionConfig",
    "CrossoverAlignmentError",
    "selection_probabilities",
    "rank_selection",
    "count_preserving_crossover",
    "paired_mutation",
    "evolve_generation",
]


@dataclass(frozen=True)
class EvolutionConfig:
    """Knobs of the per-generation operators."""

    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    selection_pressure: float = 1.8

    def __post_init__(self):
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must lie in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if not 1.0 < self.selection_pressure <= 2.0:
            raise ValueError("selection_pressure must lie in (1, 2]")


class CrossoverAlignmentError(ValueError):
    """No cut in the second parent matches the first parent's prefix count."""


def selection_probabilities(fitnesses: np.ndarray, pressure: float) -> np.ndarray:
    """Linear ranking probabilities, worst rank 1 through best rank n.

    Tied fitnesses share the average of their ranks, so a tribe with all
    fitnesses equal selects uniformly. With pressure s, rank r of n maps to
    ``(2 - s + 2 (s - 1) (r - 1) / (n - 1)) / n``; the best individual is
    selected s times as often as the average one.
    """
    fitnesses = np.asarray(fitnesses, dtype=float)
    n = fitnesses.size
    if n == 0:
        raise ValueError("cannot rank an empty tribe")
    if n == 1:
        return np.ones(1)
    ranks = rankdata(fitnesses, method="average")
    probs = (2.0 - pressure + 2.0 * (pressure - 1.0) * (ranks - 1.0) / (n - 1.0)) / n
    return probs


def rank_selection(
    tribe: Tribe, config: EvolutionConfig, rng: np.random.Generator
) -> list[Individual]:
    """Draw ``tribe.size`` individuals with replacement by rank.

    The tribe's best individual is guaranteed to appear at least once: when
    the draw misses it, it replaces one uniformly chosen slot.
    """
    fitnesses = np.array(
        [_require_fitness(ind, idx) for idx, ind in enumerate(tribe.individuals)]
    )
    probs = selection_probabilities(fitnesses, config.selection_pressure)
    n = tribe.size
    drawn = rng.choice(n, size=n, p=probs)
    elite = best_index(tribe)
    if elite not in drawn:
        drawn[int(rng.integers(n))] = elite
    return [tribe.individuals[i] for i in drawn]


def _require_fitness(ind: Individual, idx: int) -> float:
    if ind.fitness is None:
        raise ValueError(f"individual {idx} has no fitness; evaluate the tribe first")
    return ind.fitness


def count_preserving_crossover(
    parent_i: Individual,
    parent_j: Individual,
    cut_i: int,
    rng: np.random.Generator,
) -> tuple[Individual, Individual]:
    """Single-point crossover that keeps each child at its parent's cardinality.

    The cut in the second parent is not free: it is the shortest prefix of
    ``parent_j`` containing exactly as many set bits as ``parent_i`` has
    before ``cut_i``. Each child is the union of the other parent's prefix
    with its own parent's suffix; positions present in both halves collapse,
    so any deficit is repaired by setting uniformly chosen unset bits until
    the child's count matches its parent's again.

    Raises :class:`CrossoverAlignmentError` when ``parent_j`` has fewer set
    bits in total than the required prefix count; callers redraw the cut.
    """
    n = parent_i.n_features
    if parent_j.n_features != n:
        raise ValueError("parents must share one feature count")
    if not 1 <= cut_i <= n - 1:
        raise ValueError(f"cut must lie in [1, {n - 1}]")
    prefix_count = int(parent_i.mask[:cut_i].sum())
    if prefix_count == 0:
        cut_j = 0
    else:
        cumulative = np.cumsum(parent_j.mask)
        if int(cumulative[-1]) < prefix_count:
            raise CrossoverAlignmentError(
                f"second parent holds {int(cumulative[-1])} set bits, "
                f"fewer than the required prefix count {prefix_count}"
            )
        cut_j = int(np.searchsorted(cumulative, prefix_count, side="left")) + 1
    child_i = _splice(parent_j.mask, cut_j, parent_i.mask, cut_i)
    child_j = _splice(parent_i.mask, cut_i, parent_j.mask, cut_j)
    _repair(child_i, count_selected(parent_i), rng)
    _repair(child_j, count_selected(parent_j), rng)
    return Individual(child_i), Individual(child_j)


def _splice(
    prefix_mask: np.ndarray, prefix_cut: int, suffix_mask: np.ndarray, suffix_cut: int
) -> np.ndarray:
    """Union of one parent's prefix with the other parent's suffix."""
    child = np.zeros(prefix_mask.size, dtype=np.uint8)
    child[:prefix_cut] = prefix_mask[:prefix_cut]
    np.maximum(child[suffix_cut:], suffix_mask[suffix_cut:], out=child[suffix_cut:])
    return child


def _repair(mask: np.ndarray, target: int, rng: np.random.Generator) -> None:
    """Set uniformly chosen unset bits until popcount reaches the target."""
    deficit = target - int(mask.sum())
    if deficit > 0:
        unset = np.flatnonzero(mask == 0)
        mask[rng.choice(unset, size=deficit, replace=False)] = 1


def paired_mutation(
    tribe: Tribe, config: EvolutionConfig, rng: np.random.Generator
) -> Tribe:
    """Flip one bit per mutating individual, balanced by a partner flip.

    Each individual mutates with probability ``mutation_rate``. The primary
    flip targets a uniformly chosen position; its direction follows the
    current bit value. A partner is drawn from the cardinality class the
    primary individual is about to leave towards (pre-flip counts, partner
    distinct from the mutant) and flips one bit the opposite way, so the
    class sizes are unchanged. The mutation is cancelled when no partner
    exists or when losing a bit would empty the subset.
    """
    individuals = list(tribe.individuals)
    n = len(individuals)
    n_features = tribe.n_features
    for i in range(n):
        if rng.random() >= config.mutation_rate:
            continue
        position = int(rng.integers(n_features))
        mask_i = individuals[i].mask
        m = int(mask_i.sum())
        gaining = mask_i[position] == 0
        if not gaining and m == 1:
            continue  # losing the only set bit would empty the subset
        partner_class = m + 1 if gaining else m - 1
        partners = [
            j
            for j in range(n)
            if j != i and count_selected(individuals[j]) == partner_class
        ]
        if not partners:
            continue
        j = partners[int(rng.integers(len(partners)))]
        mask_j = individuals[j].mask
        if gaining:
            partner_positions = np.flatnonzero(mask_j == 1)
        else:
            partner_positions = np.flatnonzero(mask_j == 0)
        partner_position = int(partner_positions[rng.integers(partner_positions.size)])
        individuals[i] = _flipped(individuals[i], position)
        individuals[j] = _flipped(individuals[j], partner_position)
    return Tribe(individuals=individuals, mu=tribe.mu, sigma=tribe.sigma)


def _flipped(ind: Individual, position: int) -> Individual:
    mask = ind.mask.copy()
    mask[position] ^= 1
    return Individual(mask)


def evolve_generation(
    tribe: Tribe,
    config: EvolutionConfig,
    fitness_fn,
    rng: np.random.Generator,
) -> Tribe:
    """Run one full generation and return the successor tribe.

    Rank selection draws a pool of partners; each slot of the tribe is then
    matched with a not-yet-consumed partner of the same cardinality (slots in
    index order, partners in draw order). A matched slot is replaced either
    by its crossover child with the partner (probability ``crossover_rate``)
    or by the partner itself; unmatched slots keep their current individual.
    Paired mutation follows, new individuals are evaluated with
    ``fitness_fn``, and finally the previous generation's best individual
    replaces the weakest individual of its own cardinality class, so the
    best fitness never decreases and the histogram never changes.
    """
    for idx, ind in enumerate(tribe.individuals):
        _require_fitness(ind, idx)
    previous_best = tribe.individuals[best_index(tribe)]
    n = tribe.size
    n_features = tribe.n_features

    selected = rank_selection(tribe, config, rng)
    pools: dict[int, deque[Individual]] = defaultdict(deque)
    for ind in selected:
        pools[count_selected(ind)].append(ind)

    successors = list(tribe.individuals)
    for i, original in enumerate(tribe.individuals):
        pool = pools.get(count_selected(original))
        if not pool:
            continue
        partner = pool.popleft()
        if n_features >= 2 and rng.random() < config.crossover_rate:
            while True:
                cut = int(rng.integers(1, n_features))
                try:
                    child, _ = count_preserving_crossover(original, partner, cut, rng)
                except CrossoverAlignmentError:
                    continue  # impossible for equal counts, possible for unequal
                break
            successors[i] = child
        else:
            successors[i] = partner

    mutated = paired_mutation(
        Tribe(individuals=successors, mu=tribe.mu, sigma=tribe.sigma), config, rng
    )
    for ind in mutated.individuals:
        if ind.fitness is None:
            ind.fitness = fitness_fn(ind)

    elite_class = count_selected(previous_best)
    candidates = [
        i
        for i, ind in enumerate(mutated.individuals)
        if count_selected(ind) == elite_class
    ]
    weakest = min(candidates, key=lambda i: (mutated.individuals[i].fitness, i))
    mutated.individuals[weakest] = previous_best
    return mutated

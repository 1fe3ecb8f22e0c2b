"""Population initialization.

Each tribe's size is split across cardinality bins by a discrete Gaussian
profile, rounded to integers with a largest-remainder repair so the bin
counts always sum to the exact tribe size. Individuals are then drawn
uniformly from the subsets of each bin's cardinality. The same allocation
routine is reused by inter-tribe competition when a tribe is resized, which
keeps growth and shrinkage consistent with the initial shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CountHistogram, Individual, Population, Tribe
from .params import TribePlan, validate_plan

__all__ = [
    "Allocation",
    "allocate_counts",
    "sample_individual",
    "sample_tribe",
    "init_population",
    "InfeasiblePlanError",
]


class InfeasiblePlanError(ValueError):
    """Raised when a plan fails validation and overrides were not requested."""


@dataclass(eq=False)
class Allocation:
    """Integer head-count per cardinality bin for one tribe.

    ``counts`` maps cardinality to the number of individuals initialized at
    that cardinality (zero bins omitted) and always sums to ``size``.
    ``quotas`` keeps the fractional targets the integers were rounded from;
    competition uses them to pick which bin absorbs rounding corrections.
    """

    counts: CountHistogram
    size: int
    n_features: int
    mu: float
    sigma: float
    quotas: np.ndarray = field(repr=False)

    def __post_init__(self):
        if sum(self.counts.values()) != self.size:
            raise ValueError("bin counts must sum to the tribe size")


def _gaussian_quotas(n_features: int, mu: float, sigma: float, size: int) -> np.ndarray:
    """Fractional per-bin targets; index m-1 holds the quota of cardinality m."""
    m = np.arange(1, n_features + 1, dtype=float)
    weights = np.exp(-((m - mu) ** 2) / (2.0 * sigma * sigma))
    total = weights.sum()
    if not np.isfinite(total) or total <= 0:
        raise ValueError("degenerate profile: no cardinality receives weight")
    return size * weights / total


def allocate_counts(n_features: int, mu: float, sigma: float, size: int) -> Allocation:
    """Split ``size`` individuals over cardinalities 1..n_features.

    The Gaussian profile is normalized over the valid cardinality range,
    each bin's quota is rounded to the nearest integer, and the leftover
    (at most a handful of individuals either way) is repaired one step at a
    time: surpluses go to the most under-rounded bin, deficits come out of
    the most over-rounded bin that still has members. Ties prefer the bin
    closer to the mean for additions and farther from it for removals, then
    the lower / higher cardinality respectively, so the result is unique.
    """
    if size < 1:
        raise ValueError("size must be positive")
    if not 1 <= mu <= n_features:
        raise ValueError("mu must lie within [1, n_features]")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    quotas = _gaussian_quotas(n_features, mu, sigma, size)
    base = np.floor(quotas + 0.5).astype(np.int64)
    residue = size - int(base.sum())
    m_values = np.arange(1, n_features + 1)
    distance = np.abs(m_values - mu)
    while residue != 0:
        gap = quotas - base
        if residue > 0:
            order = np.lexsort((m_values, distance, -gap))
            base[order[0]] += 1
            residue -= 1
        else:
            eligible = base > 0
            # Push already-over-rounded bins to the front; empty bins never donate.
            order = np.lexsort((-m_values, -distance, gap))
            order = order[eligible[order]]
            base[order[0]] -= 1
            residue += 1
    counts = {int(m): int(c) for m, c in zip(m_values, base) if c > 0}
    return Allocation(
        counts=counts,
        size=size,
        n_features=n_features,
        mu=mu,
        sigma=sigma,
        quotas=quotas,
    )


def sample_individual(
    n_features: int, cardinality: int, rng: np.random.Generator
) -> Individual:
    """Draw one subset uniformly from all subsets of the given cardinality."""
    if not 1 <= cardinality <= n_features:
        raise ValueError("cardinality must lie within [1, n_features]")
    mask = np.zeros(n_features, dtype=np.uint8)
    positions = rng.choice(n_features, size=cardinality, replace=False)
    mask[positions] = 1
    return Individual(mask)


def sample_tribe(allocation: Allocation, rng: np.random.Generator) -> Tribe:
    """Materialize a tribe matching an allocation, bins filled in ascending order."""
    individuals = [
        sample_individual(allocation.n_features, m, rng)
        for m in sorted(allocation.counts)
        for _ in range(allocation.counts[m])
    ]
    return Tribe(individuals=individuals, mu=allocation.mu, sigma=allocation.sigma)


def init_population(plan: TribePlan, rng: np.random.Generator) -> Population:
    """Build the full starting population for a plan.

    The plan is validated first; diagnostics raise unless the plan opts into
    ``allow_infeasible``. Each tribe draws from its own child generator so a
    tribe's contents do not depend on how many tribes precede it.
    """
    diagnostics = validate_plan(plan)
    if diagnostics and not plan.allow_infeasible:
        raise InfeasiblePlanError("; ".join(diagnostics))
    streams = rng.spawn(plan.n_tribes)
    tribes = []
    for mu, stream in zip(plan.means, streams):
        allocation = allocate_counts(plan.n_features, mu, plan.sigma, plan.tribe_size)
        tribes.append(sample_tribe(allocation, stream))
    return Population(tribes=tribes)

"""Core domain types for tribe-based feature selection.

An individual is a fixed-length binary mask over the feature set: bit i set
means feature i is part of the candidate subset. A tribe is an ordered list
of individuals whose selected-feature counts cluster around a target
cardinality, and a population is the full collection of tribes. Everything
here is a container or a pure query; the genetic operators that mutate state
live in :mod:`tribefs.evolution` and :mod:`tribefs.competition`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CountHistogram",
    "Individual",
    "Tribe",
    "Population",
    "count_selected",
    "histogram",
    "best_index",
    "best_individual",
    "mask_from_string",
    "mask_to_string",
]

# Sparse by convention: cardinality -> number of individuals, zero bins omitted.
CountHistogram = dict[int, int]


@dataclass(eq=False)
class Individual:
    """One candidate feature subset plus its cached fitness.

    The mask is stored as a read-only uint8 vector so individuals can be
    shared freely between tribes and selection draws; operators produce new
    individuals instead of editing masks in place. ``fitness`` is the
    cross-validated accuracy in percent, ``None`` until evaluated.
    """

    mask: np.ndarray
    fitness: float | None = None

    def __post_init__(self):
        mask = np.ascontiguousarray(self.mask, dtype=np.uint8)
        if mask.ndim != 1 or mask.size == 0:
            raise ValueError("mask must be a non-empty 1-D bit vector")
        if mask.max() > 1:
            raise ValueError("mask entries must be 0 or 1")
        if not mask.any():
            raise ValueError("the empty feature subset is not admissible")
        mask.flags.writeable = False
        self.mask = mask

    @property
    def n_features(self) -> int:
        return int(self.mask.size)

    def key(self) -> bytes:
        """Hashable identity of the subset (fitness-cache key)."""
        return self.mask.tobytes()

    def __repr__(self):  # pragma: no cover - debugging aid
        fit = "?" if self.fitness is None else f"{self.fitness:.2f}"
        return f"Individual({mask_to_string(self.mask)}, fitness={fit})"


@dataclass(eq=False)
class Tribe:
    """An ordered group of individuals with a shared cardinality profile.

    ``mu`` and ``sigma`` describe the Gaussian profile the tribe's
    selected-count histogram is shaped by; they stay fixed for the life of
    the tribe while its size may change through competition.
    """

    individuals: list[Individual]
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.individuals:
            raise ValueError("a tribe must contain at least one individual")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        sizes = {ind.n_features for ind in self.individuals}
        if len(sizes) != 1:
            raise ValueError("all individuals in a tribe must share one feature count")

    @property
    def size(self) -> int:
        return len(self.individuals)

    @property
    def n_features(self) -> int:
        return self.individuals[0].n_features


@dataclass(eq=False)
class Population:
    """All tribes of one run, in fixed index order."""

    tribes: list[Tribe]

    def __post_init__(self):
        if not self.tribes:
            raise ValueError("a population must contain at least one tribe")

    @property
    def size(self) -> int:
        return sum(t.size for t in self.tribes)

    @property
    def n_features(self) -> int:
        return self.tribes[0].n_features


def count_selected(individual: Individual) -> int:
    """Number of features the individual selects (popcount of the mask)."""
    return int(individual.mask.sum())


def histogram(tribe: Tribe) -> CountHistogram:
    """Selected-count histogram of a tribe, zero bins omitted."""
    return dict(Counter(count_selected(ind) for ind in tribe.individuals))


def best_index(tribe: Tribe) -> int:
    """Index of the tribe's best individual.

    Ordering: highest fitness first; ties broken by fewer selected features,
    then by lower index. Raises if any individual is unevaluated, because a
    half-evaluated tribe has no well-defined best.
    """
    best: tuple | None = None
    best_idx = -1
    for idx, ind in enumerate(tribe.individuals):
        if ind.fitness is None:
            raise ValueError(f"individual {idx} has no fitness; evaluate before ranking")
        key = (-ind.fitness, count_selected(ind), idx)
        if best is None or key < best:
            best = key
            best_idx = idx
    return best_idx


def best_individual(tribe: Tribe) -> Individual:
    """The tribe's best individual under the :func:`best_index` ordering."""
    return tribe.individuals[best_index(tribe)]


def mask_from_string(bits: str) -> np.ndarray:
    """Parse a bit string like ``"1011001100"`` into a mask array."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")


def mask_to_string(mask: np.ndarray) -> str:
    """Render a mask as a compact bit string."""
    return "".join("1" if b else "0" for b in np.asarray(mask).tolist())

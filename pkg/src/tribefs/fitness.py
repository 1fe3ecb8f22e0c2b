"""Wrapper fitness: cross-validated accuracy on the selected features.

An individual's fitness is the mean per-fold accuracy (percent) of a
classifier trained on just its selected columns, under a stratified k-fold
plan that is fixed once per run. Features are standardized per fold from
training statistics only. Everything is deterministic given the dataset,
the mask, and the protocol, which is what makes the subset-keyed fitness
cache sound.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import Individual
from .data import Dataset, FoldPlan, stratified_folds

__all__ = [
    "CLASSIFIER_KINDS",
    "FitnessProtocol",
    "FitnessCache",
    "LinearSVM",
    "train_linear_svm",
    "kfold_accuracy",
    "make_evaluator",
]

CLASSIFIER_KINDS = ("linear-svm", "nearest-centroid", "nearest-neighbor")


@dataclass(frozen=True)
class FitnessProtocol:
    """Everything that defines one fitness value besides the mask itself.

    ``subsample`` optionally keeps only that fraction of each class's
    training rows per fold (at least one row per class), which trades
    fidelity for speed on large datasets; the rows kept are derived from
    ``fold_seed``, so the protocol stays deterministic.
    """

    classifier: str = "linear-svm"
    folds: int = 10
    fold_seed: int = 0
    regularization: float = 1.0
    subsample: float | None = None

    def __post_init__(self):
        if self.classifier not in CLASSIFIER_KINDS:
            raise ValueError(
                f"unknown classifier {self.classifier!r}; options: {CLASSIFIER_KINDS}"
            )
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.regularization <= 0:
            raise ValueError("regularization must be positive")
        if self.subsample is not None and not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must lie in (0, 1]")


class FitnessCache:
    """Thread-safe memo from subset key to fitness.

    Raced writers may both evaluate the same new key; values are
    deterministic, so last-writer-wins is harmless. ``lookups`` and
    ``misses`` make cache behaviour observable for telemetry and tests.
    """

    def __init__(self):
        self._values: dict[bytes, float] = {}
        self._lock = threading.Lock()
        self.lookups = 0
        self.misses = 0

    def get(self, key: bytes) -> float | None:
        with self._lock:
            self.lookups += 1
            value = self._values.get(key)
            if value is None:
                self.misses += 1
            return value

    def put(self, key: bytes, value: float) -> None:
        with self._lock:
            self._values[key] = value

    def __len__(self) -> int:
        with self._lock:
            return len(self._values)

    def __contains__(self, key: bytes) -> bool:
        with self._lock:
            return key in self._values


@dataclass(eq=False)
class LinearSVM:
    """One-vs-one linear classifier with squared-hinge pair machines."""

    classes: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    weights: np.ndarray  # (n_pairs, n_features)
    biases: np.ndarray  # (n_pairs,)
    converged: bool

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        votes = np.zeros((X.shape[0], self.classes.size), dtype=np.int64)
        decisions = X @ self.weights.T + self.biases
        for p, (a, b) in enumerate(self.pairs):
            column = decisions[:, p]
            votes[column >= 0.0, a] += 1  # a < b, so boundary ties go low
            votes[column < 0.0, b] += 1
        return self.classes[np.argmax(votes, axis=1)]


def _solve_margin(
    X: np.ndarray, y_signed: np.ndarray, C: float, max_iter: int = 1000
) -> tuple[np.ndarray, float, bool]:
    """Minimize 0.5 ||w||^2 + C * sum(max(0, 1 - y (Xw + b))^2).

    Deterministic: starts from zero and uses a quasi-Newton minimizer on the
    smooth squared-hinge objective; stops on relative objective change below
    1e-12 or the iteration cap, whichever first.
    """
    d = X.shape[1]

    def objective(v):
        w, b = v[:d], v[d]
        gap = 1.0 - y_signed * (X @ w + b)
        active = np.maximum(gap, 0.0)
        value = 0.5 * float(w @ w) + C * float(active @ active)
        pull = -2.0 * C * (active * y_signed)
        grad = np.empty(d + 1)
        grad[:d] = w + X.T @ pull
        grad[d] = pull.sum()
        return value, grad

    result = minimize(
        objective,
        np.zeros(d + 1),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 1e-12, "gtol": 1e-8},
    )
    return result.x[:d], float(result.x[d]), bool(result.success)


def train_linear_svm(
    X: np.ndarray, y: np.ndarray, C: float = 1.0, max_iter: int = 1000
) -> LinearSVM:
    """Train one pair machine per class pair; multiclass is majority vote.

    Vote ties resolve to the lower class index, as does a test point exactly
    on a pair boundary.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("training data must contain at least two classes")
    pairs = tuple(itertools.combinations(range(classes.size), 2))
    weights = np.zeros((len(pairs), X.shape[1]))
    biases = np.zeros(len(pairs))
    converged = True
    for p, (a, b) in enumerate(pairs):
        chosen = (y == classes[a]) | (y == classes[b])
        y_signed = np.where(y[chosen] == classes[a], 1.0, -1.0)
        w, bias, ok = _solve_margin(X[chosen], y_signed, C, max_iter)
        weights[p] = w
        biases[p] = bias
        converged = converged and ok
    return LinearSVM(
        classes=classes,
        pairs=pairs,
        weights=weights,
        biases=biases,
        converged=converged,
    )


class _NearestCentroid:
    def __init__(self, X, y):
        self.classes = np.unique(y)
        self.centroids = np.stack([X[y == c].mean(axis=0) for c in self.classes])

    def predict(self, X):
        d2 = ((X[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2)
        return self.classes[np.argmin(d2, axis=1)]  # argmin ties go low


class _NearestNeighbor:
    def __init__(self, X, y):
        self.X = X
        self.y = y

    def predict(self, X):
        # ||a-b||^2 expanded; ties resolve to the earliest training row.
        d2 = (
            (X**2).sum(axis=1)[:, None]
            - 2.0 * X @ self.X.T
            + (self.X**2).sum(axis=1)[None, :]
        )
        return self.y[np.argmin(d2, axis=1)]


def _fit(protocol: FitnessProtocol, X: np.ndarray, y: np.ndarray):
    if protocol.classifier == "linear-svm":
        return train_linear_svm(X, y, C=protocol.regularization)
    if protocol.classifier == "nearest-centroid":
        return _NearestCentroid(X, y)
    return _NearestNeighbor(X, y)


def _standardize(train: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    center = train.mean(axis=0)
    scale = train.std(axis=0)
    scale[scale == 0.0] = 1.0  # constant columns pass through centered
    return (train - center) / scale, (test - center) / scale


def _subsample_rows(
    train_idx: np.ndarray,
    labels: np.ndarray,
    fraction: float,
    fold_seed: int,
    fold: int,
) -> np.ndarray:
    rng = np.random.default_rng([fold_seed, fold])
    kept = []
    for c in np.unique(labels[train_idx]):
        members = train_idx[labels[train_idx] == c]
        take = max(1, int(round(fraction * members.size)))
        kept.append(rng.choice(members, size=take, replace=False))
    return np.sort(np.concatenate(kept))


def resolve_mask(mask, n_features: int) -> np.ndarray:
    """Accept an Individual or any 0/1 vector; return a validated mask."""
    if isinstance(mask, Individual):
        mask = mask.mask
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if mask.shape != (n_features,):
        raise ValueError(
            f"mask has shape {mask.shape}, dataset has {n_features} features"
        )
    if not mask.any():
        raise ValueError("cannot score the empty feature subset")
    return mask


def kfold_accuracy(
    dataset: Dataset,
    mask,
    protocol: FitnessProtocol = FitnessProtocol(),
    fold_plan: FoldPlan | None = None,
) -> float:
    """Mean cross-validated accuracy (percent) of the masked feature set.

    The fold plan derives from ``protocol.folds`` and ``protocol.fold_seed``
    unless one is passed in; callers evaluating many masks should build the
    plan once and share it.
    """
    mask = resolve_mask(mask, dataset.n_features)
    if fold_plan is None:
        fold_plan = stratified_folds(dataset, protocol.folds, protocol.fold_seed)
    columns = np.flatnonzero(mask)
    X = dataset.instances[:, columns]
    y = dataset.labels
    percents = []
    for fold in range(fold_plan.k):
        train_idx = fold_plan.train_indices(fold)
        test_idx = fold_plan.test_indices(fold)
        if protocol.subsample is not None:
            train_idx = _subsample_rows(
                train_idx, y, protocol.subsample, fold_plan.seed, fold
            )
        X_train, X_test = _standardize(X[train_idx], X[test_idx])
        model = _fit(protocol, X_train, y[train_idx])
        predicted = model.predict(X_test)
        percents.append(100.0 * float(np.mean(predicted == y[test_idx])))
    return float(np.mean(percents))


def make_evaluator(
    dataset: Dataset,
    protocol: FitnessProtocol = FitnessProtocol(),
    cache: FitnessCache | None = None,
):
    """Build the fitness function the engine calls on individuals.

    The stratified fold plan is constructed once here and shared by every
    evaluation, and results are memoized in ``cache`` when one is given.
    Evaluation errors propagate and leave no cache entry behind.
    """
    fold_plan = stratified_folds(dataset, protocol.folds, protocol.fold_seed)

    def evaluate(individual) -> float:
        mask = resolve_mask(individual, dataset.n_features)
        if cache is None:
            return kfold_accuracy(dataset, mask, protocol, fold_plan)
        key = mask.tobytes()
        hit = cache.get(key)
        if hit is not None:
            return hit
        value = kfold_accuracy(dataset, mask, protocol, fold_plan)
        cache.put(key, value)
        return value

    return evaluate

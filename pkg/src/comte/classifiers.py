"""Black-box classifier interface and the built-in classifiers.

Two built-ins are provided. The feature-extraction + logistic-regression
pipeline computes 11 statistical features per metric and applies a sigmoid to a
learned weight vector; its nonzero weights make it a transparent ground truth
for faithfulness experiments. The set-cover forest classifies length-1 binary
samples by the fraction of index sets hit by the sample's 1-bits; paired with
the exhaustive hitting-set solver it gives search algorithms an oracle with a
known optimum.
"""
from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .core import ClassProbabilities, MetricSchema, MultivariateSample
from .errors import UniverseTooLargeError

FEATURE_NAMES = (
    "min",
    "max",
    "mean",
    "std",
    "skew",
    "kurtosis",
    "p5",
    "p25",
    "p50",
    "p75",
    "p95",
)
FEATURES_PER_METRIC = len(FEATURE_NAMES)
_PERCENTILES = (5.0, 25.0, 50.0, 75.0, 95.0)


class ClassifierHandle(ABC):
    """Uniform black-box interface: a sample in, class probabilities out.

    Implementations must be deterministic (same input, identical output) and
    keep their class-name ordering stable across calls.
    """

    @property
    @abstractmethod
    def class_names(self) -> tuple[str, ...]: ...

    @abstractmethod
    def evaluate(self, sample: MultivariateSample) -> ClassProbabilities: ...

    def evaluate_batch(self, samples: Sequence[MultivariateSample]) -> list[ClassProbabilities]:
        return [self.evaluate(s) for s in samples]


@dataclass(frozen=True)
class FeatureVector:
    """11 statistics per metric, metric-major: all of metric 0's features first."""

    values: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if arr.ndim != 1 or len(arr) != len(self.feature_names):
            raise ValueError("feature values and names must align")
        if len(arr) % FEATURES_PER_METRIC != 0:
            raise ValueError(f"feature count must be a multiple of {FEATURES_PER_METRIC}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("features must be finite")


def feature_names_for(schema: MetricSchema) -> tuple[str, ...]:
    return tuple(
        f"{metric}::{feat}" for metric in schema.names for feat in FEATURE_NAMES
    )


def _features_from_matrix_batch(values: np.ndarray) -> np.ndarray:
    """Features for a (batch, m, t) stack, returned as (batch, m * 11).

    Conventions pinned here and relied on by every consumer: population
    standard deviation (divide by t), Fisher-Pearson skew and excess kurtosis
    both defined as 0 for zero-variance series, percentiles by linear
    interpolation between order statistics.
    """
    mins = values.min(axis=-1)
    maxs = values.max(axis=-1)
    means = values.mean(axis=-1)
    centered = values - means[..., None]
    stds = np.sqrt(np.mean(centered**2, axis=-1))
    nonzero = stds > 0.0
    # Standardize first: |z| <= sqrt(t), so the moment sums cannot overflow
    # even when the variance barely escapes zero.
    z = np.divide(centered, stds[..., None], out=np.zeros_like(centered),
                  where=nonzero[..., None])
    skew = np.where(nonzero, np.mean(z**3, axis=-1), 0.0)
    kurt = np.where(nonzero, np.mean(z**4, axis=-1) - 3.0, 0.0)
    pcts = np.percentile(values, _PERCENTILES, axis=-1)  # (5, batch, m)
    pcts = np.moveaxis(pcts, 0, -1)  # (batch, m, 5)
    stacked = np.concatenate(
        [np.stack([mins, maxs, means, stds, skew, kurt], axis=-1), pcts], axis=-1
    )  # (batch, m, 11)
    return stacked.reshape(values.shape[0], -1)


def extract_features(sample: MultivariateSample) -> FeatureVector:
    """Compute the 11-feature summary of every metric, in schema order."""
    flat = _features_from_matrix_batch(sample.values[None, :, :])[0]
    return FeatureVector(values=flat, feature_names=feature_names_for(sample.schema))


@dataclass(frozen=True)
class LogisticModel:
    """Bias-free logistic regression over extracted features.

    The second class name is the positive class; its probability is
    sigmoid(weights . features). Zero-weight features provably never influence
    a prediction, which is what makes this model a usable ground truth.
    """

    weights: np.ndarray
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if len(self.class_names) != 2:
            raise ValueError("logistic models are binary")
        if w.ndim != 1 or len(w) != len(self.feature_names):
            raise ValueError("one weight per feature required")

    @property
    def positive_class(self) -> str:
        return self.class_names[1]

    def nonzero_indices(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.weights)[0])

    def used_metrics(self) -> frozenset[str]:
        """Metrics with at least one nonzero feature weight."""
        return frozenset(
            self.feature_names[i].split("::", 1)[0] for i in self.nonzero_indices()
        )


def logistic_predict(model: LogisticModel, sample: MultivariateSample) -> ClassProbabilities:
    feats = extract_features(sample)
    if feats.feature_names != model.feature_names:
        raise ValueError(
            f"sample features ({len(feats.feature_names)}) do not match "
            f"model features ({len(model.feature_names)})"
        )
    y = float(expit(model.weights @ feats.values))
    return ClassProbabilities(per_class=(1.0 - y, y), class_names=model.class_names)


class LogisticClassifier(ClassifierHandle):
    """ClassifierHandle wrapper around a LogisticModel for a fixed schema."""

    def __init__(self, model: LogisticModel, schema: MetricSchema):
        if model.feature_names != feature_names_for(schema):
            raise ValueError("model features do not match the schema's feature layout")
        self._model = model
        self._schema = schema

    @property
    def class_names(self) -> tuple[str, ...]:
        return self._model.class_names

    @property
    def model(self) -> LogisticModel:
        return self._model

    def evaluate(self, sample: MultivariateSample) -> ClassProbabilities:
        return logistic_predict(self._model, sample)

    def evaluate_batch(self, samples: Sequence[MultivariateSample]) -> list[ClassProbabilities]:
        if not samples:
            return []
        stack = np.stack([s.values for s in samples])
        feats = _features_from_matrix_batch(stack)
        ys = expit(feats @ self._model.weights)
        return [
            ClassProbabilities(per_class=(1.0 - float(y), float(y)), class_names=self.class_names)
            for y in ys
        ]


def _soft_threshold(w: np.ndarray, amount: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - amount, 0.0)


def logistic_train_l1(
    features: Sequence[FeatureVector],
    labels: Sequence[int],
    l1_penalty: float,
    steps: int = 500,
    learning_rate: float = 0.5,
    class_names: tuple[str, str] = ("0", "1"),
) -> LogisticModel:
    """Fit a sparse logistic model by proximal gradient descent.

    Each step takes a gradient step on the mean logistic loss and then
    soft-thresholds the weights by learning_rate * l1_penalty, so larger
    penalties shrink more weights to exactly zero. Deterministic: weights start
    at zero and no randomness is involved.
    """
    if not features:
        raise ValueError("empty training set")
    y = np.asarray(labels, dtype=np.float64)
    if len(y) != len(features):
        raise ValueError("one label per feature vector required")
    if len(set(y.tolist())) < 2:
        raise ValueError("training set must contain both classes")
    if l1_penalty < 0:
        raise ValueError("l1 penalty must be >= 0")
    X = np.stack([f.values for f in features])
    n = len(y)
    w = np.zeros(X.shape[1])
    for _ in range(steps):
        p = expit(X @ w)
        grad = X.T @ (p - y) / n
        w = _soft_threshold(w - learning_rate * grad, learning_rate * l1_penalty)
    return LogisticModel(
        weights=w, class_names=class_names, feature_names=features[0].feature_names
    )


@dataclass(frozen=True)
class SetCoverForest:
    """A voting classifier over length-1 binary samples with a known structure.

    Each member set votes "1" exactly when some index in it carries a 1-bit, so
    the predicted probability of class "1" equals the fraction of sets hit.
    Finding the smallest bit pattern that drives that probability to 1 is
    exactly the minimum hitting-set problem, which is what makes this classifier
    useful as a test oracle for the search algorithms.
    """

    universe_size: int
    sets: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))
        if self.universe_size < 1:
            raise ValueError("universe must have at least one element")
        if not self.sets:
            raise ValueError("at least one set required")
        for s in self.sets:
            if not s:
                raise ValueError("sets must be non-empty")
            if any(i < 0 or i >= self.universe_size for i in s):
                raise ValueError(f"set {sorted(s)} escapes universe of size {self.universe_size}")

    def schema(self) -> MetricSchema:
        width = len(str(self.universe_size - 1))
        return MetricSchema(
            names=tuple(f"u{i:0{width}d}" for i in range(self.universe_size)), length=1
        )


def setcover_predict(forest: SetCoverForest, sample: MultivariateSample) -> ClassProbabilities:
    """Fraction of sets hit by the sample's 1-bits, as the probability of class "1"."""
    if sample.schema.num_metrics != forest.universe_size:
        raise ValueError(
            f"sample has {sample.schema.num_metrics} metrics, "
            f"universe has {forest.universe_size}"
        )
    if sample.schema.length != 1:
        raise ValueError("set-cover samples are series of length 1")
    flat = sample.values[:, 0]
    if not np.all((flat == 0.0) | (flat == 1.0)):
        raise ValueError("set-cover samples must be binary")
    ones = {int(i) for i in np.nonzero(flat)[0]}
    hits = sum(1 for s in forest.sets if s & ones)
    p1 = hits / len(forest.sets)
    return ClassProbabilities(per_class=(1.0 - p1, p1), class_names=("0", "1"))


class SetCoverClassifier(ClassifierHandle):
    def __init__(self, forest: SetCoverForest):
        self._forest = forest

    @property
    def class_names(self) -> tuple[str, ...]:
        return ("0", "1")

    @property
    def forest(self) -> SetCoverForest:
        return self._forest

    def evaluate(self, sample: MultivariateSample) -> ClassProbabilities:
        return setcover_predict(self._forest, sample)


def hitting_set_bruteforce(forest: SetCoverForest, max_universe: int = 20) -> frozenset[int]:
    """Exhaustive minimum hitting set; ties go to the lexicographically smallest index tuple.

    Enumerates subsets by ascending cardinality and, within a cardinality, in
    lexicographic order of the sorted index tuple, returning the first subset
    that intersects every set. Refuses universes above ``max_universe``.
    """
    m = forest.universe_size
    if m > max_universe:
        raise UniverseTooLargeError(
            f"universe of {m} exceeds the exhaustive-search bound of {max_universe}"
        )
    for k in range(m + 1):
        for combo in itertools.combinations(range(m), k):
            chosen = set(combo)
            if all(s & chosen for s in forest.sets):
                return frozenset(chosen)
    raise AssertionError("unreachable: the full universe hits every non-empty set")

"""Domain types and the substitution/loss arithmetic.

A sample is an m-by-t matrix of named time series ("metrics"). A counterfactual
candidate is built by copying whole rows from a distractor sample into the test
sample; which rows get copied is recorded in a binary substitution mask. The two
loss functions score such candidates: the strict one penalizes any shortfall
from probability 1, the relaxed one only penalizes shortfall from a target
probability and masks larger than a desired size.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SchemaMismatchError


def _frozen_matrix(values: object, dtype=np.float64) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MetricSchema:
    """Names and length shared by every sample of a dataset.

    ``names`` fixes both the number of metrics m and their order; ``length`` is
    the number of samples t in each series.
    """

    names: tuple[str, ...]
    length: int

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise ValueError("schema needs at least one metric")
        if len(set(self.names)) != len(self.names):
            raise ValueError("metric names must be unique")
        if any(not n for n in self.names):
            raise ValueError("metric names must be non-empty")
        if self.length < 1:
            raise ValueError("series length must be >= 1")

    @property
    def num_metrics(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown metric {name!r}") from None


@dataclass(frozen=True)
class MultivariateSample:
    """One m-by-t matrix of finite reals with a schema, an id, and an optional label."""

    schema: MetricSchema
    values: np.ndarray
    sample_id: str
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_matrix(self.values))
        m, t = self.schema.num_metrics, self.schema.length
        if self.values.shape != (m, t):
            raise SchemaMismatchError(
                f"sample {self.sample_id!r} has shape {self.values.shape}, "
                f"schema expects ({m}, {t})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"sample {self.sample_id!r} contains non-finite values")

    def row(self, metric: str) -> np.ndarray:
        return self.values[self.schema.index_of(metric)]

    def flattened(self) -> np.ndarray:
        """Metric-major, time-minor flattening (row-major ravel)."""
        return self.values.ravel()


@dataclass(frozen=True)
class ClassProbabilities:
    """Probabilities for k classes, ordered to match ``class_names``."""

    per_class: tuple[float, ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_class", tuple(float(p) for p in self.per_class))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if len(self.per_class) != len(self.class_names):
            raise ValueError("one probability per class name required")
        if any(p < 0.0 or p > 1.0 for p in self.per_class):
            raise ValueError(f"probabilities outside [0, 1]: {self.per_class}")
        total = sum(self.per_class)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")

    def probability_of(self, class_name: str) -> float:
        try:
            return self.per_class[self.class_names.index(class_name)]
        except ValueError:
            raise KeyError(f"unknown class {class_name!r}") from None

    def argmax_class(self) -> str:
        # np.argmax tie rule (first max) keeps this deterministic.
        best = 0
        for i, p in enumerate(self.per_class):
            if p > self.per_class[best]:
                best = i
        return self.class_names[best]


@dataclass(frozen=True)
class SubstitutionMask:
    """Which metrics are taken from the distractor: bit j set means row j is swapped."""

    bits: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))
        if not self.bits:
            raise ValueError("mask must cover at least one metric")

    @classmethod
    def empty(cls, num_metrics: int) -> "SubstitutionMask":
        return cls((False,) * num_metrics)

    @classmethod
    def full(cls, num_metrics: int) -> "SubstitutionMask":
        return cls((True,) * num_metrics)

    @classmethod
    def from_indices(cls, num_metrics: int, indices: Iterable[int]) -> "SubstitutionMask":
        bits = [False] * num_metrics
        for i in indices:
            bits[i] = True
        return cls(tuple(bits))

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def cardinality(self) -> int:
        return sum(self.bits)

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def with_bit(self, index: int) -> "SubstitutionMask":
        bits = list(self.bits)
        bits[index] = True
        return SubstitutionMask(tuple(bits))

    def without_bit(self, index: int) -> "SubstitutionMask":
        bits = list(self.bits)
        bits[index] = False
        return SubstitutionMask(tuple(bits))

    def complement(self) -> "SubstitutionMask":
        return SubstitutionMask(tuple(not b for b in self.bits))

    def as_vector(self) -> np.ndarray:
        """The mask as a 1-by-m binary vector (used by the robustness metric)."""
        return np.array(self.bits, dtype=np.float64)


@dataclass(frozen=True)
class Explanation:
    """A counterfactual explanation: swap these metrics with the distractor's.

    ``substituted_metrics`` holds one (metric name, test series, distractor
    series) triple per set mask bit, in the units the user originally supplied
    (never the normalized internal representation).
    """

    mask: SubstitutionMask
    distractor_id: str
    target_class: str
    achieved_probability: float
    substituted_metrics: tuple[tuple[str, np.ndarray, np.ndarray], ...] = field(default=())

    def __post_init__(self):
        frozen = tuple(
            (name, _frozen_matrix(test_row), _frozen_matrix(dist_row))
            for name, test_row, dist_row in self.substituted_metrics
        )
        object.__setattr__(self, "substituted_metrics", frozen)
        if len(frozen) != self.mask.cardinality:
            raise ValueError(
                f"{len(frozen)} substituted series for a mask of size {self.mask.cardinality}"
            )
        if not 0.0 <= self.achieved_probability <= 1.0:
            raise ValueError("achieved probability outside [0, 1]")

    @property
    def metric_names(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.substituted_metrics)


def _require_same_schema(x_test: MultivariateSample, x_dist: MultivariateSample) -> None:
    a, b = x_test.schema, x_dist.schema
    if a.num_metrics != b.num_metrics:
        raise SchemaMismatchError(
            f"metric count mismatch: {a.num_metrics} vs {b.num_metrics}"
        )
    if a.length != b.length:
        raise SchemaMismatchError(f"series length mismatch: {a.length} vs {b.length}")
    if a.names != b.names:
        raise SchemaMismatchError(f"metric name mismatch: {a.names} vs {b.names}")


def combine(
    x_test: MultivariateSample,
    x_dist: MultivariateSample,
    mask: SubstitutionMask,
) -> MultivariateSample:
    """Build the candidate sample: row j comes from the distractor iff bit j is set.

    Pure row selection, never a floating-point blend, so substituted rows are
    bit-exact copies.
    """
    _require_same_schema(x_test, x_dist)
    if len(mask) != x_test.schema.num_metrics:
        raise SchemaMismatchError(
            f"mask covers {len(mask)} metrics, schema has {x_test.schema.num_metrics}"
        )
    selector = np.array(mask.bits, dtype=bool)[:, None]
    values = np.where(selector, x_dist.values, x_test.values)
    return MultivariateSample(
        schema=x_test.schema,
        values=values,
        sample_id=f"{x_test.sample_id}|{x_dist.sample_id}|{mask.cardinality}",
        label=None,
    )


def strict_loss(
    classifier,
    target_class: str,
    mask: SubstitutionMask,
    candidate: MultivariateSample,
    sparsity_weight: float,
) -> float:
    """Squared shortfall from probability 1 plus a linear penalty per swapped metric."""
    if sparsity_weight < 0:
        raise ValueError("sparsity weight must be >= 0")
    p = classifier.evaluate(candidate).probability_of(target_class)
    return (1.0 - p) ** 2 + sparsity_weight * mask.cardinality


def relaxed_loss(
    classifier,
    target_class: str,
    mask: SubstitutionMask,
    candidate: MultivariateSample,
    target_prob: float,
    desired_size: int,
    sparsity_weight: float,
) -> float:
    """Hinged loss: zero once the target probability is met by a small enough mask.

    Probabilities above ``target_prob`` and masks at or below ``desired_size``
    are not penalized at all.
    """
    p = classifier.evaluate(candidate).probability_of(target_class)
    return relaxed_loss_terms(p, mask.cardinality, target_prob, desired_size, sparsity_weight)


def relaxed_loss_terms(
    probability: float,
    mask_size: int,
    target_prob: float,
    desired_size: int,
    sparsity_weight: float,
) -> float:
    """The relaxed loss computed from an already-known probability."""
    if not 0.0 < target_prob <= 1.0:
        raise ValueError("target probability must be in (0, 1]")
    if desired_size < 0:
        raise ValueError("desired size must be >= 0")
    if sparsity_weight < 0:
        raise ValueError("sparsity weight must be >= 0")
    shortfall = max(0.0, target_prob - probability)
    oversize = max(0, mask_size - desired_size)
    return shortfall**2 + sparsity_weight * oversize

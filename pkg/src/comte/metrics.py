"""Evaluation measures for explanations.

Faithfulness compares an explanation's metrics against the metrics a
transparent model provably uses. Comprehensibility is simply the explanation
size. Robustness is the worst ratio, over nearby samples, of explanation change
to sample change. Generalizability is the fraction of similar samples whose
prediction the same substitutions flip.
"""
from __future__ import annotations

import warnings
import zlib
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .classifiers import ClassifierHandle, LogisticModel
from .core import Explanation, MultivariateSample, SubstitutionMask, combine
from .errors import DegenerateNeighborsError


@dataclass(frozen=True)
class FaithfulnessReport:
    precision: float
    recall: float
    explanation_metrics: frozenset[str]
    ground_truth_metrics: frozenset[str]


def faithfulness_of_names(metric_names, model: LogisticModel) -> FaithfulnessReport:
    """Precision and recall of a metric-name set against the model's used metrics."""
    explained = frozenset(metric_names)
    used = model.used_metrics()
    overlap = explained & used
    precision = len(overlap) / len(explained) if explained else 1.0
    recall = len(overlap) / len(used) if used else 1.0
    return FaithfulnessReport(
        precision=precision,
        recall=recall,
        explanation_metrics=explained,
        ground_truth_metrics=used,
    )


def faithfulness(explanation: Explanation, model: LogisticModel) -> FaithfulnessReport:
    """Precision and recall of the explanation against the model's used metrics.

    A metric counts as used when any of its feature weights is nonzero. Empty
    sets make either ratio vacuous; both default to 1 in that case so that an
    empty explanation is never charged for precision it had no chance to earn.
    """
    return faithfulness_of_names(explanation.metric_names, model)


def comprehensibility(explanation: Explanation) -> int:
    """Number of time series in the explanation."""
    return explanation.mask.cardinality


@dataclass(frozen=True)
class RobustnessReport:
    """Worst-case explanation change per unit of sample change, over neighbors.

    ``lipschitz`` is the raw maximum ratio. ``lipschitz_over_sqrt_m`` divides it
    by the square root of the metric count, one reasonable way to compare across
    schemas of different widths; it is offered as a labeled alternative, not as
    the canonical value.
    """

    lipschitz: float
    lipschitz_over_sqrt_m: float
    neighbor_count: int
    per_neighbor_ratios: tuple[tuple[str, float], ...]


ExplainerFn = Callable[[MultivariateSample], "Explanation | SubstitutionMask"]


def _mask_of(result: Explanation | SubstitutionMask) -> SubstitutionMask:
    return result.mask if isinstance(result, Explanation) else result


def lipschitz_robustness(
    x_test: MultivariateSample,
    explainer: ExplainerFn,
    neighbors: Sequence[MultivariateSample],
) -> RobustnessReport:
    """Max over neighbors of |mask(x_test) - mask(x_j)| / |x_test - x_j|.

    Masks are compared as binary vectors under the Euclidean norm; sample
    distance is Euclidean over the flattened (normalized) matrices. Neighbors
    at distance zero carry no locality information and are skipped; if every
    neighbor is degenerate that way, no ratio is defined and an error is raised.
    """
    base_mask = _mask_of(explainer(x_test)).as_vector()
    base_flat = x_test.flattened()
    ratios: list[tuple[str, float]] = []
    for neighbor in neighbors:
        distance = float(np.linalg.norm(base_flat - neighbor.flattened()))
        if distance == 0.0:
            continue
        neighbor_mask = _mask_of(explainer(neighbor)).as_vector()
        change = float(np.linalg.norm(base_mask - neighbor_mask))
        ratios.append((neighbor.sample_id, change / distance))
    if not ratios:
        raise DegenerateNeighborsError(
            f"all neighbors of {x_test.sample_id!r} are at distance zero"
        )
    lipschitz = max(r for _, r in ratios)
    m = len(base_mask)
    return RobustnessReport(
        lipschitz=lipschitz,
        lipschitz_over_sqrt_m=lipschitz / float(np.sqrt(m)),
        neighbor_count=len(ratios),
        per_neighbor_ratios=tuple(ratios),
    )


def generalizability(
    explanation: Explanation,
    distractor: MultivariateSample,
    cohort: Sequence[MultivariateSample],
    classifier: ClassifierHandle,
    target_class: str,
) -> float:
    """Fraction of cohort samples the explanation's substitutions flip to the target.

    A flip counts when the combined sample's argmax class equals the target.
    The distractor must be the explanation's own; an empty cohort yields 0 with
    a warning rather than an error.
    """
    if distractor.sample_id != explanation.distractor_id:
        raise KeyError(
            f"expected distractor {explanation.distractor_id!r}, got {distractor.sample_id!r}"
        )
    if not cohort:
        warnings.warn("generalizability over an empty cohort is defined as 0", stacklevel=2)
        return 0.0
    combined = [combine(sample, distractor, explanation.mask) for sample in cohort]
    predictions = classifier.evaluate_batch(combined)
    flips = sum(1 for p in predictions if p.argmax_class() == target_class)
    return flips / len(cohort)


class RandomMaskExplainer:
    """Baseline explainer: a uniformly random metric subset of a chosen size.

    The draw is seeded from the sample id, so the same sample always gets the
    same mask within one explainer instance and across runs. ``size`` may be an
    integer or a callable mapping the sample to a size (e.g. the length of the
    greedy explanation for that sample, to keep comparisons fair).
    """

    def __init__(
        self,
        num_metrics: int,
        size: int | Callable[[MultivariateSample], int],
        seed: int = 0,
    ):
        self.num_metrics = num_metrics
        self.size = size
        self.seed = seed

    def __call__(self, sample: MultivariateSample) -> SubstitutionMask:
        size = self.size(sample) if callable(self.size) else self.size
        size = max(0, min(size, self.num_metrics))
        rng = np.random.default_rng([self.seed, zlib.crc32(sample.sample_id.encode())])
        chosen = rng.choice(self.num_metrics, size=size, replace=False)
        return SubstitutionMask.from_indices(self.num_metrics, (int(i) for i in chosen))

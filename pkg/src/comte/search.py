"""Explanation search: greedy substitution, random-restart hill climbing, pruning.

Both algorithms look for a small substitution mask that lifts the target-class
probability of the combined sample over a target. Greedy adds one metric at a
time, always the one with the best probability improvement, and is guaranteed
to finish once the distractor itself clears the target. Hill climbing walks
single-bit flips under the relaxed loss and is cheaper on wide schemas, but may
stall; its output is pruned and, when that leaves nothing viable, greedy runs
as the fallback. The orchestrator sweeps several nearby distractors and keeps
the lowest-loss result.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .classifiers import ClassifierHandle
from .core import (
    ClassProbabilities,
    Explanation,
    MultivariateSample,
    SubstitutionMask,
    combine,
    relaxed_loss_terms,
)
from .distractors import ClassIndex, nearest_distractors
from .errors import DistractorBelowTargetError, NoDistractorError

_PROBABILITY_ATOL = 1e-12


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the explanation search.

    ``target_prob`` is the class probability at which a candidate counts as an
    explanation, ``desired_size`` the mask size above which the relaxed loss
    starts charging, ``sparsity_weight`` the per-extra-metric charge. The
    remaining fields budget the search itself.
    """

    target_prob: float = 0.95
    desired_size: int = 3
    sparsity_weight: float = 0.01
    num_distractors: int = 3
    rng_seed: int = 0
    num_restarts: int = 5
    max_attempts: int = 50
    max_iters: int = 1000
    method: str = "greedy"

    def __post_init__(self):
        if not 0.0 < self.target_prob <= 1.0:
            raise ValueError("target probability must be in (0, 1]")
        if self.desired_size < 0:
            raise ValueError("desired size must be >= 0")
        if self.sparsity_weight < 0:
            raise ValueError("sparsity weight must be >= 0")
        if self.num_distractors < 1 or self.num_restarts < 1:
            raise ValueError("distractor and restart budgets must be >= 1")
        if self.max_attempts < 0 or self.max_iters < 0:
            raise ValueError("iteration budgets must be >= 0")
        if self.method not in ("greedy", "hillclimb"):
            raise ValueError(f"unknown search method {self.method!r}")


@dataclass(frozen=True)
class SearchOutcome:
    explanation: Explanation
    method: str  # greedy | hillclimb | hillclimb_fallback_greedy
    loss: float
    evaluations: int
    distractors_tried: int


class CountingClassifier(ClassifierHandle):
    """Delegating wrapper that counts per-sample evaluations."""

    def __init__(self, inner: ClassifierHandle):
        self._inner = inner
        self.count = 0

    @property
    def class_names(self) -> tuple[str, ...]:
        return self._inner.class_names

    def evaluate(self, sample: MultivariateSample) -> ClassProbabilities:
        self.count += 1
        return self._inner.evaluate(sample)

    def evaluate_batch(self, samples: Sequence[MultivariateSample]) -> list[ClassProbabilities]:
        self.count += len(samples)
        return self._inner.evaluate_batch(samples)


def greedy_search(
    x_test: MultivariateSample,
    target_class: str,
    classifier: ClassifierHandle,
    x_dist: MultivariateSample,
    target_prob: float,
) -> SubstitutionMask:
    """Add the single most helpful metric until the target probability is met.

    Requires the distractor itself to clear the target; the all-swapped state is
    then a guaranteed stopping point, so at most m metrics ever get added. Ties
    on equal improvement go to the lowest metric index, and the best move is
    taken even when no move improves the probability, which keeps the search
    marching toward the distractor.
    """
    dist_prob = classifier.evaluate(x_dist).probability_of(target_class)
    if dist_prob < target_prob:
        raise DistractorBelowTargetError(
            f"distractor {x_dist.sample_id!r} has probability {dist_prob:.6f} "
            f"for class {target_class!r}, below the target {target_prob}"
        )
    m = x_test.schema.num_metrics
    known: dict[tuple[bool, ...], float] = {SubstitutionMask.full(m).bits: dist_prob}

    mask = SubstitutionMask.empty(m)
    prob = classifier.evaluate(combine(x_test, x_dist, mask)).probability_of(target_class)
    known[mask.bits] = prob

    while prob < target_prob:
        candidates = [mask.with_bit(j) for j in range(m) if not mask.bits[j]]
        fresh = [c for c in candidates if c.bits not in known]
        for cand, probs in zip(
            fresh, classifier.evaluate_batch([combine(x_test, x_dist, c) for c in fresh])
        ):
            known[cand.bits] = probs.probability_of(target_class)
        best = max(candidates, key=lambda c: known[c.bits] - prob)
        # max() keeps the first of equals; candidates are in ascending bit order.
        mask, prob = best, known[best.bits]
    return mask


def random_neighbor(mask: SubstitutionMask, rng: np.random.Generator) -> SubstitutionMask:
    """Flip exactly one uniformly chosen bit."""
    j = int(rng.integers(len(mask)))
    bits = list(mask.bits)
    bits[j] = not bits[j]
    return SubstitutionMask(tuple(bits))


def _random_initial_mask(
    num_metrics: int, desired_size: int, rng: np.random.Generator
) -> SubstitutionMask:
    # Bias starts toward the desired sparsity, capped so wide masks stay rare.
    p = min(desired_size / num_metrics, 0.5) if num_metrics else 0.0
    return SubstitutionMask(tuple(bool(b) for b in rng.random(num_metrics) < p))


def hill_climb(
    x_test: MultivariateSample,
    target_class: str,
    classifier: ClassifierHandle,
    x_dist: MultivariateSample,
    config: SearchConfig,
) -> SubstitutionMask:
    """Random-restart hill climbing on the relaxed loss over single-bit flips.

    Equal-loss moves are accepted (plateau walking) and the stall counter resets
    only on acceptance. Each restart costs at most max_iters + 1 classifier
    calls; the best accepted state across restarts wins, earlier restarts
    winning ties. Deterministic for a fixed config seed. The result is not
    guaranteed to meet the target probability; callers prune and fall back.
    """
    m = x_test.schema.num_metrics
    rng = np.random.default_rng(config.rng_seed)

    def loss_of(mask: SubstitutionMask) -> float:
        p = classifier.evaluate(combine(x_test, x_dist, mask)).probability_of(target_class)
        return relaxed_loss_terms(
            p, mask.cardinality, config.target_prob, config.desired_size, config.sparsity_weight
        )

    best_mask: SubstitutionMask | None = None
    best_loss = float("inf")
    for _ in range(config.num_restarts):
        mask = _random_initial_mask(m, config.desired_size, rng)
        loss = loss_of(mask)
        attempts = 0
        iters = 0
        while attempts <= config.max_attempts and iters < config.max_iters:
            iters += 1
            neighbor = random_neighbor(mask, rng)
            neighbor_loss = loss_of(neighbor)
            if neighbor_loss <= loss:
                attempts = 0
                mask, loss = neighbor, neighbor_loss
            else:
                attempts += 1
        if loss < best_loss:
            best_mask, best_loss = mask, loss
    assert best_mask is not None  # num_restarts >= 1
    return best_mask


def _prune_with_prob(
    x_test: MultivariateSample,
    target_class: str,
    classifier: ClassifierHandle,
    x_dist: MultivariateSample,
    mask: SubstitutionMask,
    target_prob: float,
) -> tuple[SubstitutionMask, float]:
    def prob_of(candidate: SubstitutionMask) -> float:
        return classifier.evaluate(
            combine(x_test, x_dist, candidate)
        ).probability_of(target_class)

    prob = prob_of(mask)
    reached = prob >= target_prob
    changed = True
    while changed:
        changed = False
        for j in mask.indices():
            trimmed = mask.without_bit(j)
            trimmed_prob = prob_of(trimmed)
            if reached:
                removable = trimmed_prob >= target_prob
            else:
                removable = abs(trimmed_prob - prob) <= _PROBABILITY_ATOL
            if removable:
                mask, prob = trimmed, trimmed_prob
                changed = True
    return mask, prob


def prune_mask(
    x_test: MultivariateSample,
    target_class: str,
    classifier: ClassifierHandle,
    x_dist: MultivariateSample,
    mask: SubstitutionMask,
    target_prob: float,
) -> SubstitutionMask:
    """Drop mask bits that are not pulling their weight, until none is droppable.

    If the mask meets the target probability, a bit is dropped whenever the
    target still holds without it. If it never met the target, only bits whose
    removal leaves the probability unchanged (within 1e-12) are dropped. Bits
    are swept in ascending metric order, repeatedly, so the returned mask is
    irreducible under the same rule.
    """
    pruned, _ = _prune_with_prob(x_test, target_class, classifier, x_dist, mask, target_prob)
    return pruned


def _build_explanation(
    x_test: MultivariateSample,
    x_dist: MultivariateSample,
    mask: SubstitutionMask,
    target_class: str,
    probability: float,
    params,
) -> Explanation:
    if params is not None:
        x_test_units = params.invert(x_test)
        x_dist_units = params.invert(x_dist)
    else:
        x_test_units, x_dist_units = x_test, x_dist
    names = x_test.schema.names
    triples = tuple(
        (names[j], x_test_units.values[j], x_dist_units.values[j]) for j in mask.indices()
    )
    return Explanation(
        mask=mask,
        distractor_id=x_dist.sample_id,
        target_class=target_class,
        achieved_probability=probability,
        substituted_metrics=triples,
    )


def explain(
    x_test: MultivariateSample,
    target_class: str,
    classifier: ClassifierHandle,
    indexes: dict[str, ClassIndex],
    config: SearchConfig,
    params=None,
) -> SearchOutcome:
    """Sweep nearby distractors, search each, return the lowest-loss explanation.

    Candidates are the config's number of nearest same-class distractors.
    Candidates already meeting the target probability are preferred; when none
    does, every candidate is searched with its own probability as the stopping
    target (the index only ever holds samples the classifier assigns to the
    class, so substituting everything always works). Every returned mask has
    been pruned to irreducibility. Losses are compared under the configured
    relaxed loss; ties go to the nearest distractor. When ``params`` (fitted
    normalization) is given, the explanation's series are converted back to
    original units.
    """
    counting = CountingClassifier(classifier)
    test_prob = counting.evaluate(x_test).probability_of(target_class)
    if test_prob >= config.target_prob:
        explanation = _build_explanation(
            x_test, x_test, SubstitutionMask.empty(x_test.schema.num_metrics),
            target_class, test_prob, params,
        )
        loss = relaxed_loss_terms(
            test_prob, 0, config.target_prob, config.desired_size, config.sparsity_weight
        )
        return SearchOutcome(
            explanation=explanation,
            method=config.method,
            loss=loss,
            evaluations=counting.count,
            distractors_tried=0,
        )

    index = indexes.get(target_class)
    if index is None or len(index) == 0:
        raise NoDistractorError(
            f"no correctly classified training sample of class {target_class!r}; "
            "no explanation exists by metric substitution from this training set"
        )

    candidate_ids = nearest_distractors(index, x_test, config.num_distractors)
    candidates = [index.sample_by_id(i) for i in candidate_ids]
    # Single-sample evaluation on purpose: greedy re-checks its precondition
    # through the same path, and a batched path may differ in the last ulp.
    dist_probs = [
        counting.evaluate(c).probability_of(target_class) for c in candidates
    ]

    qualified = [
        (cand, config.target_prob)
        for cand, p in zip(candidates, dist_probs)
        if p >= config.target_prob
    ]
    if qualified:
        sweep = qualified
    else:
        # No candidate reaches the target on its own: lower each candidate's
        # stopping target to its own probability, which greedy always attains.
        sweep = list(zip(candidates, dist_probs))

    best: tuple[float, SubstitutionMask, MultivariateSample, float, str] | None = None
    for x_dist, stop_prob in sweep:
        if config.method == "greedy":
            raw = greedy_search(x_test, target_class, counting, x_dist, stop_prob)
            mask, prob = _prune_with_prob(
                x_test, target_class, counting, x_dist, raw, stop_prob
            )
            label = "greedy"
        else:
            climb_config = replace(config, target_prob=stop_prob)
            raw = hill_climb(x_test, target_class, counting, x_dist, climb_config)
            mask, prob = _prune_with_prob(
                x_test, target_class, counting, x_dist, raw, stop_prob
            )
            label = "hillclimb"
            if mask.cardinality == 0 or prob < stop_prob:
                raw = greedy_search(x_test, target_class, counting, x_dist, stop_prob)
                mask, prob = _prune_with_prob(
                    x_test, target_class, counting, x_dist, raw, stop_prob
                )
                label = "hillclimb_fallback_greedy"
        loss = relaxed_loss_terms(
            prob, mask.cardinality, config.target_prob, config.desired_size,
            config.sparsity_weight,
        )
        if best is None or loss < best[0]:
            best = (loss, mask, x_dist, prob, label)

    loss, mask, x_dist, prob, label = best
    explanation = _build_explanation(x_test, x_dist, mask, target_class, prob, params)
    return SearchOutcome(
        explanation=explanation,
        method=label,
        loss=loss,
        evaluations=counting.count,
        distractors_tried=len(sweep),
    )

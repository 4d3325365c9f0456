"""The search algorithms on a classifier with a known optimum.

The set-cover forest classifies a binary vector by the fraction of its member
sets that contain at least one 1-bit, so the smallest substitution mask that
drives the probability to 1 is exactly the minimum hitting set. That gives us
a classifier where the right answer is computable by brute force, which this
script uses to sanity-check both search algorithms end to end.
"""
import numpy as np

from comte import (
    SearchConfig,
    SetCoverClassifier,
    SetCoverForest,
    SubstitutionMask,
    combine,
    greedy_search,
    hill_climb,
    hitting_set_bruteforce,
    prune_mask,
)
from comte.core import MetricSchema, MultivariateSample

forest = SetCoverForest(
    universe_size=6,
    sets=(
        frozenset({0, 1}),
        frozenset({1, 2}),
        frozenset({2, 3, 4}),
        frozenset({4, 5}),
    ),
)
classifier = SetCoverClassifier(forest)
schema = forest.schema()

print("universe:", forest.universe_size, "elements")
for i, s in enumerate(forest.sets):
    print(f"  set {i}: {sorted(s)}")

optimum = hitting_set_bruteforce(forest)
print("\nbrute-force minimum hitting set:", sorted(optimum))

zeros = MultivariateSample(schema, np.zeros((6, 1)), "zeros", label="0")
ones = MultivariateSample(schema, np.ones((6, 1)), "ones", label="1")

mask = greedy_search(zeros, "1", classifier, ones, target_prob=1.0)
print("greedy substitution mask:   ", sorted(mask.indices()),
      f"(size {mask.cardinality}, optimum {len(optimum)})")

config = SearchConfig(
    target_prob=1.0, desired_size=0, sparsity_weight=0.01,
    rng_seed=1, num_restarts=5, max_iters=300, method="hillclimb",
)
climbed = hill_climb(zeros, "1", classifier, ones, config)
pruned = prune_mask(zeros, "1", classifier, ones, climbed, target_prob=1.0)
print("hill-climbed mask:          ", sorted(climbed.indices()))
print("after pruning:              ", sorted(pruned.indices()))

candidate = combine(zeros, ones, pruned)
p = classifier.evaluate(candidate).probability_of("1")
print("\nprobability of class 1 after substitution:", p)

# Pruning in action: start from a deliberately bloated mask.
bloated = SubstitutionMask.from_indices(6, [0, 1, 2, 4, 5])
trimmed = prune_mask(zeros, "1", classifier, ones, bloated, target_prob=1.0)
print("bloated mask", sorted(bloated.indices()), "prunes to", sorted(trimmed.indices()))

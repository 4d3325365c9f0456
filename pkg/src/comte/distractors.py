"""Per-class nearest-neighbor retrieval of correctly classified training samples.

Distractor candidates are training samples the classifier already places in the
class of interest; searching near the test sample first keeps substitutions
small. One spatial index is kept per class, holding only samples whose label
matches the classifier's argmax. Queries run on metric-major flattenings of the
(normalized) sample matrices under Euclidean distance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .classifiers import ClassifierHandle
from .core import MultivariateSample
from .errors import NoDistractorError


@dataclass(frozen=True)
class ClassIndex:
    """All correctly classified training samples of one class, ready to query.

    A class whose every training sample is misclassified still gets an index;
    it is simply empty (tree is None) and any query on it fails loudly.
    """

    class_name: str
    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, m*t), row order matches ids
    samples: tuple[MultivariateSample, ...]
    tree: cKDTree | None

    def __len__(self) -> int:
        return len(self.ids)

    def sample_by_id(self, sample_id: str) -> MultivariateSample:
        try:
            return self.samples[self.ids.index(sample_id)]
        except ValueError:
            raise KeyError(f"sample {sample_id!r} not in index for {self.class_name!r}") from None


def build_index(
    training: Sequence[MultivariateSample],
    classifier: ClassifierHandle,
    prefilter: Callable[[Sequence[MultivariateSample]], Sequence[MultivariateSample]] | None = None,
) -> dict[str, ClassIndex]:
    """Index each class's correctly classified training samples.

    A sample enters the index for class c only when its label is c and the
    classifier's argmax agrees. ``prefilter`` lets callers thin very large
    training sets (random subsample, cluster representatives, ...) before
    indexing; it receives the full list and returns the subset to index.
    """
    if not training:
        raise ValueError("empty training set")
    if prefilter is not None:
        training = list(prefilter(training))
        if not training:
            raise ValueError("prefilter removed every training sample")
    for s in training:
        if s.label is None:
            raise ValueError(f"training sample {s.sample_id!r} has no label")

    predictions = classifier.evaluate_batch(training)
    per_class: dict[str, list[MultivariateSample]] = {s.label: [] for s in training}
    for sample, probs in zip(training, predictions):
        if probs.argmax_class() == sample.label:
            per_class[sample.label].append(sample)

    width = training[0].schema.num_metrics * training[0].schema.length
    indexes: dict[str, ClassIndex] = {}
    for class_name, members in per_class.items():
        if members:
            vectors = np.stack([s.flattened() for s in members])
            tree = cKDTree(vectors)
        else:
            vectors, tree = np.empty((0, width)), None
        indexes[class_name] = ClassIndex(
            class_name=class_name,
            ids=tuple(s.sample_id for s in members),
            vectors=vectors,
            samples=tuple(members),
            tree=tree,
        )
    return indexes


def nearest_distractors(
    index: ClassIndex, x_test: MultivariateSample, n: int
) -> tuple[str, ...]:
    """The min(n, index size) nearest sample ids, closest first.

    Distances are Euclidean over the flattened vectors; exact distance ties are
    broken by lexicographic sample id so results are reproducible.
    """
    if n < 1:
        raise ValueError("need at least one distractor")
    if len(index) == 0:
        raise NoDistractorError(f"no valid distractor for class {index.class_name!r}")
    query = x_test.flattened()
    k = min(n, len(index))

    # The tree narrows the field; candidates at the cut-off radius are then
    # re-ranked with exactly the distance the brute-force tie rule uses.
    dists, _ = index.tree.query(query, k=k)
    radius = float(np.max(np.atleast_1d(dists)))
    candidate_rows = index.tree.query_ball_point(query, r=radius * (1.0 + 1e-9) + 1e-300)
    exact = np.sqrt(np.sum((index.vectors[candidate_rows] - query) ** 2, axis=1))
    ranked = sorted(
        (float(d), index.ids[row]) for d, row in zip(exact, candidate_rows)
    )
    return tuple(sample_id for _, sample_id in ranked[:k])

import numpy as np
import pytest

from comte.classifiers import (
    FEATURES_PER_METRIC,
    LogisticClassifier,
    LogisticModel,
    feature_names_for,
)
from comte.core import Explanation, MetricSchema, SubstitutionMask
from comte.errors import DegenerateNeighborsError
from comte.metrics import (
    RandomMaskExplainer,
    comprehensibility,
    faithfulness,
    faithfulness_of_names,
    generalizability,
    lipschitz_robustness,
)

from conftest import make_sample


def explanation_over(schema, metric_names, distractor_id="d", target_class="c", prob=0.97):
    mask = SubstitutionMask.from_indices(
        schema.num_metrics, [schema.index_of(n) for n in metric_names]
    )
    triples = tuple(
        (name, np.zeros(schema.length), np.ones(schema.length)) for name in metric_names
    )
    return Explanation(
        mask=mask, distractor_id=distractor_id, target_class=target_class,
        achieved_probability=prob, substituted_metrics=triples,
    )


def model_using(schema, metric_names):
    names = feature_names_for(schema)
    weights = np.zeros(len(names))
    for metric in metric_names:
        weights[names.index(f"{metric}::mean")] = 1.0
    return LogisticModel(weights=weights, class_names=("neg", "pos"), feature_names=names)


@pytest.fixture
def wide_schema():
    return MetricSchema(names=("m1", "m2", "m3", "m4"), length=3)


class TestFaithfulness:
    def test_half_overlap(self, wide_schema):
        report = faithfulness(
            explanation_over(wide_schema, ["m1", "m2"]), model_using(wide_schema, ["m1", "m3"])
        )
        assert report.precision == 0.5
        assert report.recall == 0.5

    def test_subset_explanation_has_perfect_precision(self, wide_schema):
        report = faithfulness(
            explanation_over(wide_schema, ["m1"]), model_using(wide_schema, ["m1", "m3"])
        )
        assert report.precision == 1.0
        assert report.recall == 0.5

    def test_exact_match_is_perfect(self, wide_schema):
        report = faithfulness(
            explanation_over(wide_schema, ["m1", "m3"]), model_using(wide_schema, ["m1", "m3"])
        )
        assert report.precision == 1.0
        assert report.recall == 1.0

    def test_empty_explanation_gets_vacuous_precision(self, wide_schema):
        report = faithfulness(
            explanation_over(wide_schema, []), model_using(wide_schema, ["m1"])
        )
        assert report.precision == 1.0
        assert report.recall == 0.0

    def test_invariant_under_consistent_relabeling(self, wide_schema):
        base = faithfulness_of_names(["m1", "m2"], model_using(wide_schema, ["m2", "m3"]))
        renamed_schema = MetricSchema(names=("x1", "x2", "x3", "x4"), length=3)
        renamed = faithfulness_of_names(["x1", "x2"], model_using(renamed_schema, ["x2", "x3"]))
        assert (base.precision, base.recall) == (renamed.precision, renamed.recall)


class TestComprehensibility:
    def test_empty_mask(self, wide_schema):
        assert comprehensibility(explanation_over(wide_schema, [])) == 0

    def test_two_series_explanation(self, wide_schema):
        assert comprehensibility(explanation_over(wide_schema, ["m1", "m4"])) == 2

    def test_full_mask(self, wide_schema):
        assert comprehensibility(explanation_over(wide_schema, list(wide_schema.names))) == 4


def point(schema, coords, sample_id):
    return make_sample(
        schema, np.array(coords, dtype=np.float64).reshape(schema.num_metrics, schema.length),
        sample_id,
    )


class TestLipschitzRobustness:
    def test_constant_explainer_scores_zero(self, wide_schema):
        fixed = SubstitutionMask.from_indices(4, [0, 2])
        x = point(wide_schema, np.zeros(12), "x")
        neighbors = [point(wide_schema, np.full(12, v), f"n{v}") for v in (1.0, 2.0)]
        report = lipschitz_robustness(x, lambda s: fixed, neighbors)
        assert report.lipschitz == 0.0
        assert report.neighbor_count == 2

    def test_one_bit_difference_at_distance_two(self, wide_schema):
        x = point(wide_schema, np.zeros(12), "x")
        neighbor = point(wide_schema, [2.0] + [0.0] * 11, "n")  # distance 2

        def explainer(sample):
            if sample.sample_id == "x":
                return SubstitutionMask.from_indices(4, [0])
            return SubstitutionMask.from_indices(4, [1])

        report = lipschitz_robustness(x, explainer, [neighbor])
        assert report.lipschitz == pytest.approx(np.sqrt(2) / 2)

    def test_four_bit_difference_at_distance_one(self, wide_schema):
        x = point(wide_schema, np.zeros(12), "x")
        neighbor = point(wide_schema, [1.0] + [0.0] * 11, "n")  # distance 1

        def explainer(sample):
            if sample.sample_id == "x":
                return SubstitutionMask.from_indices(4, [0, 1, 2, 3])
            return SubstitutionMask.empty(4)

        report = lipschitz_robustness(x, explainer, [neighbor])
        assert report.lipschitz == pytest.approx(2.0)
        assert report.lipschitz_over_sqrt_m == pytest.approx(1.0)

    def test_zero_distance_neighbors_are_excluded(self, wide_schema):
        x = point(wide_schema, np.zeros(12), "x")
        twin = point(wide_schema, np.zeros(12), "twin")
        far = point(wide_schema, [1.0] + [0.0] * 11, "far")
        calls = []

        def explainer(sample):
            calls.append(sample.sample_id)
            return SubstitutionMask.from_indices(4, [0])

        report = lipschitz_robustness(x, explainer, [twin, far])
        assert report.neighbor_count == 1
        assert "twin" not in calls

    def test_all_neighbors_degenerate_raises(self, wide_schema):
        x = point(wide_schema, np.zeros(12), "x")
        twin = point(wide_schema, np.zeros(12), "twin")
        with pytest.raises(DegenerateNeighborsError):
            lipschitz_robustness(x, lambda s: SubstitutionMask.empty(4), [twin])

    def test_scaling_distances_scales_ratios_inversely(self, wide_schema):
        def explainer(sample):
            if sample.sample_id == "x":
                return SubstitutionMask.from_indices(4, [0, 1])
            return SubstitutionMask.from_indices(4, [2])

        x = point(wide_schema, np.zeros(12), "x")
        near = [point(wide_schema, [1.0, 0.5] + [0.0] * 10, "n1"),
                point(wide_schema, [0.0, 2.0] + [0.0] * 10, "n2")]
        doubled = [point(wide_schema, 2 * n.values.ravel(), n.sample_id) for n in near]
        base = lipschitz_robustness(x, explainer, near)
        scaled = lipschitz_robustness(x, explainer, doubled)
        assert scaled.lipschitz == pytest.approx(base.lipschitz / 2)
        for (_, a), (_, b) in zip(base.per_neighbor_ratios, scaled.per_neighbor_ratios):
            assert b == pytest.approx(a / 2)


class SingleMetricClassifier:
    """Class "pos" iff metric 0's first value is above 0.5; nothing else matters."""

    class_names = ("neg", "pos")

    def evaluate(self, sample):
        from comte.core import ClassProbabilities

        hot = sample.values[0, 0] > 0.5
        p = 0.99 if hot else 0.01
        return ClassProbabilities((1.0 - p, p), self.class_names)

    def evaluate_batch(self, samples):
        return [self.evaluate(s) for s in samples]


class TestGeneralizability:
    def test_own_sample_always_flips(self, wide_schema):
        classifier = SingleMetricClassifier()
        distractor = point(wide_schema, [1.0] * 12, "d")
        x = point(wide_schema, np.zeros(12), "x")
        explanation = explanation_over(wide_schema, ["m1"], distractor_id="d", target_class="pos")
        assert generalizability(explanation, distractor, [x], classifier, "pos") == 1.0

    def test_single_decisive_metric_flips_every_cohort(self, wide_schema):
        classifier = SingleMetricClassifier()
        distractor = point(wide_schema, [1.0] * 12, "d")
        rng = np.random.default_rng(1)
        cohort = [point(wide_schema, rng.uniform(-0.4, 0.4, size=12), f"c{i}") for i in range(10)]
        explanation = explanation_over(wide_schema, ["m1"], distractor_id="d", target_class="pos")
        assert generalizability(explanation, distractor, cohort, classifier, "pos") == 1.0

    def test_partial_flip_fraction(self, wide_schema):
        # Substituting m2 never matters to this classifier, so only cohort
        # members already above the threshold count as flipped: exactly 2 of 5.
        classifier = SingleMetricClassifier()
        distractor = point(wide_schema, [1.0] * 12, "d")
        firsts = [0.9, 0.2, 0.8, 0.1, 0.3]
        cohort = [
            point(wide_schema, [v] + [0.0] * 11, f"c{i}") for i, v in enumerate(firsts)
        ]
        explanation = explanation_over(wide_schema, ["m2"], distractor_id="d", target_class="pos")
        assert generalizability(explanation, distractor, cohort, classifier, "pos") == pytest.approx(0.4)

    def test_wrong_distractor_rejected(self, wide_schema):
        classifier = SingleMetricClassifier()
        distractor = point(wide_schema, [1.0] * 12, "other")
        explanation = explanation_over(wide_schema, ["m1"], distractor_id="d", target_class="pos")
        with pytest.raises(KeyError):
            generalizability(explanation, distractor, [distractor], classifier, "pos")

    def test_empty_cohort_warns_and_returns_zero(self, wide_schema):
        classifier = SingleMetricClassifier()
        distractor = point(wide_schema, [1.0] * 12, "d")
        explanation = explanation_over(wide_schema, ["m1"], distractor_id="d", target_class="pos")
        with pytest.warns(UserWarning):
            assert generalizability(explanation, distractor, [], classifier, "pos") == 0.0

    def test_union_ratio_is_the_weighted_average(self, wide_schema):
        classifier = SingleMetricClassifier()
        distractor = point(wide_schema, [1.0] * 12, "d")
        explanation = explanation_over(wide_schema, ["m2"], distractor_id="d", target_class="pos")
        a = [point(wide_schema, [0.9] + [0.0] * 11, "a0"),
             point(wide_schema, [0.1] + [0.0] * 11, "a1")]
        b = [point(wide_schema, [0.8] + [0.0] * 11, "b0")]
        ra = generalizability(explanation, distractor, a, classifier, "pos")
        rb = generalizability(explanation, distractor, b, classifier, "pos")
        runion = generalizability(explanation, distractor, a + b, classifier, "pos")
        assert min(ra, rb) <= runion <= max(ra, rb)
        assert runion == pytest.approx((ra * len(a) + rb * len(b)) / (len(a) + len(b)))


class TestRandomMaskExplainer:
    def test_deterministic_per_sample(self, wide_schema):
        explainer = RandomMaskExplainer(4, 2, seed=9)
        sample = point(wide_schema, np.zeros(12), "s1")
        assert explainer(sample) == explainer(sample)

    def test_size_is_respected(self, wide_schema):
        explainer = RandomMaskExplainer(4, 3, seed=9)
        sample = point(wide_schema, np.zeros(12), "s1")
        assert explainer(sample).cardinality == 3

    def test_callable_size(self, wide_schema):
        explainer = RandomMaskExplainer(4, lambda s: len(s.sample_id), seed=9)
        assert explainer(point(wide_schema, np.zeros(12), "ab")).cardinality == 2

    def test_different_samples_usually_differ(self, wide_schema):
        explainer = RandomMaskExplainer(4, 2, seed=9)
        masks = {
            explainer(point(wide_schema, np.zeros(12), f"s{i}")).bits for i in range(20)
        }
        assert len(masks) > 1

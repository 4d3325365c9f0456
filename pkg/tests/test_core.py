import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comte.core import (
    ClassProbabilities,
    Explanation,
    MetricSchema,
    MultivariateSample,
    SubstitutionMask,
    combine,
    relaxed_loss_terms,
    strict_loss,
)
from comte.errors import SchemaMismatchError

from conftest import make_sample


class FixedProbabilityClassifier:
    """Returns a canned probability for the positive class, whatever the input."""

    def __init__(self, prob, class_names=("neg", "pos")):
        self.prob = prob
        self._names = class_names

    @property
    def class_names(self):
        return self._names

    def evaluate(self, sample):
        return ClassProbabilities((1.0 - self.prob, self.prob), self._names)

    def evaluate_batch(self, samples):
        return [self.evaluate(s) for s in samples]


@st.composite
def sample_pairs(draw):
    m = draw(st.integers(1, 5))
    t = draw(st.integers(1, 6))
    schema = MetricSchema(names=tuple(f"m{i}" for i in range(m)), length=t)
    finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
    a = draw(st.lists(st.lists(finite, min_size=t, max_size=t), min_size=m, max_size=m))
    b = draw(st.lists(st.lists(finite, min_size=t, max_size=t), min_size=m, max_size=m))
    bits = draw(st.lists(st.booleans(), min_size=m, max_size=m))
    return (
        make_sample(schema, a, "a"),
        make_sample(schema, b, "b"),
        SubstitutionMask(tuple(bits)),
    )


class TestTypes:
    def test_schema_rejects_duplicates(self):
        with pytest.raises(ValueError):
            MetricSchema(names=("a", "a"), length=3)

    def test_schema_rejects_empty_names(self):
        with pytest.raises(ValueError):
            MetricSchema(names=("a", ""), length=3)

    def test_sample_rejects_nan(self, small_schema):
        values = np.zeros((3, 4))
        values[1, 2] = np.nan
        with pytest.raises(ValueError):
            make_sample(small_schema, values)

    def test_sample_shape_error_names_dimension(self, small_schema):
        with pytest.raises(SchemaMismatchError, match=r"\(3, 4\)"):
            make_sample(small_schema, np.zeros((2, 4)))

    def test_sample_values_are_immutable(self, small_schema):
        s = make_sample(small_schema, np.zeros((3, 4)))
        with pytest.raises(ValueError):
            s.values[0, 0] = 1.0

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ClassProbabilities((0.6, 0.5), ("a", "b"))

    def test_probabilities_must_stay_in_range(self):
        with pytest.raises(ValueError):
            ClassProbabilities((1.2, -0.2), ("a", "b"))

    def test_mask_cardinality_and_indices(self):
        mask = SubstitutionMask.from_indices(5, [0, 3])
        assert mask.cardinality == 2
        assert mask.indices() == (0, 3)
        assert mask.complement().indices() == (1, 2, 4)

    def test_explanation_checks_substitution_count(self):
        mask = SubstitutionMask.from_indices(3, [1])
        with pytest.raises(ValueError):
            Explanation(
                mask=mask, distractor_id="d", target_class="c",
                achieved_probability=0.5, substituted_metrics=(),
            )


class TestCombine:
    def test_all_zeros_returns_test_sample(self, small_schema):
        x = make_sample(small_schema, np.arange(12.0).reshape(3, 4), "x")
        d = make_sample(small_schema, np.ones((3, 4)), "d")
        out = combine(x, d, SubstitutionMask.empty(3))
        np.testing.assert_array_equal(out.values, x.values)

    def test_all_ones_returns_distractor(self, small_schema):
        x = make_sample(small_schema, np.zeros((3, 4)), "x")
        d = make_sample(small_schema, np.arange(12.0).reshape(3, 4), "d")
        out = combine(x, d, SubstitutionMask.full(3))
        np.testing.assert_array_equal(out.values, d.values)

    def test_single_bit_selects_the_right_row(self, small_schema):
        x = make_sample(small_schema, np.zeros((3, 4)), "x")
        d = make_sample(small_schema, np.ones((3, 4)), "d")
        out = combine(x, d, SubstitutionMask.from_indices(3, [1]))
        np.testing.assert_array_equal(out.values[0], x.values[0])
        np.testing.assert_array_equal(out.values[1], d.values[1])
        np.testing.assert_array_equal(out.values[2], x.values[2])

    def test_schema_mismatch_is_reported(self, small_schema):
        other = MetricSchema(names=("cpu", "mem"), length=4)
        x = make_sample(small_schema, np.zeros((3, 4)), "x")
        d = make_sample(other, np.zeros((2, 4)), "d")
        with pytest.raises(SchemaMismatchError, match="metric count"):
            combine(x, d, SubstitutionMask.empty(3))

    def test_mask_length_mismatch_is_reported(self, small_schema):
        x = make_sample(small_schema, np.zeros((3, 4)), "x")
        d = make_sample(small_schema, np.ones((3, 4)), "d")
        with pytest.raises(SchemaMismatchError, match="mask covers 2"):
            combine(x, d, SubstitutionMask.empty(2))

    @given(sample_pairs())
    @settings(max_examples=60)
    def test_idempotent_in_the_mask(self, pair):
        x, d, mask = pair
        once = combine(x, d, mask)
        twice = combine(once, d, mask)
        np.testing.assert_array_equal(once.values, twice.values)

    @given(sample_pairs())
    @settings(max_examples=60)
    def test_swapping_roles_with_complement_mask_matches(self, pair):
        x, d, mask = pair
        a = combine(x, d, mask)
        b = combine(d, x, mask.complement())
        np.testing.assert_array_equal(a.values, b.values)


class TestLosses:
    def test_strict_loss_zero_when_perfect_and_empty(self, small_schema):
        x = make_sample(small_schema, np.zeros((3, 4)), "x")
        f = FixedProbabilityClassifier(1.0)
        assert strict_loss(f, "pos", SubstitutionMask.empty(3), x, 0.01) == 0.0

    def test_strict_loss_direct_evaluation(self, small_schema):
        x = make_sample(small_schema, np.zeros((3, 4)), "x")
        f = FixedProbabilityClassifier(0.5)
        mask = SubstitutionMask.from_indices(4, [0, 1, 2, 3])
        assert strict_loss(f, "pos", mask, x, 0.01) == pytest.approx(0.29, abs=1e-15)

    def test_strict_loss_probability_term_only(self, small_schema):
        x = make_sample(small_schema, np.zeros((3, 4)), "x")
        f = FixedProbabilityClassifier(0.0)
        mask = SubstitutionMask.full(3)
        assert strict_loss(f, "pos", mask, x, 0.0) == 1.0

    def test_relaxed_loss_zero_at_target_and_size(self):
        assert relaxed_loss_terms(0.95, 3, 0.95, 3, 1.0) == 0.0

    def test_relaxed_loss_direct_evaluation(self):
        value = relaxed_loss_terms(0.5, 5, 0.95, 3, 1.0)
        assert value == pytest.approx(0.45**2 + 2.0, abs=1e-15)

    def test_relaxed_loss_never_rewards_small_masks(self):
        assert relaxed_loss_terms(0.99, 2, 0.95, 3, 10.0) == 0.0

    @given(
        p_low=st.floats(0, 1), p_high=st.floats(0, 1),
        size=st.integers(0, 10), target=st.floats(0.01, 1.0),
        desired=st.integers(0, 5), weight=st.floats(0, 10),
    )
    def test_monotone_in_probability(self, p_low, p_high, size, target, desired, weight):
        lo, hi = min(p_low, p_high), max(p_low, p_high)
        assert relaxed_loss_terms(hi, size, target, desired, weight) <= relaxed_loss_terms(
            lo, size, target, desired, weight
        )

    @given(
        p=st.floats(0, 1), s_small=st.integers(0, 10), s_big=st.integers(0, 10),
        target=st.floats(0.01, 1.0), desired=st.integers(0, 5), weight=st.floats(0, 10),
    )
    def test_monotone_in_mask_size(self, p, s_small, s_big, target, desired, weight):
        lo, hi = min(s_small, s_big), max(s_small, s_big)
        assert relaxed_loss_terms(p, lo, target, desired, weight) <= relaxed_loss_terms(
            p, hi, target, desired, weight
        )

    @given(
        p=st.floats(0, 1), size=st.integers(0, 12),
        target=st.floats(0.01, 1.0), desired=st.integers(0, 6),
        weight=st.floats(0.001, 10),
    )
    def test_zero_exactly_when_target_met_by_small_mask(self, p, size, target, desired, weight):
        loss = relaxed_loss_terms(p, size, target, desired, weight)
        if p >= target and size <= desired:
            assert loss == 0.0
        else:
            assert loss > 0.0

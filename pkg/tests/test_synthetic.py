import numpy as np
import pytest

from comte.classifiers import SetCoverClassifier, extract_features, logistic_train_l1
from comte.core import SubstitutionMask, combine
from comte.data import fit_normalization, normalize_dataset
from comte.synthetic import ClassRecipe, GeneratorSpec, Signal, generate, generate_files


def two_class_spec(**overrides):
    defaults = dict(
        num_metrics=6,
        length=12,
        classes=(
            ClassRecipe(name="normal"),
            ClassRecipe(
                name="anomaly",
                signals=(Signal(metric=3, kind="level", magnitude=1.0),),
            ),
        ),
        noise_scale=0.0,
        sample_count=20,
        seed=11,
    )
    defaults.update(overrides)
    return GeneratorSpec(**defaults)


class TestGenerator:
    def test_same_seed_gives_byte_identical_files(self, tmp_path):
        spec = two_class_spec(noise_scale=0.05)
        first_data, first_manifest = tmp_path / "a.ndjson", tmp_path / "a.json"
        second_data, second_manifest = tmp_path / "b.ndjson", tmp_path / "b.json"
        generate_files(spec, first_data, first_manifest)
        generate_files(spec, second_data, second_manifest)
        assert first_data.read_bytes() == second_data.read_bytes()
        assert first_manifest.read_bytes() == second_manifest.read_bytes()

    def test_labels_are_balanced_within_one(self):
        for count in (20, 21, 23):
            dataset, _ = generate(two_class_spec(sample_count=count))
            tallies = {}
            for s in dataset:
                tallies[s.label] = tallies.get(s.label, 0) + 1
            assert max(tallies.values()) - min(tallies.values()) <= 1

    def test_manifest_lists_exactly_the_signal_metrics(self):
        spec = two_class_spec(
            num_metrics=10,
            classes=(
                ClassRecipe(name="normal"),
                ClassRecipe(
                    name="anomaly",
                    signals=tuple(
                        Signal(metric=i, kind=kind, magnitude=1.0)
                        for i, kind in zip((1, 3, 5, 7, 9), ("level", "trend", "spikes", "level", "trend"))
                    ),
                ),
            ),
        )
        _, manifest = generate(spec)
        assert manifest["signal_metrics"] == [
            "metric_01", "metric_03", "metric_05", "metric_07", "metric_09"
        ]

    def test_rejects_signal_outside_universe(self):
        with pytest.raises(ValueError):
            two_class_spec(
                classes=(
                    ClassRecipe(name="normal"),
                    ClassRecipe(name="anomaly", signals=(Signal(metric=6, kind="level", magnitude=1.0),)),
                )
            )

    def test_zero_noise_single_level_signal_is_the_unique_minimal_explanation(self):
        dataset, manifest = generate(two_class_spec())
        assert manifest["signal_metrics"] == ["metric_03"]
        normals = [s for s in dataset if s.label == "normal"]
        anomalies = [s for s in dataset if s.label == "anomaly"]
        x_test, x_dist = normals[0], anomalies[0]

        # Exhaustive single-metric substitution: only metric 3 moves the
        # sample onto the anomaly side in every coordinate that differs.
        differing = {
            j for j in range(6)
            if not np.array_equal(x_test.values[j], x_dist.values[j])
        }
        assert differing == {3}
        swapped = combine(x_test, x_dist, SubstitutionMask.from_indices(6, [3]))
        np.testing.assert_array_equal(swapped.values, x_dist.values)

    def test_zero_noise_lasso_support_stays_inside_the_signal_set(self):
        spec = two_class_spec(
            num_metrics=8,
            sample_count=40,
            classes=(
                ClassRecipe(name="normal"),
                ClassRecipe(
                    name="anomaly",
                    signals=(
                        Signal(metric=2, kind="level", magnitude=1.0),
                        Signal(metric=5, kind="trend", magnitude=1.0),
                    ),
                ),
            ),
        )
        dataset, manifest = generate(spec)
        params = fit_normalization(dataset)
        normalized = normalize_dataset(params, dataset)
        features = [extract_features(s) for s in normalized]
        labels = [1 if s.label == "anomaly" else 0 for s in normalized]
        model = logistic_train_l1(features, labels, l1_penalty=0.01, steps=300,
                                  class_names=("normal", "anomaly"))
        assert model.nonzero_indices(), "the model must use something"
        assert model.used_metrics() <= set(manifest["signal_metrics"])

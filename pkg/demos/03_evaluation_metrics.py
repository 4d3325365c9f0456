"""Scoring explanations: faithfulness, comprehensibility, robustness, generalizability.

The logistic pipeline is transparent (zero-weight features provably do not
matter), so explanations can be graded against the metrics the model really
uses. Robustness asks whether neighboring samples get similar explanations;
generalizability asks whether one sample's fix transfers to similarly
misclassified samples.
"""
import numpy as np

from comte import (
    ClassRecipe,
    GeneratorSpec,
    LogisticClassifier,
    RandomMaskExplainer,
    SearchConfig,
    Signal,
    build_index,
    comprehensibility,
    explain,
    extract_features,
    faithfulness,
    fit_normalization,
    generalizability,
    generate,
    lipschitz_robustness,
    logistic_train_l1,
    normalize_dataset,
)

classes = (
    ClassRecipe(name="healthy"),
    ClassRecipe(name="anomalous", signals=(
        Signal(metric=1, kind="level", magnitude=1.0),
        Signal(metric=5, kind="trend", magnitude=-1.0),
    )),
)
train, _ = generate(GeneratorSpec(num_metrics=8, length=16, classes=classes,
                                  noise_scale=0.1, sample_count=80, seed=5))
test, _ = generate(GeneratorSpec(num_metrics=8, length=16, classes=classes,
                                 noise_scale=0.1, sample_count=20, seed=6))
params = fit_normalization(train)
ntrain, ntest = normalize_dataset(params, train), normalize_dataset(params, test)

model = logistic_train_l1(
    [extract_features(s) for s in ntrain],
    [1 if s.label == "anomalous" else 0 for s in ntrain],
    l1_penalty=0.03, steps=500, class_names=("healthy", "anomalous"),
)
classifier = LogisticClassifier(model, ntrain.schema)
indexes = build_index(list(ntrain), classifier)
config = SearchConfig(method="greedy", rng_seed=0)

def flip(sample):
    return "anomalous" if classifier.evaluate(sample).argmax_class() == "healthy" else "healthy"

# Faithfulness + comprehensibility over the test set.
print("model uses:", sorted(model.used_metrics()))
precisions, recalls, sizes = [], [], []
outcomes = {}
for sample in ntest:
    outcome = explain(sample, flip(sample), classifier, indexes, config)
    outcomes[sample.sample_id] = outcome
    report = faithfulness(outcome.explanation, model)
    precisions.append(report.precision)
    recalls.append(report.recall)
    sizes.append(comprehensibility(outcome.explanation))
print(f"mean precision {np.mean(precisions):.2f}, mean recall {np.mean(recalls):.2f}, "
      f"mean explanation size {np.mean(sizes):.2f}")

# Robustness: worst explanation change per unit of sample change, vs random.
train_matrix = np.stack([s.flattened() for s in ntrain])
sample = ntest.samples[0]
target = flip(sample)
order = np.argsort(np.linalg.norm(train_matrix - sample.flattened(), axis=1))[:5]
neighborhood = [ntrain.samples[i] for i in order]

greedy_report = lipschitz_robustness(
    sample, lambda s: explain(s, target, classifier, indexes, config).explanation,
    neighborhood,
)
size = outcomes[sample.sample_id].explanation.mask.cardinality
random_report = lipschitz_robustness(
    sample, RandomMaskExplainer(8, size, seed=0), neighborhood
)
print(f"\nrobustness (lower is better): greedy {greedy_report.lipschitz:.3f} "
      f"vs random baseline {random_report.lipschitz:.3f}")

# Generalizability: does one sample's fix flip its peers?
misclassified = [s for s in ntest if classifier.evaluate(s).argmax_class() != s.label]
if misclassified:
    probe = misclassified[0]
    cohort = [
        s for s in ntest
        if s.label == probe.label
        and classifier.evaluate(s).argmax_class() == classifier.evaluate(probe).argmax_class()
    ]
    outcome = explain(probe, probe.label, classifier, indexes, config)
    distractor = indexes[probe.label].sample_by_id(outcome.explanation.distractor_id)
    ratio = generalizability(outcome.explanation, distractor, cohort, classifier, probe.label)
    print(f"\n{probe.sample_id} is misclassified; its fix flips "
          f"{ratio:.0%} of its {len(cohort)}-sample cohort")
else:
    print("\nno misclassified test samples this run; generalizability has no cohort")

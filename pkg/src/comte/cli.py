"""Command-line surface.

Subcommands cover the full workflow: fit normalization, train the transparent
logistic pipeline, explain a sample against any builtin or subprocess
classifier, run the evaluation harnesses, and dump plot-ready CSV. All reports
are JSON; failures exit nonzero with a machine-readable error object on stderr.
The default RNG seed is 0, overridable by the COMTE_SEED environment variable,
which in turn loses to an explicit --seed flag.
"""
from __future__ import annotations

import contextlib
import csv
import functools
import os
import re
import sys

import click
import numpy as np

from .classifiers import LogisticClassifier, extract_features
from .core import MultivariateSample
from .data import (
    Dataset,
    fit_normalization,
    load_dataset,
    load_normalization,
    normalize_dataset,
    save_normalization,
)
from .distractors import build_index
from .errors import ComteError
from .metrics import (
    RandomMaskExplainer,
    comprehensibility,
    faithfulness,
    faithfulness_of_names,
    generalizability,
    lipschitz_robustness,
)
from .search import SearchConfig, explain
from .serialize import (
    load_builtin_classifier,
    load_explanation,
    load_logistic_model,
    outcome_to_dict,
    save_logistic_model,
    write_report,
)
from .wire import ExternalClassifier
from . import classifiers as _classifiers

SEED_ENV_VAR = "COMTE_SEED"


def _error_code(exc: Exception) -> str:
    code = getattr(exc, "code", None)
    if code:
        return code
    name = type(exc).__name__.removesuffix("Error")
    return re.sub(r"(?<!^)(?=[A-Z])", "-", name).lower()


def _fail(exc: Exception) -> None:
    payload = {"error": {"code": _error_code(exc), "message": str(exc)}}
    click.echo(_json_dumps(payload), err=True)
    sys.exit(1)


def _json_dumps(payload) -> str:
    import json

    return json.dumps(payload, indent=2)


def handles_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ComteError as exc:
            _fail(exc)
        except (KeyError, ValueError, OSError) as exc:
            _fail(exc)

    return wrapper


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return 0


def _open_classifier(stack: contextlib.ExitStack, spec: str, schema):
    if spec.startswith("builtin:"):
        return load_builtin_classifier(spec.removeprefix("builtin:"), schema)
    if spec.startswith("exec:"):
        return stack.enter_context(ExternalClassifier(spec.removeprefix("exec:"), schema))
    raise ValueError(f"classifier must be builtin:<model-file> or exec:<command>, got {spec!r}")


def _flip_target(probs, predicted: str) -> str:
    # Second-likeliest class; for binary classifiers this is simply the other one.
    ranked = sorted(
        zip(probs.per_class, probs.class_names), key=lambda pair: -pair[0]
    )
    for _, name in ranked:
        if name != predicted:
            return name
    raise ValueError("classifier exposes a single class; nothing to flip to")


def _search_options(fn):
    for option in reversed(
        [
            click.option("--method", type=click.Choice(["greedy", "hillclimb"]), default="greedy", show_default=True),
            click.option("--distractors", "num_distractors", type=int, default=3, show_default=True),
            click.option("--tau", "target_prob", type=float, default=0.95, show_default=True, help="Target class probability."),
            click.option("--delta", "desired_size", type=int, default=3, show_default=True, help="Explanation size that goes unpenalized."),
            click.option("--lambda", "sparsity_weight", type=float, default=0.01, show_default=True, help="Penalty per metric beyond --delta."),
            click.option("--seed", type=int, default=None, help=f"RNG seed; defaults to ${SEED_ENV_VAR} or 0."),
            click.option("--restarts", "num_restarts", type=int, default=5, show_default=True),
            click.option("--max-attempts", type=int, default=50, show_default=True),
            click.option("--max-iters", type=int, default=1000, show_default=True),
        ]
    ):
        fn = option(fn)
    return fn


def _build_config(method, num_distractors, target_prob, desired_size, sparsity_weight,
                  seed, num_restarts, max_attempts, max_iters) -> SearchConfig:
    return SearchConfig(
        target_prob=target_prob,
        desired_size=desired_size,
        sparsity_weight=sparsity_weight,
        num_distractors=num_distractors,
        rng_seed=_resolve_seed(seed),
        num_restarts=num_restarts,
        max_attempts=max_attempts,
        max_iters=max_iters,
        method=method,
    )


@click.group()
def main():
    """Counterfactual explanations for multivariate time-series classifiers."""


@main.command()
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@handles_errors
def normalize(train_path, out_path):
    """Fit per-metric min/max normalization on a training set."""
    params = fit_normalization(load_dataset(train_path))
    save_normalization(params, out_path)
    click.echo(f"wrote normalization for {len(params.metric_names)} metrics to {out_path}")


@main.command("train-logistic")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--l1", "l1_penalty", required=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--params", "params_path", type=click.Path(exists=True), default=None,
              help="Normalization to apply; fitted from the training set when omitted.")
@click.option("--steps", type=int, default=500, show_default=True)
@click.option("--learning-rate", type=float, default=0.5, show_default=True)
@click.option("--positive-class", default=None,
              help="Label treated as the positive class; defaults to the last label in sorted order.")
@handles_errors
def train_logistic(train_path, l1_penalty, out_path, params_path, steps, learning_rate, positive_class):
    """Train the sparse logistic pipeline and report its nonzero feature count."""
    dataset = load_dataset(train_path)
    params = load_normalization(params_path) if params_path else fit_normalization(dataset)
    normalized = normalize_dataset(params, dataset)
    labels = dataset.labels()
    if len(labels) != 2:
        raise ValueError(f"logistic training needs exactly 2 labels, found {labels}")
    if positive_class is None:
        positive_class = labels[1]
    if positive_class not in labels:
        raise ValueError(f"positive class {positive_class!r} not among labels {labels}")
    negative_class = next(l for l in labels if l != positive_class)
    features = [extract_features(s) for s in normalized]
    y = [1 if s.label == positive_class else 0 for s in normalized]
    model = _classifiers.logistic_train_l1(
        features, y, l1_penalty, steps=steps, learning_rate=learning_rate,
        class_names=(negative_class, positive_class),
    )
    save_logistic_model(model, out_path)
    report = {
        "model": out_path,
        "nonzero_features": len(model.nonzero_indices()),
        "nonzero_metrics": sorted(model.used_metrics()),
    }
    click.echo(_json_dumps(report))


def _load_normalized(train_path, params_path, test_path=None):
    train_raw = load_dataset(train_path)
    params = load_normalization(params_path)
    train = normalize_dataset(params, train_raw)
    test = normalize_dataset(params, load_dataset(test_path)) if test_path else None
    return train_raw, train, test, params


@main.command("explain")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", type=click.Path(exists=True), default=None,
              help="File holding the sample to explain; defaults to the training file.")
@click.option("--params", "params_path", required=True, type=click.Path(exists=True))
@click.option("--sample", "sample_id", required=True)
@click.option("--target-class", required=True)
@click.option("--classifier", "classifier_spec", required=True,
              help="builtin:<model-file> or exec:<command>.")
@click.option("--out", "out_path", required=True, type=click.Path())
@_search_options
@handles_errors
def explain_cmd(train_path, test_path, params_path, sample_id, target_class,
                classifier_spec, out_path, **search_kwargs):
    """Explain one sample: which metrics to substitute, from which distractor."""
    _, train, test, params = _load_normalized(train_path, params_path, test_path)
    pool = test if test is not None else train
    x_test = pool.sample(sample_id)
    config = _build_config(**search_kwargs)
    with contextlib.ExitStack() as stack:
        classifier = _open_classifier(stack, classifier_spec, train.schema)
        indexes = build_index(list(train), classifier)
        outcome = explain(x_test, target_class, classifier, indexes, config, params=params)
    payload = outcome_to_dict(outcome, sample_id, train.schema.names, config)
    write_report(payload, out_path)
    click.echo(
        f"explained {sample_id} -> {target_class}: {outcome.explanation.mask.cardinality} "
        f"substitution(s), probability {outcome.explanation.achieved_probability:.4f}"
    )


@main.group()
def evaluate():
    """Evaluation harnesses; each emits a JSON report."""


@evaluate.command("faithfulness")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--params", "params_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True),
              help="Logistic model file; serves as both classifier and ground truth.")
@click.option("--random-baseline", is_flag=True, help="Also score a size-matched random explainer.")
@click.option("--limit", type=int, default=None, help="Evaluate at most this many test samples.")
@click.option("--out", "out_path", required=True, type=click.Path())
@_search_options
@handles_errors
def evaluate_faithfulness(train_path, test_path, params_path, model_path, random_baseline,
                          limit, out_path, **search_kwargs):
    """Precision/recall of explanations against the logistic model's used metrics."""
    _, train, test, _ = _load_normalized(train_path, params_path, test_path)
    model = load_logistic_model(model_path)
    classifier = LogisticClassifier(model, train.schema)
    indexes = build_index(list(train), classifier)
    config = _build_config(**search_kwargs)
    random_explainer = (
        RandomMaskExplainer(train.schema.num_metrics, 0, seed=config.rng_seed)
        if random_baseline else None
    )

    per_sample = []
    samples = list(test)[: limit if limit else None]
    for sample in samples:
        probs = classifier.evaluate(sample)
        target = _flip_target(probs, probs.argmax_class())
        outcome = explain(sample, target, classifier, indexes, config)
        report = faithfulness(outcome.explanation, model)
        entry = {
            "sample_id": sample.sample_id,
            "target_class": target,
            "precision": report.precision,
            "recall": report.recall,
            "explanation_metrics": sorted(report.explanation_metrics),
        }
        if random_explainer is not None:
            random_explainer.size = outcome.explanation.mask.cardinality
            mask = random_explainer(sample)
            names = [train.schema.names[j] for j in mask.indices()]
            random_report = faithfulness_of_names(names, model)
            entry["random_precision"] = random_report.precision
            entry["random_recall"] = random_report.recall
        per_sample.append(entry)

    payload = {
        "method": config.method,
        "ground_truth_metrics": sorted(model.used_metrics()),
        "samples_evaluated": len(per_sample),
        "mean_precision": float(np.mean([e["precision"] for e in per_sample])) if per_sample else None,
        "mean_recall": float(np.mean([e["recall"] for e in per_sample])) if per_sample else None,
        "per_sample": per_sample,
    }
    if random_explainer is not None and per_sample:
        payload["random_mean_precision"] = float(np.mean([e["random_precision"] for e in per_sample]))
        payload["random_mean_recall"] = float(np.mean([e["random_recall"] for e in per_sample]))
    write_report(payload, out_path)
    click.echo(f"faithfulness over {len(per_sample)} samples -> {out_path}")


@evaluate.command("robustness")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--params", "params_path", required=True, type=click.Path(exists=True))
@click.option("--classifier", "classifier_spec", required=True)
@click.option("--neighbors", "k_neighbors", type=int, default=5, show_default=True)
@click.option("--random-baseline", is_flag=True, help="Also score a size-matched random explainer.")
@click.option("--limit", type=int, default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@_search_options
@handles_errors
def evaluate_robustness(train_path, test_path, params_path, classifier_spec, k_neighbors,
                        random_baseline, limit, out_path, **search_kwargs):
    """Local Lipschitz constant of the explanation map over nearest training samples."""
    _, train, test, _ = _load_normalized(train_path, params_path, test_path)
    config = _build_config(**search_kwargs)
    with contextlib.ExitStack() as stack:
        classifier = _open_classifier(stack, classifier_spec, train.schema)
        indexes = build_index(list(train), classifier)
        train_matrix = np.stack([s.flattened() for s in train])

        per_sample = []
        samples = list(test)[: limit if limit else None]
        for sample in samples:
            probs = classifier.evaluate(sample)
            target = _flip_target(probs, probs.argmax_class())
            distances = np.linalg.norm(train_matrix - sample.flattened(), axis=1)
            order = np.argsort(distances, kind="stable")[:k_neighbors]
            neighborhood = [train.samples[i] for i in order]

            def explainer(s, _target=target):
                return explain(s, _target, classifier, indexes, config).explanation

            report = lipschitz_robustness(sample, explainer, neighborhood)
            entry = {
                "sample_id": sample.sample_id,
                "target_class": target,
                "lipschitz": report.lipschitz,
                "lipschitz_over_sqrt_m": report.lipschitz_over_sqrt_m,
                "neighbors_used": report.neighbor_count,
            }
            if random_baseline:
                size = explain(sample, target, classifier, indexes, config).explanation.mask.cardinality
                random_explainer = RandomMaskExplainer(
                    train.schema.num_metrics, size, seed=config.rng_seed
                )
                random_report = lipschitz_robustness(sample, random_explainer, neighborhood)
                entry["random_lipschitz"] = random_report.lipschitz
            per_sample.append(entry)

    payload = {
        "method": config.method,
        "neighbors": k_neighbors,
        "samples_evaluated": len(per_sample),
        "mean_lipschitz": float(np.mean([e["lipschitz"] for e in per_sample])) if per_sample else None,
        "mean_lipschitz_over_sqrt_m": float(np.mean([e["lipschitz_over_sqrt_m"] for e in per_sample])) if per_sample else None,
        "per_sample": per_sample,
    }
    if random_baseline and per_sample:
        payload["random_mean_lipschitz"] = float(np.mean([e["random_lipschitz"] for e in per_sample]))
    write_report(payload, out_path)
    click.echo(f"robustness over {len(per_sample)} samples -> {out_path}")


@evaluate.command("generalizability")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--params", "params_path", required=True, type=click.Path(exists=True))
@click.option("--classifier", "classifier_spec", required=True)
@click.option("--limit", type=int, default=None, help="Explain at most this many samples per cohort.")
@click.option("--out", "out_path", required=True, type=click.Path())
@_search_options
@handles_errors
def evaluate_generalizability(train_path, test_path, params_path, classifier_spec,
                              limit, out_path, **search_kwargs):
    """How often one misclassification's fix flips similarly misclassified samples.

    Misclassified test samples are grouped by (true class, predicted class);
    each explained sample's substitutions are applied to its whole cohort,
    itself included.
    """
    _, train, test, _ = _load_normalized(train_path, params_path, test_path)
    config = _build_config(**search_kwargs)
    with contextlib.ExitStack() as stack:
        classifier = _open_classifier(stack, classifier_spec, train.schema)
        indexes = build_index(list(train), classifier)

        cohorts: dict[tuple[str, str], list[MultivariateSample]] = {}
        for sample in test:
            predicted = classifier.evaluate(sample).argmax_class()
            if sample.label is not None and predicted != sample.label:
                cohorts.setdefault((sample.label, predicted), []).append(sample)

        cohort_reports = []
        for (true_class, predicted_class), members in sorted(cohorts.items()):
            ratios = []
            for sample in members[: limit if limit else None]:
                outcome = explain(sample, true_class, classifier, indexes, config)
                distractor_id = outcome.explanation.distractor_id
                if distractor_id == sample.sample_id:  # empty-mask fast path
                    distractor = sample
                else:
                    distractor = indexes[true_class].sample_by_id(distractor_id)
                ratio = generalizability(
                    outcome.explanation, distractor, members, classifier, true_class
                )
                ratios.append({"sample_id": sample.sample_id, "flip_ratio": ratio})
            cohort_reports.append(
                {
                    "true_class": true_class,
                    "predicted_class": predicted_class,
                    "cohort_size": len(members),
                    "per_explanation": ratios,
                    "mean_flip_ratio": float(np.mean([r["flip_ratio"] for r in ratios])),
                }
            )

    payload = {"method": config.method, "cohorts": cohort_reports}
    write_report(payload, out_path)
    click.echo(f"generalizability over {len(cohort_reports)} cohorts -> {out_path}")


@evaluate.command("comprehensibility")
@click.option("--explanation", "explanation_paths", multiple=True, required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@handles_errors
def evaluate_comprehensibility(explanation_paths, out_path):
    """Explanation sizes (number of substituted time series)."""
    entries = []
    for path in explanation_paths:
        explanation, _ = load_explanation(path)
        entries.append({"path": path, "size": comprehensibility(explanation)})
    payload = {
        "per_explanation": entries,
        "mean_size": float(np.mean([e["size"] for e in entries])),
    }
    write_report(payload, out_path)
    click.echo(f"comprehensibility of {len(entries)} explanation(s) -> {out_path}")


@main.command("plot-data")
@click.option("--explanation", "explanation_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@handles_errors
def plot_data(explanation_path, out_path):
    """Flatten an explanation into CSV rows for external plotting."""
    explanation, _ = load_explanation(explanation_path)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "timestep", "test_value", "distractor_value"])
        for name, test_row, dist_row in explanation.substituted_metrics:
            for step, (test_value, dist_value) in enumerate(zip(test_row, dist_row)):
                writer.writerow([name, step, repr(float(test_value)), repr(float(dist_value))])
    click.echo(f"wrote plot data for {len(explanation.substituted_metrics)} metric(s) to {out_path}")


if __name__ == "__main__":
    main()

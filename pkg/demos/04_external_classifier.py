"""Explaining a classifier that lives in another process.

Any program that answers newline-delimited JSON on stdin/stdout can be
explained: a handshake request declares its classes, then each predict request
carries a batch of samples and returns one probability row per sample. This
demo prefers the tree-ensemble adapter under adapter/ when it has been built,
and otherwise falls back to the tiny stub that ships with the test suite.
"""
import sys
from pathlib import Path

from comte import (
    ClassRecipe,
    GeneratorSpec,
    SearchConfig,
    Signal,
    build_index,
    explain,
    external_classifier,
    fit_normalization,
    generate_files,
    normalize_dataset,
)

REPO = Path(__file__).resolve().parent.parent
ADAPTER = REPO / "adapter" / "dist" / "serve.js"
STUB = REPO / "tests" / "stub_classifier.py"

workdir = Path(__file__).resolve().parent / "_scratch"
workdir.mkdir(exist_ok=True)
# Metric 0 carries a level shift so even the fallback stub (which looks only
# at the first metric's mean) separates the classes.
spec = GeneratorSpec(
    num_metrics=10, length=16,
    classes=(
        ClassRecipe(name="normal"),
        ClassRecipe(name="anomaly", signals=(
            Signal(metric=0, kind="level", magnitude=1.0),
            Signal(metric=4, kind="trend", magnitude=1.0),
            Signal(metric=7, kind="spikes", magnitude=1.0),
        )),
    ),
    noise_scale=0.0, sample_count=40, seed=17,
)
dataset_path = workdir / "train.ndjson"
dataset, manifest = generate_files(spec, dataset_path, workdir / "manifest.json")
params = fit_normalization(dataset)
normalized = normalize_dataset(params, dataset)

if ADAPTER.exists():
    command = ["node", str(ADAPTER), "--dataset", str(dataset_path), "--trees", "32", "--seed", "5"]
    print("using the tree-ensemble adapter:", " ".join(command))
else:
    command = [sys.executable, str(STUB), "--mode", "first-mean", "--classes", "normal,anomaly"]
    print("adapter not built; using the protocol stub:", " ".join(command))

with external_classifier(command, dataset.schema) as classifier:
    print("handshake returned classes:", classifier.class_names)

    indexes = build_index(list(normalized), classifier)
    print("distractor index sizes:", {c: len(ix) for c, ix in indexes.items()})

    x_test = next(s for s in normalized if s.label == "normal")
    config = SearchConfig(method="greedy", rng_seed=11)
    outcome = explain(x_test, "anomaly", classifier, indexes, config, params=params)
    e = outcome.explanation
    print(f"\nexplained {x_test.sample_id} -> anomaly via {e.distractor_id}: "
          f"substitute {list(e.metric_names)} "
          f"(probability {e.achieved_probability:.4f}, {outcome.evaluations} wire calls)")
    print("generative signal metrics were:", manifest["signal_metrics"])

"""JSON interchange: explanation reports and built-in model files.

Floats are emitted with Python's shortest round-trip representation, so parsing
a report back yields bit-identical values; a serialized search outcome is also
byte-stable across runs for byte-for-byte reproducibility checks.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classifiers import (
    LogisticClassifier,
    LogisticModel,
    SetCoverClassifier,
    SetCoverForest,
    feature_names_for,
)
from .core import Explanation, MetricSchema, SubstitutionMask
from .search import SearchConfig, SearchOutcome


def config_to_dict(config: SearchConfig) -> dict:
    return {
        "target_prob": config.target_prob,
        "desired_size": config.desired_size,
        "sparsity_weight": config.sparsity_weight,
        "num_distractors": config.num_distractors,
        "rng_seed": config.rng_seed,
        "num_restarts": config.num_restarts,
        "max_attempts": config.max_attempts,
        "max_iters": config.max_iters,
        "method": config.method,
    }


def outcome_to_dict(
    outcome: SearchOutcome,
    sample_id: str,
    metric_names: tuple[str, ...],
    config: SearchConfig | None = None,
) -> dict:
    explanation = outcome.explanation
    payload = {
        "sample_id": sample_id,
        "target_class": explanation.target_class,
        "distractor_id": explanation.distractor_id,
        "achieved_probability": explanation.achieved_probability,
        "mask": {
            "metric_names": list(metric_names),
            "bits": [int(b) for b in explanation.mask.bits],
        },
        "substitutions": [
            {
                "metric": name,
                "test_values": test_row.tolist(),
                "distractor_values": dist_row.tolist(),
            }
            for name, test_row, dist_row in explanation.substituted_metrics
        ],
        "search": {
            "method": outcome.method,
            "loss": outcome.loss,
            "evaluations": outcome.evaluations,
            "distractors_tried": outcome.distractors_tried,
        },
    }
    if config is not None:
        payload["search"]["config"] = config_to_dict(config)
    return payload


def dumps_report(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def write_report(payload: dict, path: str | Path) -> None:
    Path(path).write_text(dumps_report(payload), encoding="utf-8")


def explanation_from_dict(payload: dict) -> Explanation:
    mask = SubstitutionMask(tuple(bool(b) for b in payload["mask"]["bits"]))
    triples = tuple(
        (
            sub["metric"],
            np.array(sub["test_values"], dtype=np.float64),
            np.array(sub["distractor_values"], dtype=np.float64),
        )
        for sub in payload["substitutions"]
    )
    return Explanation(
        mask=mask,
        distractor_id=payload["distractor_id"],
        target_class=payload["target_class"],
        achieved_probability=float(payload["achieved_probability"]),
        substituted_metrics=triples,
    )


def load_explanation(path: str | Path) -> tuple[Explanation, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return explanation_from_dict(payload), payload


def save_logistic_model(model: LogisticModel, path: str | Path) -> None:
    payload = {
        "kind": "logistic",
        "class_names": list(model.class_names),
        "feature_names": list(model.feature_names),
        "weights": model.weights.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_logistic_model(path: str | Path) -> LogisticModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("kind") != "logistic":
        raise ValueError(f"{path}: not a logistic model file")
    return LogisticModel(
        weights=np.array(payload["weights"], dtype=np.float64),
        class_names=tuple(payload["class_names"]),
        feature_names=tuple(payload["feature_names"]),
    )


def save_setcover_forest(forest: SetCoverForest, path: str | Path) -> None:
    payload = {
        "kind": "setcover",
        "universe_size": forest.universe_size,
        "sets": [sorted(s) for s in forest.sets],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_builtin_classifier(path: str | Path, schema: MetricSchema):
    """Load a model file as a ClassifierHandle; dispatches on its "kind"."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = payload.get("kind")
    if kind == "logistic":
        model = LogisticModel(
            weights=np.array(payload["weights"], dtype=np.float64),
            class_names=tuple(payload["class_names"]),
            feature_names=tuple(payload["feature_names"]),
        )
        if model.feature_names != feature_names_for(schema):
            raise ValueError(f"{path}: model features do not match the dataset schema")
        return LogisticClassifier(model, schema)
    if kind == "setcover":
        forest = SetCoverForest(
            universe_size=int(payload["universe_size"]),
            sets=tuple(frozenset(s) for s in payload["sets"]),
        )
        return SetCoverClassifier(forest)
    raise ValueError(f"{path}: unknown model kind {kind!r}")

"""Dataset files and the min-max normalization protocol.

Datasets are newline-delimited JSON: one record per sample with a string id, a
label, and a map from metric name to its series. Normalization maps every
metric into [0, 1] using the training set's per-metric min and max; the same
parameters are reused verbatim for test data (values outside the training range
deliberately land outside [0, 1] rather than being clamped, so distribution
shift stays visible). Explanations shown to users are converted back to
original units with the inverse map.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import MetricSchema, MultivariateSample
from .errors import DatasetFormatError, SchemaMismatchError


@dataclass(frozen=True)
class Dataset:
    schema: MetricSchema
    samples: tuple[MultivariateSample, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        seen = set()
        for s in self.samples:
            if s.schema.names != self.schema.names or s.schema.length != self.schema.length:
                raise SchemaMismatchError(f"sample {s.sample_id!r} does not match dataset schema")
            if s.sample_id in seen:
                raise DatasetFormatError(f"duplicate sample id {s.sample_id!r}")
            seen.add(s.sample_id)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[MultivariateSample]:
        return iter(self.samples)

    def sample(self, sample_id: str) -> MultivariateSample:
        for s in self.samples:
            if s.sample_id == sample_id:
                return s
        raise KeyError(f"no sample with id {sample_id!r}")

    def labels(self) -> tuple[str, ...]:
        return tuple(sorted({s.label for s in self.samples if s.label is not None}))


def load_dataset(path: str | Path) -> Dataset:
    """Parse a newline-delimited JSON dataset file.

    The first record fixes the metric order and series length; every later
    record must carry exactly the same metric names and length.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append((lineno, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    if not records:
        raise DatasetFormatError(f"{path}: empty dataset")

    first = records[0][1]
    try:
        names = tuple(first["metrics"].keys())
        length = len(next(iter(first["metrics"].values())))
    except (KeyError, StopIteration, AttributeError) as exc:
        raise DatasetFormatError(f"{path}:1: record missing a usable 'metrics' map") from exc
    schema = MetricSchema(names=names, length=length)

    samples = []
    for lineno, rec in records:
        try:
            sample_id = rec["sample_id"]
            label = rec.get("label")
            metrics = rec["metrics"]
        except (KeyError, TypeError) as exc:
            raise DatasetFormatError(f"{path}:{lineno}: malformed record") from exc
        if set(metrics.keys()) != set(names):
            raise DatasetFormatError(
                f"{path}:{lineno}: metric names differ from the first record"
            )
        rows = []
        for name in names:
            row = metrics[name]
            if len(row) != length:
                raise DatasetFormatError(
                    f"{path}:{lineno}: metric {name!r} has length {len(row)}, expected {length}"
                )
            rows.append(row)
        try:
            samples.append(
                MultivariateSample(
                    schema=schema,
                    values=np.array(rows, dtype=np.float64),
                    sample_id=str(sample_id),
                    label=None if label is None else str(label),
                )
            )
        except ValueError as exc:
            raise DatasetFormatError(f"{path}:{lineno}: {exc}") from exc
    return Dataset(schema=schema, samples=tuple(samples))


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in dataset.samples:
            record = {
                "sample_id": s.sample_id,
                "label": s.label,
                "metrics": {
                    name: s.values[i].tolist() for i, name in enumerate(dataset.schema.names)
                },
            }
            fh.write(json.dumps(record) + "\n")


@dataclass(frozen=True)
class NormalizationParams:
    """Per-metric training-set min and max defining the affine map into [0, 1]."""

    metric_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64).copy()
        maxs = np.asarray(self.maxs, dtype=np.float64).copy()
        mins.setflags(write=False)
        maxs.setflags(write=False)
        object.__setattr__(self, "metric_names", tuple(self.metric_names))
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        if mins.shape != (len(self.metric_names),) or maxs.shape != mins.shape:
            raise ValueError("one (min, max) pair per metric required")
        if np.any(mins > maxs):
            raise ValueError("per-metric min must not exceed max")

    def _check_schema(self, sample: MultivariateSample) -> None:
        if sample.schema.names != self.metric_names:
            raise SchemaMismatchError(
                "sample metrics do not match the normalization parameters"
            )

    def apply(self, sample: MultivariateSample) -> MultivariateSample:
        """Map into training-range units; constant metrics map to 0 everywhere."""
        self._check_schema(sample)
        span = (self.maxs - self.mins)[:, None]
        shifted = sample.values - self.mins[:, None]
        normalized = np.divide(
            shifted, span, out=np.zeros_like(shifted), where=span > 0
        )
        return MultivariateSample(
            schema=sample.schema, values=normalized,
            sample_id=sample.sample_id, label=sample.label,
        )

    def invert(self, sample: MultivariateSample) -> MultivariateSample:
        """Back to original units; constant metrics come back as their stored min."""
        self._check_schema(sample)
        span = (self.maxs - self.mins)[:, None]
        restored = np.where(span > 0, sample.values * span + self.mins[:, None],
                            self.mins[:, None])
        return MultivariateSample(
            schema=sample.schema, values=restored,
            sample_id=sample.sample_id, label=sample.label,
        )


def fit_normalization(training: Dataset | Sequence[MultivariateSample]) -> NormalizationParams:
    """Per-metric min and max over every training sample and timestep."""
    samples = tuple(training.samples if isinstance(training, Dataset) else training)
    if not samples:
        raise ValueError("cannot fit normalization on an empty training set")
    stack = np.stack([s.values for s in samples])  # (n, m, t)
    return NormalizationParams(
        metric_names=samples[0].schema.names,
        mins=stack.min(axis=(0, 2)),
        maxs=stack.max(axis=(0, 2)),
    )


def apply_normalization(params: NormalizationParams, sample: MultivariateSample) -> MultivariateSample:
    return params.apply(sample)


def invert_normalization(params: NormalizationParams, sample: MultivariateSample) -> MultivariateSample:
    return params.invert(sample)


def normalize_dataset(params: NormalizationParams, dataset: Dataset) -> Dataset:
    return Dataset(
        schema=dataset.schema,
        samples=tuple(params.apply(s) for s in dataset.samples),
    )


def save_normalization(params: NormalizationParams, path: str | Path) -> None:
    payload = {
        "metric_names": list(params.metric_names),
        "min": params.mins.tolist(),
        "max": params.maxs.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_normalization(path: str | Path) -> NormalizationParams:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return NormalizationParams(
        metric_names=tuple(payload["metric_names"]),
        mins=np.array(payload["min"], dtype=np.float64),
        maxs=np.array(payload["max"], dtype=np.float64),
    )

"""Subprocess classifier client: newline-delimited JSON over stdin/stdout.

Any process that answers this protocol can serve as a black-box classifier:

    -> {"id": 0, "op": "handshake"}
    <- {"id": 0, "class_names": ["healthy", "anomalous"]}
    -> {"id": 1, "op": "predict", "metric_names": ["m0", ...],
        "samples": [[[...metric 0 series...], ...], ...]}
    <- {"id": 1, "probabilities": [[0.2, 0.8], ...],
        "class_names": ["healthy", "anomalous"]}

One JSON object per line in each direction; a response's id must echo its
request's. Servers report failures as {"id": ..., "error": {"code", "message"}}
instead of crashing. Samples travel in the orientation the classifier was
trained on (for the built-in pipeline: normalized units, metric-major).

Probability rows whose sum strays from 1 by at most 1e-6 are renormalized to
tolerate float transport; anything worse is treated as a broken classifier.
"""
from __future__ import annotations

import json
import shlex
import subprocess
import threading
from typing import Sequence

from .classifiers import ClassifierHandle
from .core import ClassProbabilities, MetricSchema, MultivariateSample
from .errors import ExternalClassifierError

_SUM_TOLERANCE = 1e-6


def validate_probability_row(row: Sequence[float], num_classes: int, payload=None) -> tuple[float, ...]:
    """Check and renormalize one row of transported probabilities."""
    if len(row) != num_classes:
        raise ExternalClassifierError(
            "invalid-probabilities",
            f"expected {num_classes} probabilities per row, got {len(row)}",
            payload,
        )
    values = [float(p) for p in row]
    if any(p != p or p < 0.0 for p in values):  # p != p catches NaN
        raise ExternalClassifierError(
            "invalid-probabilities", f"negative or NaN probability in {values}", payload
        )
    total = sum(values)
    if abs(total - 1.0) > _SUM_TOLERANCE:
        raise ExternalClassifierError(
            "invalid-probabilities", f"probabilities sum to {total!r}", payload
        )
    return tuple(p / total for p in values)


class ExternalClassifier(ClassifierHandle):
    """ClassifierHandle backed by a child process speaking the wire protocol.

    Requests are serialized through a lock, so a handle is safe to share but
    never issues concurrent requests. Handles have an open child process; use
    as a context manager or call close().
    """

    def __init__(self, command: str | Sequence[str], schema: MetricSchema):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._schema = schema
        self._lock = threading.Lock()
        self._next_id = 0
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        response = self._request({"op": "handshake"})
        names = response.get("class_names")
        if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
            raise ExternalClassifierError(
                "bad-handshake", "handshake response lacks class_names", response
            )
        self._class_names = tuple(names)

    @property
    def class_names(self) -> tuple[str, ...]:
        return self._class_names

    def _request(self, body: dict) -> dict:
        with self._lock:
            request_id = self._next_id
            self._next_id += 1
            message = dict(body, id=request_id)
            if self._proc.poll() is not None:
                raise ExternalClassifierError(
                    "process-exit", f"classifier process exited with {self._proc.returncode}"
                )
            try:
                self._proc.stdin.write(json.dumps(message) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ExternalClassifierError("process-exit", f"write failed: {exc}") from exc
            line = self._proc.stdout.readline()
        if line == "":
            raise ExternalClassifierError(
                "process-exit", "classifier process closed its stdout"
            )
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExternalClassifierError(
                "malformed-json", f"unparseable response line: {exc}", line
            ) from exc
        if not isinstance(response, dict):
            raise ExternalClassifierError("malformed-json", "response is not an object", line)
        if response.get("id") != request_id:
            raise ExternalClassifierError(
                "id-mismatch",
                f"response id {response.get('id')!r} does not match request id {request_id}",
                response,
            )
        if "error" in response:
            raise ExternalClassifierError(
                "remote-error", f"classifier reported: {response['error']}", response
            )
        return response

    def evaluate(self, sample: MultivariateSample) -> ClassProbabilities:
        return self.evaluate_batch([sample])[0]

    def evaluate_batch(self, samples: Sequence[MultivariateSample]) -> list[ClassProbabilities]:
        if not samples:
            return []
        response = self._request(
            {
                "op": "predict",
                "metric_names": list(self._schema.names),
                "samples": [s.values.tolist() for s in samples],
            }
        )
        rows = response.get("probabilities")
        if not isinstance(rows, list) or len(rows) != len(samples):
            raise ExternalClassifierError(
                "invalid-probabilities",
                f"expected {len(samples)} probability rows, got "
                f"{len(rows) if isinstance(rows, list) else type(rows).__name__}",
                response,
            )
        return [
            ClassProbabilities(
                per_class=validate_probability_row(row, len(self._class_names), response),
                class_names=self._class_names,
            )
            for row in rows
        ]

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalClassifier":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def external_classifier(command: str | Sequence[str], schema: MetricSchema) -> ExternalClassifier:
    """Spawn the command and complete the handshake."""
    return ExternalClassifier(command, schema)

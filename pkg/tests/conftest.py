import sys
from pathlib import Path

import numpy as np
import pytest

from comte.classifiers import SetCoverClassifier, SetCoverForest
from comte.core import MetricSchema, MultivariateSample

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_sample(schema, values, sample_id="s", label=None):
    return MultivariateSample(
        schema=schema, values=np.asarray(values, dtype=np.float64),
        sample_id=sample_id, label=label,
    )


def binary_sample(forest: SetCoverForest, bits, sample_id="s", label=None):
    values = np.array([[1.0] if b else [0.0] for b in bits])
    return make_sample(forest.schema(), values, sample_id=sample_id, label=label)


@pytest.fixture
def small_schema():
    return MetricSchema(names=("cpu", "mem", "net"), length=4)


@pytest.fixture
def chain_forest():
    """Sets {0,1} and {1,2}: element 1 alone hits both."""
    return SetCoverForest(universe_size=3, sets=(frozenset({0, 1}), frozenset({1, 2})))


@pytest.fixture
def chain_classifier(chain_forest):
    return SetCoverClassifier(chain_forest)


def random_forest_instance(rng, max_universe=12, max_sets=6) -> SetCoverForest:
    m = int(rng.integers(2, max_universe + 1))
    n_sets = int(rng.integers(1, max_sets + 1))
    sets = []
    for _ in range(n_sets):
        size = int(rng.integers(1, m + 1))
        members = rng.choice(m, size=size, replace=False)
        sets.append(frozenset(int(j) for j in members))
    return SetCoverForest(universe_size=m, sets=tuple(sets))

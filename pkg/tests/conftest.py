"""Shared fixtures: small hand-checkable corpora and random generators."""

from __future__ import annotations

import numpy as np
import pytest

from ina import CorpusExample, ModelConfig, train
from ina.errors import DegenerateCorpus, NoPositiveWeight

FOUR_DOC = [
    ("wheel steering", "car"),
    ("wheel fast", "car"),
    ("dipper bucket", "excavator"),
    ("bucket arm", "excavator"),
]

# Two classes that tie exactly on the query "alpha beta" plus an anchor
# class so the model has a positive top weight.
TIE_DOC = [
    ("alpha beta gamma", "tie_a"),
    ("alpha beta delta", "tie_b"),
    ("omega psi", "other"),
]

_WORDS = [
    "amber", "basalt", "cedar", "delta", "ember", "fjord",
    "gneiss", "heron", "iris", "jasper", "krill", "lumen",
]


@pytest.fixture(scope="session")
def four_doc_examples():
    return [CorpusExample(q, c) for q, c in FOUR_DOC]


@pytest.fixture(scope="session")
def four_doc_model(four_doc_examples):
    return train(four_doc_examples)


@pytest.fixture(scope="session")
def tie_model():
    examples = [CorpusExample(q, c) for q, c in TIE_DOC]
    return train(examples, ModelConfig(threshold=0.35))


def random_corpus(rng: np.random.Generator, max_docs: int = 20, max_classes: int = 5):
    """A random small corpus; may be degenerate or uninformative."""
    n_docs = int(rng.integers(2, max_docs + 1))
    n_classes = int(rng.integers(2, max_classes + 1))
    labels = [f"label{i}" for i in range(n_classes)]
    examples = []
    for _ in range(n_docs):
        length = int(rng.integers(1, 7))
        words = [str(rng.choice(_WORDS)) for _ in range(length)]
        examples.append(CorpusExample(" ".join(words), str(rng.choice(labels))))
    return examples


def random_trained_model(rng: np.random.Generator, **config_kwargs):
    """Train on random corpora until one is trainable."""
    while True:
        try:
            return train(random_corpus(rng), ModelConfig(**config_kwargs))
        except (DegenerateCorpus, NoPositiveWeight):
            continue


@pytest.fixture
def make_random_corpus():
    return random_corpus


@pytest.fixture
def make_random_model():
    return random_trained_model

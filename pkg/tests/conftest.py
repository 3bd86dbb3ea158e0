"""Shared fixtures.

The toy lexicon is built two ways on purpose: once from the frozen boolean
matrix in oracles.py and once through the regex-matching route inside the
toy bundle.  test_rsa asserts the two agree, so every downstream test that
uses `toy_lex` is anchored to hand-checked consistency judgments.
"""

import numpy as np
import pytest

from pragrank import Lexicon
from pragrank.bundles import get_bundle

from .oracles import TOY_HYPOTHESES, TOY_MATRIX, TOY_UTTERANCES


@pytest.fixture(scope="session")
def toy_lex() -> Lexicon:
    return Lexicon(TOY_UTTERANCES, TOY_HYPOTHESES, TOY_MATRIX.copy())


@pytest.fixture(scope="session")
def toy_bundle():
    return get_bundle("toy")


@pytest.fixture(scope="session")
def regex_small_bundle():
    return get_bundle("regex-small")


@pytest.fixture(scope="session")
def regex_large_bundle():
    return get_bundle("regex-large")


@pytest.fixture(scope="session")
def animals_bundle():
    return get_bundle("animals")


def random_lexicon_matrix(rng: np.random.Generator, m: int, n: int, p_true: float = 0.5) -> np.ndarray:
    """Rejection-sample a boolean matrix with no empty row or column."""
    while True:
        mat = rng.random((m, n)) < p_true
        if mat.any(axis=0).all() and mat.any(axis=1).all():
            return mat

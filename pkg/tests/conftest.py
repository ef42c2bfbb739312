"""Shared fixtures: the constructed instances used across the suite."""

import numpy as np
import pytest

from analysis import ababc_vocab, abbc_model, abb_vocab
from lattice import build_lattice


@pytest.fixture
def bpe_abbc():
    return abbc_model()


@pytest.fixture
def vocab_abb():
    return abb_vocab()


@pytest.fixture
def vocab_ababc():
    return ababc_vocab()


@pytest.fixture
def lattice_ababc(vocab_ababc):
    return build_lattice("ababc", vocab_ababc)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

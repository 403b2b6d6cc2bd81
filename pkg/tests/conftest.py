import os

import numpy as np
import pytest

from moritacp.algebra import Algebra
from moritacp.generate import random_bimodule, random_cp_map, random_module, random_representation
from moritacp.hilbmod import free_module

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def small_algebra(rng, max_dim=3):
    while True:
        k = int(rng.integers(1, 3))
        alg = Algebra(rng.integers(1, 3, size=k).tolist())
        if alg.d <= max_dim:
            return alg


def random_cp_instance(seed):
    """``(psi, Y)`` with ``psi: D -> B_B(F)`` and ``Y`` a ``C``-``D`` bimodule."""
    rng = np.random.default_rng(seed)
    B, D = small_algebra(rng), small_algebra(rng)
    F = random_module(rng, B, max_n=1)
    psi = random_cp_map(rng, D, F, max_mult=1)
    Y = random_bimodule(rng, D, max_n=1)
    return psi, Y


def random_rep_instance(seed):
    """A representation ``(pi, E)`` of ``D`` over ``B`` and a ``C``-``D`` bimodule."""
    rng = np.random.default_rng(seed)
    B, D = small_algebra(rng), small_algebra(rng)
    rep = random_representation(rng, D, B, max_mult=1)
    Y = random_bimodule(rng, D, max_n=1)
    return rep, Y


def right_bimodule(rng, B):
    """Random ``B``-``A`` bimodule."""
    A = Algebra([int(rng.integers(1, 3)) for _ in B.block_dims])
    return random_bimodule(rng, A, left_dims=list(B.block_dims))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def C1():
    return Algebra([1])


@pytest.fixture
def M2():
    return Algebra([2])


@pytest.fixture
def line(C1):
    return free_module(C1, 1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])

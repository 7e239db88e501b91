import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from frpca.sparse import SparseMatrixCSR
from frpca.synthetic import random_sparse

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def diag5():
    return SparseMatrixCSR.from_dense(np.diag([5.0, 4.0, 3.0, 2.0, 1.0]))


@pytest.fixture
def wide_sparse():
    return random_sparse(80, 120, 12, seed=7)


@pytest.fixture
def tall_sparse():
    return random_sparse(120, 80, 8, seed=8)

import numpy as np
import pytest

from qtraj_witness.numerics import RngStream

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return RngStream(20110101, 0)


@pytest.fixture
def nprng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_hermitian(gen, d):
    a = gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))
    return a + a.conj().T


def random_ket(gen, d):
    z = gen.standard_normal(d) + 1j * gen.standard_normal(d)
    return z / np.linalg.norm(z)

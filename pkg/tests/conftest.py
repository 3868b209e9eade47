import numpy as np
import pytest

from bdssd.specfile import load_fixture


@pytest.fixture
def e2():
    return load_fixture("e2")


@pytest.fixture
def e2c():
    return load_fixture("e2c")


@pytest.fixture
def e2c_abs():
    return load_fixture("e2c-absorbing")


@pytest.fixture
def cex():
    return load_fixture("cex")


@pytest.fixture
def d1():
    return load_fixture("d1")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def power_iteration_stationary(P, iters=200_000, tol=1e-15):
    """Left Perron vector of a stochastic matrix by plain power iteration."""
    P = np.asarray(P, dtype=float)
    v = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(iters):
        w = v @ P
        if np.abs(w - v).sum() < tol:
            return w
        v = w
    return v


ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

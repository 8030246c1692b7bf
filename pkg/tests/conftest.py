import numpy as np
import pytest

from dqlyap.sylvester import SylvesterProblem

ACCEPTANCE_LINES = []


def shifted_random(rng, n):
    """Random n x n matrix with every eigenvalue in the right half plane."""
    a = rng.standard_normal((n, n))
    return a + (2.0 * np.sqrt(n) + 1.0) * np.eye(n)


def random_problem(rng, n, m):
    return SylvesterProblem(shifted_random(rng, n), shifted_random(rng, m),
                            rng.standard_normal((n, m)))


def kron_oracle(g, r, q):
    """Column-stacked Kronecker solve with numpy's own kron and LAPACK."""
    n, m = q.shape
    system = np.kron(np.eye(m), g) + np.kron(r.T, np.eye(n))
    return np.linalg.solve(system, q.reshape(-1, order="F")).reshape(n, m, order="F")


def centro_random(rng, n):
    a = rng.standard_normal((n, n))
    return a + a[::-1, ::-1]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

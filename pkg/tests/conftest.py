import numpy as np
import pytest

from qtomo.qcore import coeffs_to_density

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_bloch(rng, n=None, radius=1.0):
    """Uniform points inside the Bloch ball, as length-4 coefficient vectors."""
    shape = (n, 3) if n else (3,)
    x = rng.normal(size=shape)
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    r = radius * rng.uniform(size=shape[:-1] + (1,)) ** (1 / 3)
    ones = np.ones(shape[:-1] + (1,))
    return np.concatenate([ones, r * x], axis=-1)


def random_density(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from gppf.gp import KernelHyperparams, TrainingSet, log_marginal_likelihood


def random_fixture(rng, n=None, noise=None):
    """Random planar training set with moderate hyperparameters."""
    n = int(rng.integers(3, 16)) if n is None else n
    x = rng.uniform(-1.5, 1.5, size=(n, 2))
    y = np.sin(2 * x[:, 0]) + x[:, 1] ** 2 + 0.05 * rng.standard_normal(n)
    hp = KernelHyperparams(
        lengthscale=float(rng.uniform(0.3, 2.0)),
        signal_variance=float(rng.uniform(0.5, 2.0)),
        noise_variance=float(rng.uniform(1e-3, 0.1)) if noise is None else noise,
    )
    return TrainingSet(x, y), hp


def dense_posterior(x, y, hp, q):
    """Textbook GP posterior by dense solves, no Cholesky."""
    def k(a, b):
        d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)
        return hp.signal_variance * np.exp(-0.5 * d2 / hp.lengthscale ** 2)
    A = k(x, x) + hp.noise_variance * np.eye(len(x))
    Ks = k(q, x)
    mean = Ks @ np.linalg.solve(A, y)
    var = hp.signal_variance - np.einsum("ij,ji->i", Ks, np.linalg.solve(A, Ks.T))
    return mean, var


def fd_gradient(train, hp, h=1e-5):
    """Central differences of the log marginal likelihood in log-parameter space."""
    theta = hp.to_log()
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        up = log_marginal_likelihood(train, KernelHyperparams.from_log(theta + e))
        dn = log_marginal_likelihood(train, KernelHyperparams.from_log(theta - e))
        g[i] = (up - dn) / (2 * h)
    return g


# one line per acceptance criterion, shown after the test run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

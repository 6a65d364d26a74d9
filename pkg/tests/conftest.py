import numpy as np
import pytest

from sccasupp import build_model, make_rank1_model


def random_spd(rng, dim, lo=0.5, hi=2.0):
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return (Q * rng.uniform(lo, hi, dim)) @ Q.T


def random_model(rng, p=None, q=None, r=None):
    """A valid model with eigenvalues in [0.5, 2], B = 4 and well separated correlations."""
    p = p or int(rng.integers(3, 31))
    q = q or int(rng.integers(3, 31))
    r = r or int(rng.integers(1, min(3, p, q) + 1))
    U_raw = rng.standard_normal((p, r)) * (rng.random((p, r)) < 0.5)
    V_raw = rng.standard_normal((q, r)) * (rng.random((q, r)) < 0.5)
    # a planted r×r identity on distinct rows keeps full column rank
    U_raw[rng.choice(p, r, replace=False), range(r)] += 2.0
    V_raw[rng.choice(q, r, replace=False), range(r)] += 2.0
    lam = np.array([0.9, 0.6, 0.3])[:r]
    return build_model(random_spd(rng, p), random_spd(rng, q), U_raw, V_raw, lam, 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def rank1_identity():
    return make_rank1_model(50, 50, 3, 0.5, "identity")


@pytest.fixture(scope="session")
def model_p3():
    """Fixed p = q = 3, rank-two model with correlated blocks."""
    sx = np.array([[1.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 1.0]])
    sy = np.array([[1.0, -0.2, 0.1], [-0.2, 1.0, 0.0], [0.1, 0.0, 1.0]])
    U = np.array([[1.0, 0.0], [0.5, 1.0], [0.0, 0.3]])
    V = np.array([[0.0, 1.0], [1.0, 0.0], [0.4, 0.2]])
    return build_model(sx, sy, U, V, [0.6, 0.3], 4.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

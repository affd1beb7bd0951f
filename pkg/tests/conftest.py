import numpy as np
import pytest

from dcclab import DccParams, DgpSpec, GarchParams, simulate_garch_dcc


def assert_valid_correlation_path(path):
    """Invariants every correlation path must satisfy.

    Unit diagonal exactly 1.0 (not within tolerance), off-diagonals in
    [-1, 1], and every matrix admits a Cholesky factorization.
    """
    mats = path.matrices
    n = mats.shape[1]
    diag = mats[:, np.arange(n), np.arange(n)]
    assert np.all(diag == 1.0), "diagonal must be exactly 1.0"
    assert np.all(np.abs(mats) <= 1.0), "correlations must lie in [-1, 1]"
    np.linalg.cholesky(mats)  # raises LinAlgError if any matrix is not PD


def make_qbar(n: int, rho: float = 0.3) -> np.ndarray:
    q = np.full((n, n), rho)
    np.fill_diagonal(q, 1.0)
    return q


@pytest.fixture(scope="session")
def small_panel():
    """N=4 simulated panel, short enough for fast end-to-end tests."""
    spec = DgpSpec(
        garch_params=[GarchParams(omega=0.1, a=0.1, b=0.8) for _ in range(4)],
        dcc_params=DccParams(alphas=[0.20, 0.25, 0.30, 0.10], beta=0.85, q_bar=make_qbar(4)),
        n_obs=600,
        seed=42,
    )
    return simulate_garch_dcc(spec)


@pytest.fixture(scope="session")
def recovery_panel():
    """Longer panel used for single-seed parameter recovery checks."""
    spec = DgpSpec(
        garch_params=[GarchParams(omega=0.1, a=0.1, b=0.8) for _ in range(4)],
        dcc_params=DccParams(alphas=[0.20, 0.25, 0.30, 0.10], beta=0.85, q_bar=make_qbar(4)),
        n_obs=3000,
        seed=0,
    )
    return simulate_garch_dcc(spec)

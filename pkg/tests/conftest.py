import math

import numpy as np
import pytest

from circgate.error_model import GateParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ideal_params():
    """No decay, B and omega_10 five orders above Omega."""
    return GateParams(omega=1.0, omega_10=1e5, blockade_B=1e5, tau=math.inf)


@pytest.fixture
def fast_params():
    """Small dimensionless rates that RK4 can resolve in a few thousand steps."""
    return GateParams(omega=1.0, omega_10=10.0, blockade_B=20.0, tau=100.0)


@pytest.fixture
def cz_unitary():
    return np.diag([1.0, -1.0, -1.0, -1.0]).astype(complex)


@pytest.fixture
def random_state(rng):
    def make(dim=4, rank=None):
        rank = rank or dim
        A = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
        rho = A @ A.conj().T
        return rho / np.trace(rho).real

    return make

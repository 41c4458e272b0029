import numpy as np
import pytest

from wulff_lab import angle_grid, elliptic_norm, euclidean_norm, lp_norm


@pytest.fixture(scope="session")
def euclid():
    return euclidean_norm()


@pytest.fixture(scope="session")
def elliptic12():
    # F(x, y) = sqrt(x^2 + y^2/4), polar sqrt(x^2 + 4 y^2)
    return elliptic_norm(axes=(1.0, 2.0))


@pytest.fixture(scope="session")
def lp3():
    return lp_norm(3.0)


@pytest.fixture(scope="session")
def norms(euclid, elliptic12, lp3):
    return {"euclidean": euclid, "elliptic": elliptic12, "lp3": lp3}


@pytest.fixture(scope="session")
def grid():
    return angle_grid(1024)


@pytest.fixture(scope="session")
def grid512():
    return angle_grid(512)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)

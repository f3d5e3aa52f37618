import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from riccati_dichotomy import assemble, gen_heat1d, gen_random_stable, gen_scalar

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SQRT2 = np.sqrt(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def scalar_system():
    return gen_scalar(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def scalar_H(scalar_system):
    return assemble(scalar_system)


@pytest.fixture(scope="session")
def heat50():
    return gen_heat1d(50, 0.2, 0.2)


@pytest.fixture(scope="session")
def random8():
    return gen_random_stable(8, 2, 2, seed=7)


@pytest.fixture(autouse=True)
def _quiet_poor_margin():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="poorly angular")
        yield


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))

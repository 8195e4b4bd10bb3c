import numpy as np
import pytest

from robcov import backend


@pytest.fixture(params=backend.available_backends())
def kernels(request):
    """Run a test against every importable kernel backend."""
    return backend.get_kernels(request.param)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20260809)


def random_symmetric(rng, d, scale=1.0):
    a = rng.standard_normal((d, d)) * scale
    return 0.5 * (a + a.T)


def random_spd(rng, d, jitter=0.5):
    a = rng.standard_normal((d, d))
    return a @ a.T / d + jitter * np.eye(d)

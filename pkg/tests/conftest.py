import numpy as np
import pytest
from scipy import integrate


def quad_oracle(fn, lo, hi, points=None):
    """Independent adaptive QUADPACK value of ``int_lo^hi fn``."""
    val, _ = integrate.quad(fn, lo, hi, points=points, epsabs=0, epsrel=1e-13, limit=400)
    return val


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

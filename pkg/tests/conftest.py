import math

import numpy as np
import pytest

from dlgeo.density import DensityQuery


def scaled_to_raw(L, ell, x, s):
    """Rescaled point -> raw density arguments (kept independent of the
    package's scaling_map so tests of that map have an external check)."""
    root = math.sqrt(s * (1 - s))
    q = L ** 0.25
    L1 = s * L + root * q * ell + x * x * (1 - s) / (4 * math.sqrt(L))
    L2 = (1 - s) * L - root * q * ell + x * x * s / (4 * math.sqrt(L))
    X = x * root / q
    return DensityQuery(L1, L2, X, s)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.PCG64(20250810))


@pytest.fixture(scope="session")
def tw():
    from dlgeo.tracywidom import default_tw
    return default_tw()

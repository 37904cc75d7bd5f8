import os
import sys

os.environ.setdefault("IDLC_CHECK_CHANNELS", "1")
os.environ.setdefault("IDLC_THREADS", "2")

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np
import pytest

from codes.private_ldc import PrivateLDC, gen
from models.data_models import BitString


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_ldc():
    """k=128 in 8 blocks of 16 bits, K=512: enough room for a block attack at rho*K."""
    return PrivateLDC(128, 16, m=16)


@pytest.fixture(scope="session")
def small_key():
    return gen(16, np.random.default_rng(7))


@pytest.fixture
def message(rng, small_ldc):
    return BitString.random(small_ldc.params.k, rng)

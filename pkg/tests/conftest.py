import numpy as np
import pytest

from algebroids.symexpr import SAMPLE_SEED, ZeroTestConfig


@pytest.fixture
def rng():
    return np.random.default_rng(SAMPLE_SEED)


@pytest.fixture
def zero_cfg():
    return ZeroTestConfig()

import numpy as np
import pytest

from cdgmhd.physics import IdealGas


@pytest.fixture
def eos():
    return IdealGas()


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)

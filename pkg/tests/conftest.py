import numpy as np
import pytest

from mgt_lab import ModelParams
from mgt_lab.oracle import warm_up


@pytest.fixture(scope="session")
def params():
    return ModelParams(0.5, 1.0)


@pytest.fixture(scope="session")
def warm_oracle():
    warm_up()


@pytest.fixture
def rng():
    return np.random.default_rng(42)

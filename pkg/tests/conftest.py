import numpy as np
import pytest

from gazemetrics.config import Config


@pytest.fixture
def config() -> Config:
    return Config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)

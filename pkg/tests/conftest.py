import numpy as np
import pytest

from phononlab.config import load_config


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def device(config):
    return config.device


@pytest.fixture(scope="session")
def pulse_defaults(config):
    return config.pulses


# Two-qubit visibility matrix as printed in the experiment's calibration
# (columns sum to ~1 up to the published rounding).
PAPER_VISIBILITY = np.array([
    [0.954, 0.042, 0.027, 0.002],
    [0.022, 0.939, 0.000, 0.028],
    [0.024, 0.003, 0.955, 0.037],
    [0.001, 0.017, 0.018, 0.934],
])

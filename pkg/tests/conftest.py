import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tenstat import models


@pytest.fixture
def spine2():
    return models.spine2d(num_vertebrae=2)


@pytest.fixture
def spine5():
    return models.spine2d(num_vertebrae=5)


@pytest.fixture
def quadruped():
    return models.quadruped3d()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

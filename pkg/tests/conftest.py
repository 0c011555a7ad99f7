import numpy as np
import pytest

from cohentf import make_grid
from cohentf.verify import SEED


@pytest.fixture
def grid():
    """Default grid: n = 256, dx = 1/16, domain [-8, 8)."""
    return make_grid(256, 1.0 / 16)


@pytest.fixture
def small_grid():
    """Balanced grid for dense operators: n = 64, dx = dw = 1/8."""
    return make_grid(64, 1.0 / 8)


@pytest.fixture
def rng(request):
    # one reproducible stream per test
    return np.random.default_rng([SEED, sum(map(ord, request.node.name))])

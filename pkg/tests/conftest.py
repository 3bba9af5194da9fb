import os

import numpy as np
import pytest

os.environ.setdefault("FITZKIT_LOG_DIR", os.path.join(os.path.dirname(__file__), "..", "logs"))

from src.core.convex.functions import GridFn, GridSpec  # noqa: E402
from src.core.operators.models import FiniteOperator  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def square_grid():
    """x^2/2 + x*^2/2 on a 17 x 17 symmetric grid."""
    spec = GridSpec.symmetric(2, 2.0, 17)
    return GridFn.from_callable(spec, lambda x, xs: 0.5 * x ** 2 + 0.5 * xs ** 2)


@pytest.fixture
def diagonal_pair():
    return FiniteOperator.of([(0, 0), (1, 1)])



import numpy as np
import pytest

from mvperf.data import from_arrays
from mvperf.synthetic import GenSpec, generate


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def separable():
    return generate(GenSpec(n=60, m=2, dims=[5, 4], margin=2.0, noise=0.0, seed=0))


@pytest.fixture
def tiny():
    # two views, four points, labels (+1, +1, -1, -1)
    X1 = [[1.0, 0.0], [0.5, 1.0], [-1.0, 0.2], [0.0, -1.0]]
    X2 = [[2.0], [1.0], [-1.0], [-0.5]]
    return from_arrays([X1, X2], [1, 1, -1, -1])

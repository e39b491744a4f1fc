import numpy as np
import pytest

from polyattn.rng import SplitMix64

TREE7 = "x1*x2+x1*x3+x1*x4+x2*x5+x2*x6+x4*x7"
STRASSEN = "x1*x2+x2*x3+x3*x1"
H2 = "x1*x2+x2*x3"
CYCLE4 = "x1*x2+x2*x3+x3*x4+x4*x1"
TENSOR3 = "x1*x2*x3"


@pytest.fixture
def rng():
    return SplitMix64(12345)


def uniform(rng, shape, bound=1.0):
    return rng.uniform(-bound, bound, shape)


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))

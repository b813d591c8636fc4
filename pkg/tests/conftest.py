import numpy as np
import pytest
from hypothesis import settings

from redlift.generators import make_rng

settings.register_profile("desk", max_examples=40, deadline=None)
settings.load_profile("desk")


@pytest.fixture
def rng():
    return make_rng(20240601)


def close(a, b, tol=1e-10):
    return np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0) <= tol

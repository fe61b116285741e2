import os

import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

np.seterr(all="warn")

hypothesis.settings.register_profile("dev", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


def disk_points(radius=0.9):
    """Complex points with |z| <= radius."""
    return st.builds(lambda r, t: complex(r * np.cos(t), r * np.sin(t)),
                     st.floats(0.0, radius), st.floats(0.0, 2.0 * np.pi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def random_disk(rng):
    """n uniform random points of the disk of the given radius."""
    def sample(n, radius=0.9):
        r = radius * np.sqrt(rng.random(n))
        return r * np.exp(2j * np.pi * rng.random(n))
    return sample

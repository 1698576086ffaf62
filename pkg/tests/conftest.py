import numpy as np
import pytest

from mixguide import linear_schedule, reference_mixture_1d


@pytest.fixture(scope="session")
def ref_split():
    return reference_mixture_1d()


@pytest.fixture(scope="session")
def sched1000():
    return linear_schedule(1000)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240917)

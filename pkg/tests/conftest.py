import pytest
from hypothesis import settings

from tests.helpers import load

settings.register_profile("nc", deadline=None, max_examples=50)
settings.load_profile("nc")


@pytest.fixture(scope="session")
def poly2():
    return load("poly2.nc")


@pytest.fixture(scope="session")
def qplane2():
    return load("qplane2.nc")


@pytest.fixture(scope="session")
def qplane2_pair():
    return load("qplane2_pair.nc")


@pytest.fixture(scope="session")
def nonconfluent3():
    return load("nonconfluent3.nc")

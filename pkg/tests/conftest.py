import pytest

from magflow.fixtures import e1, e2


@pytest.fixture(scope="session")
def pair_e1():
    return e1()


@pytest.fixture(scope="session")
def pair_e2():
    return e2()

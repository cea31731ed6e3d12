import pytest

from grsol.charts import (
    desitter4,
    euclidean2,
    hyperbolic2,
    minkowski,
    polar2,
)
from grsol.geometry import Convention


@pytest.fixture(scope="session")
def ds_rev():
    """De Sitter-type chart under the reversed sign convention (the one
    whose printed component tables the golden tests assert)."""
    return desitter4(Convention.REVERSED)


@pytest.fixture(scope="session")
def ds_std():
    return desitter4(Convention.STANDARD)


@pytest.fixture(scope="session")
def mink():
    return minkowski()


@pytest.fixture(scope="session")
def polar():
    return polar2()


@pytest.fixture(scope="session")
def eucl():
    return euclidean2()


@pytest.fixture(scope="session")
def hyp():
    return hyperbolic2()

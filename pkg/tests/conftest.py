import pytest

from cauchylab.spacetime import Spacetime


@pytest.fixture(scope="session")
def st():
    return Spacetime()

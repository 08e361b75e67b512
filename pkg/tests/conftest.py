import pytest

from qdrepeater.params import default_parameters


@pytest.fixture(scope="session")
def params():
    return default_parameters()

import pytest

from ramcf.precision import working_precision
from ramcf.rational import build_params


@pytest.fixture
def mp256():
    with working_precision(256) as ctx:
        yield ctx


@pytest.fixture
def mp128():
    with working_precision(128) as ctx:
        yield ctx


@pytest.fixture(scope="session")
def default_params():
    """The default rational construction at rotation number 1/3 (a = 1),
    shared by construction tests; built once at 256 bits."""
    with working_precision(256):
        return build_params(1, 3, seed=0)

import pytest

from cvkerr.grid import fock_to_position
from cvkerr.states import FockState, GridSpec


@pytest.fixture(scope="session")
def grid():
    return GridSpec()


@pytest.fixture(scope="session")
def coh1():
    return FockState.coherent(1.0, 60)


@pytest.fixture(scope="session")
def psi1(grid, coh1):
    return fock_to_position(coh1, grid)

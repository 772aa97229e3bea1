import pytest

from latticegram import nn1d
from latticegram.lattice import build_lattice_spec, nearest_neighbor_1d


@pytest.fixture(scope="session")
def chain():
    """p = -3, s = 1: the parameters used throughout the figures."""
    return nn1d.NN1DParams(-3.0, 1.0)


@pytest.fixture(scope="session")
def chain_spec():
    return nearest_neighbor_1d(-3.0, 1.0)


@pytest.fixture(scope="session")
def isolated():
    return build_lattice_spec(1, [0], [-1.5])


@pytest.fixture(scope="session")
def fig1b():
    """Directed 2-D lattice with a strong negative self-loop (stable)."""
    return build_lattice_spec(2, [(0, 0), (0, 1), (1, 0), (-1, -1)], [-4.0, 1.0, 0.5, 0.8])

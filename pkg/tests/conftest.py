import numpy as np
import pytest

from qtheta.finite_ext import Cochain, ExtendedLattice, FiniteAbelianGroup
from qtheta.gaussian_models import PacketSum
from qtheta.kaehler import KaehlerStructure, SiegelPoint
from qtheta.lattices import LatticeEmbedding, SymplecticSpace

SEED = 20240607


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def standard_space():
    return SymplecticSpace.standard(1)


@pytest.fixture
def z2_lattice(standard_space):
    return LatticeEmbedding.from_columns(standard_space, [[1, 0], [0, 1]])


@pytest.fixture
def lattice_2z(standard_space):
    return LatticeEmbedding.from_columns(standard_space, [[2, 0], [0, 1]])


@pytest.fixture(params=["z2", "2z"])
def bundled_lattice(request, standard_space):
    columns = {"z2": [[1, 0], [0, 1]], "2z": [[2, 0], [0, 1]]}[request.param]
    return LatticeEmbedding.from_columns(standard_space, columns)


@pytest.fixture
def kaehler_i():
    return KaehlerStructure.from_siegel(SiegelPoint.standard(1))


@pytest.fixture
def theta_vector_i():
    return PacketSum.theta_vector(SiegelPoint.standard(1))


@pytest.fixture
def z2_extended(standard_space):
    group = FiniteAbelianGroup((2,))
    return ExtendedLattice.build(standard_space, group, [(["1/2", 0], [1], [0]), ([0, "1/2"], [0], [1])])


@pytest.fixture
def z2_cochain():
    return Cochain({(0, 0): 1.0, (1, 0): 1.0, (0, 1): 1.0, (1, 1): 1j})

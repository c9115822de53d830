import math

import numpy as np
import pytest

from qtheta.errors import DimensionError, ParameterError, SingularFormError
from qtheta.kaehler import (
    KaehlerStructure,
    SiegelPoint,
    compatibility_residual,
    embed,
    hermitian,
    hermitian_gram,
    hermitian_real,
    q_matrix,
)
from qtheta.lattices import SymplecticSpace
from qtheta.numerics import random_siegel_matrix


def test_siegel_point_needs_positive_imaginary_part():
    with pytest.raises(SingularFormError):
        SiegelPoint(np.array([[1.0 - 1.0j]]))


def test_siegel_point_must_be_square():
    with pytest.raises(DimensionError):
        SiegelPoint(np.ones((1, 2)) * 1j)


def test_siegel_point_is_symmetrized():
    t = SiegelPoint(np.array([[2j, 1.0], [0.0, 2j]]))
    assert np.allclose(t.T, t.T.T)


def test_q_matrix_for_one_plus_i():
    k = KaehlerStructure.from_siegel(np.array([[1 + 1j]]))
    assert np.allclose(q_matrix(k), [[2.0, 1.0], [1.0, 1.0]], atol=1e-15)


def test_prefactor_for_standard_point(kaehler_i):
    assert kaehler_i.prefactor == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_kaehler_structure_needs_standard_space():
    with pytest.raises(ParameterError):
        KaehlerStructure(SiegelPoint.standard(1), SymplecticSpace.from_matrix([[0, 2], [-2, 0]]))


def test_kaehler_structure_dimension_mismatch():
    with pytest.raises(DimensionError):
        KaehlerStructure(SiegelPoint.standard(2), SymplecticSpace.standard(1))


@pytest.mark.parametrize("n", [1, 2])
def test_imaginary_part_of_h_is_the_symplectic_form(rng, n):
    k = KaehlerStructure.from_siegel(random_siegel_matrix(rng, n))
    for _ in range(10):
        x, y = rng.uniform(-2, 2, size=(2, 2 * n))
        assert compatibility_residual(k, x, y) < 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_hermitian_gram_and_q_matrix(rng, n):
    k = KaehlerStructure.from_siegel(random_siegel_matrix(rng, n))
    g = hermitian_gram(k)
    x, y = rng.uniform(-1, 1, size=(2, 2 * n))
    assert abs(x @ g @ y - hermitian_real(k, x, y)) < 1e-12
    assert abs(x @ q_matrix(k) @ x - hermitian_real(k, x, x).real) < 1e-12
    assert np.allclose(g.real, q_matrix(k), atol=1e-12)


def test_hermitian_is_sesquilinear(kaehler_i):
    u, v = np.array([1 + 2j]), np.array([0.5 - 1j])
    assert hermitian(kaehler_i, 1j * u, v) == pytest.approx(1j * hermitian(kaehler_i, u, v))
    assert hermitian(kaehler_i, u, 1j * v) == pytest.approx(-1j * hermitian(kaehler_i, u, v))


def test_embed_batch(kaehler_i):
    points = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 3.0]])
    assert np.allclose(embed(kaehler_i, points), [[1j], [1.0], [3 + 2j]])

import math

import numpy as np
import pytest
from scipy import integrate

from qtheta.errors import DimensionError, FormMismatchError
from qtheta.gaussian_models import (
    GaussianPacket,
    PacketSum,
    complete_square,
    evaluate,
    gaussian_integral,
    model1_act,
    model1_inner,
    quadrature_inner,
    translated_theta_vector,
)
from qtheta.heisenberg import VectorHeisenbergElement, compose_vector, symplectic_cocycle
from qtheta.kaehler import SiegelPoint
from qtheta.lattices import SymplecticSpace
from qtheta.numerics import gauss_legendre_grid


@pytest.mark.parametrize("q, expected", [(1.0, 1.0), (2.0, 1 / math.sqrt(2)), (4.0, 0.5)])
def test_gaussian_integral_real(q, expected):
    assert gaussian_integral([[q]], [0.0]) == pytest.approx(expected, abs=1e-15)


def test_gaussian_integral_against_quadrature():
    q, l, c = 1.0 + 0.5j, 0.3 - 0.2j, 0.1 + 0.05j
    nodes, weights = gauss_legendre_grid(1, 8.0, 200)
    x = nodes[:, 0]
    oracle = np.sum(weights * np.exp(-math.pi * (q * x * x + l * x + c)))
    assert abs(gaussian_integral([[q]], [l], c) - oracle) < 1e-12


def test_complete_square(rng):
    a = rng.normal(size=(2, 2))
    q = a @ a.T + np.eye(2) + 1j * np.eye(2)
    l = rng.normal(size=2) + 1j * rng.normal(size=2)
    lam = complete_square(q, l)
    x = rng.normal(size=2)
    assert abs((x + lam) @ q @ (x + lam) - lam @ q @ lam - (x @ q @ x + l @ x)) < 1e-12


def test_theta_vector_norm(theta_vector_i):
    assert model1_inner(theta_vector_i, theta_vector_i) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_closed_form_inner_product_matches_quadrature():
    siegel = SiegelPoint(np.array([[1 + 1j]]))
    f = translated_theta_vector(siegel, [0.3, -0.4])
    g = translated_theta_vector(siegel, [-0.5, 0.2]).scale(0.5 - 0.25j)
    assert abs(model1_inner(f, g) - quadrature_inner(f, g, 6.0, 160)) < 1e-10


def test_closed_form_inner_product_matches_quadrature_in_two_dimensions():
    siegel = SiegelPoint(np.array([[0.3 + 1.2j, 0.1 + 0.2j], [0.1 + 0.2j, -0.2 + 0.9j]]))
    f = translated_theta_vector(siegel, [0.2, -0.1, 0.3, 0.4])
    g = translated_theta_vector(siegel, [-0.3, 0.2, 0.0, -0.5])
    assert abs(model1_inner(f, g) - quadrature_inner(f, g, 5.0, 80)) < 1e-8


def test_model1_is_a_representation_of_the_heisenberg_group(rng, theta_vector_i):
    psi = symplectic_cocycle(SymplecticSpace.standard(1))
    a = VectorHeisenbergElement.of(np.exp(0.3j), rng.uniform(-1, 1, size=2))
    b = VectorHeisenbergElement.of(np.exp(-1.1j), rng.uniform(-1, 1, size=2))
    points = rng.uniform(-2, 2, size=(6, 1))
    lhs = evaluate(model1_act(a, model1_act(b, theta_vector_i)), points)
    rhs = evaluate(model1_act(compose_vector(a, b, psi), theta_vector_i), points)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_model1_action_is_unitary(rng):
    siegel = SiegelPoint(np.array([[0.5 + 2j]]))
    f = translated_theta_vector(siegel, [0.1, 0.7])
    el = VectorHeisenbergElement.of(np.exp(0.4j), rng.uniform(-1, 1, size=2))
    moved = model1_act(el, f)
    assert abs(model1_inner(moved, moved) - model1_inner(f, f)) < 1e-12


def test_translated_theta_vector_values():
    siegel = SiegelPoint.standard(1)
    f = translated_theta_vector(siegel, [0.5, 0.25])
    x = 0.3
    expected = np.exp(2j * math.pi * x * 0.25 + 1j * math.pi * 0.5 * 0.25) * np.exp(1j * math.pi * 1j * (x + 0.5) ** 2)
    assert abs(evaluate(f, [x]) - expected) < 1e-14


def test_packets_with_equal_parameters_merge(theta_vector_i):
    doubled = theta_vector_i + theta_vector_i
    assert len(doubled.packets) == 1
    assert doubled.packets[0].gamma == 2.0


def test_packet_sums_need_the_same_siegel_point(theta_vector_i):
    other = PacketSum.theta_vector(SiegelPoint(np.array([[2j]])))
    with pytest.raises(FormMismatchError):
        model1_inner(theta_vector_i, other)


def test_packet_dimension_is_checked():
    with pytest.raises(DimensionError):
        PacketSum(SiegelPoint.standard(1), (GaussianPacket(1.0, [0.0, 0.0], [0.0]),))


def test_quadrature_oracle_is_limited_to_small_n():
    f = PacketSum.theta_vector(SiegelPoint.standard(3))
    with pytest.raises(DimensionError):
        quadrature_inner(f, f, 4.0, 10)


def test_gaussian_integral_against_adaptive_quadrature():
    q, l = 0.7 + 0.4j, 0.2 + 0.1j

    def integrand(x: float) -> complex:
        return np.exp(-np.pi * (q * x * x + l * x))

    re, _ = integrate.quad(lambda x: integrand(x).real, -np.inf, np.inf, epsabs=1e-13)
    im, _ = integrate.quad(lambda x: integrand(x).imag, -np.inf, np.inf, epsabs=1e-13)
    assert abs(gaussian_integral([[q]], [l]) - complex(re, im)) < 1e-9

import math

import mpmath
import numpy as np
import pytest

from qtheta.errors import MultiplierError, TailBoundError
from qtheta.gaussian_models import FockSum, GaussianPacket, PacketSum, evaluate, model2_act, quadrature_inner
from qtheta.heisenberg import Multiplier, TorusHeisenbergElement, VectorHeisenbergElement
from qtheta.kaehler import KaehlerStructure, SiegelPoint, embed, hermitian_real
from qtheta.lattices import LatticeEmbedding, SymplecticSpace, covolume, dual_lattice
from qtheta.numerics import random_siegel_matrix, sample_points
from qtheta.theta_engine import (
    ClassicalThetaParams,
    act_on_packets,
    apply_to_vacuum,
    associativity_check,
    classical_equations_check,
    classical_modular_check,
    classical_theta,
    commutant_check,
    coordinate_norm,
    eta_closed_form,
    eta_identity_residual,
    eta_solve,
    lattice_form,
    model2_unitarity,
    poisson_check,
    positivity_check,
    quantum_theta,
    reconstruct_from_multiplier,
    rieffel_product_left,
    rieffel_product_right,
    self_fourier_check,
    theta_multiplier,
    vacuum_identity_check,
    vacuum_sum,
    verify_multiplier_invariance,
)
from qtheta.torus_algebra import (
    QuantizationForm,
    TorusCharacterAction,
    TorusElement,
    max_coefficient_difference,
    multiply,
    section_indices,
    star,
)

rng = np.random.default_rng(20240607)

OMEGA_2 = np.array([[1.0 + 1.2j, 0.2 + 0.1j], [0.2 + 0.1j, 0.5 + 0.9j]])
TILTED = SiegelPoint(np.array([[0.3 + 1.1j]]))


# ---------------------------------------------------------------------------
#  Classical theta
# ---------------------------------------------------------------------------

def test_theta_constant_at_i():
    value = classical_theta(ClassicalThetaParams(SiegelPoint.standard(1), [0.0])).value
    assert abs(value - 1.0864348112133080) < 1e-12


@pytest.mark.parametrize("omega", [1j, 2j, 1 + 1j, 0.3 + 0.7j])
@pytest.mark.parametrize("z", [0.0, 0.1, 0.25 + 0.1j, -0.3 - 0.2j])
def test_classical_theta_against_jtheta(omega, z):
    value = classical_theta(ClassicalThetaParams(SiegelPoint(np.array([[omega]])), [z])).value
    q = mpmath.exp(1j * mpmath.pi * omega)
    oracle = complex(mpmath.jtheta(3, mpmath.pi * z, q))
    assert abs(value - oracle) < 1e-12


@pytest.mark.parametrize("omega", [np.array([[1j]]), np.array([[0.5 + 1.5j]]), OMEGA_2])
def test_classical_quasi_periodicity(omega):
    siegel = SiegelPoint(omega)
    n = siegel.N
    for _ in range(5):
        z = rng.uniform(-1, 1, size=n) + 1j * rng.uniform(-0.3, 0.3, size=n)
        for m in np.eye(n, dtype=int):
            result = classical_equations_check(siegel, z, m)
            assert result.residual <= 1e-12 + result.tail_bound


@pytest.mark.parametrize("omega", [1j, 2j, 1 + 1j])
def test_classical_modular_equation(omega):
    siegel = SiegelPoint(np.array([[omega]]))
    for _ in range(5):
        z = complex(rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
        assert classical_modular_check(siegel, [z]).residual < 1e-10


def test_classical_modular_equation_in_two_dimensions():
    z = np.array([0.2 - 0.1j, -0.4 + 0.05j])
    assert classical_modular_check(SiegelPoint(OMEGA_2), z).residual < 1e-10


def test_explicit_radius_must_meet_tolerance():
    with pytest.raises(TailBoundError):
        classical_theta(ClassicalThetaParams(SiegelPoint.standard(1), [0.0]), radius=0.5)


# ---------------------------------------------------------------------------
#  Quantum theta and the Rieffel product
# ---------------------------------------------------------------------------

def test_quantum_theta_coefficients(kaehler_i, z2_lattice):
    theta = quantum_theta(kaehler_i, z2_lattice)
    assert theta.prefactor == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert theta.tail_bound < 1e-10
    assert theta.coefficient((0, 0)) == 1.0
    assert abs(theta.coefficient((1, 0)) - math.exp(-math.pi / 2)) < 1e-15
    for h in section_indices(2, 3.0):
        expected = math.exp(-0.5 * math.pi * (h[0] ** 2 + h[1] ** 2))
        assert abs(theta.coefficient(h) - expected) < 1e-15


@pytest.mark.parametrize("siegel", [
    SiegelPoint.standard(1),
    SiegelPoint(random_siegel_matrix(np.random.default_rng(5), 1)),
    SiegelPoint(np.array([[0.4 + 0.5j]])),
])
def test_rieffel_product_is_quantum_theta(siegel, bundled_lattice):
    k = KaehlerStructure.from_siegel(siegel)
    f_t = PacketSum.theta_vector(siegel)
    theta = quantum_theta(k, bundled_lattice)
    product = rieffel_product_left(f_t, f_t, bundled_lattice, theta.radius)
    for h in section_indices(2, 5.0):
        assert abs(product.coefficient(h) - theta.prefactor * theta.coefficient(h)) < 1e-10


def test_rieffel_constant_term(z2_lattice, theta_vector_i):
    product = rieffel_product_left(theta_vector_i, theta_vector_i, z2_lattice)
    constant = product.coefficient((0, 0))
    assert abs(constant - 1 / math.sqrt(2)) < 1e-15
    assert abs(constant - quadrature_inner(theta_vector_i, theta_vector_i, 6.0, 120)) < 1e-8


@pytest.fixture
def third_lattice(standard_space):
    return LatticeEmbedding.from_columns(standard_space, [["1/3", 0], [0, 1]])


def _random_packets(siegel: SiegelPoint, count: int = 2) -> PacketSum:
    packets = tuple(
        GaussianPacket(complex(rng.normal(), rng.normal()), rng.uniform(-1, 1, size=1), rng.uniform(-1, 1, size=1))
        for _ in range(count)
    )
    return PacketSum(siegel, packets)


def test_left_product_is_hermitian(third_lattice):
    phi, psi = _random_packets(TILTED), _random_packets(TILTED)
    lhs = star(rieffel_product_left(phi, psi, third_lattice, 4.0))
    rhs = rieffel_product_left(psi, phi, third_lattice, 4.0)
    assert max_coefficient_difference(lhs, rhs) < 1e-12


def test_left_product_is_linear_in_first_slot(third_lattice):
    phi, phi2, psi = _random_packets(TILTED), _random_packets(TILTED), _random_packets(TILTED)
    c = 0.7 - 1.3j
    base = rieffel_product_left(phi, psi, third_lattice, 4.0)
    scaled = rieffel_product_left(phi.scale(c), psi, third_lattice, 4.0)
    assert max_coefficient_difference(scaled, base.scale(c)) < 1e-12
    summed = rieffel_product_left(phi + phi2, psi, third_lattice, 4.0)
    split = base + rieffel_product_left(phi2, psi, third_lattice, 4.0)
    assert max_coefficient_difference(summed, split) < 1e-12


def test_right_constant_term(z2_lattice, theta_vector_i):
    product = rieffel_product_right(theta_vector_i, theta_vector_i, dual_lattice(z2_lattice))
    assert abs(product.coefficient((0, 0)) - 1 / math.sqrt(2)) < 1e-15


def test_right_product_divides_by_covolume(lattice_2z, theta_vector_i):
    dual = dual_lattice(lattice_2z)
    assert abs(covolume(dual) - 0.5) < 1e-15
    product = rieffel_product_right(theta_vector_i, theta_vector_i, dual)
    assert abs(product.coefficient((0, 0)) - 1 / (2 * math.sqrt(2))) < 1e-15


def test_right_product_is_hermitian_and_linear(third_lattice):
    dual = dual_lattice(third_lattice)
    phi, psi = _random_packets(TILTED), _random_packets(TILTED)
    c = -0.4 + 2.1j
    base = rieffel_product_right(phi, psi, dual, 4.0)
    assert max_coefficient_difference(star(base), rieffel_product_right(psi, phi, dual, 4.0)) < 1e-12
    assert max_coefficient_difference(rieffel_product_right(phi, psi.scale(c), dual, 4.0), base.scale(c)) < 1e-12
    conj_scaled = rieffel_product_right(phi.scale(c), psi, dual, 4.0)
    assert max_coefficient_difference(conj_scaled, base.scale(c.conjugate())) < 1e-12


def test_multiplier_invariance(kaehler_i, bundled_lattice):
    theta = quantum_theta(kaehler_i, bundled_lattice)
    for g in ((1, 0), (0, 1), (2, -3)):
        assert verify_multiplier_invariance(theta, g).residual < 1e-10


def test_multiplier_invariance_for_random_siegel_point():
    k = KaehlerStructure.from_siegel(OMEGA_2)
    D = LatticeEmbedding.from_columns(SymplecticSpace.standard(2), np.eye(4, dtype=int).tolist())
    theta = quantum_theta(k, D, 2.5)
    for g in np.eye(4, dtype=int):
        assert verify_multiplier_invariance(theta, g).residual < 1e-10


def test_torus_acts_on_model_one(z2_lattice, theta_vector_i):
    form = lattice_form(z2_lattice)
    a = TorusElement(form, {(1, 0): 0.5, (0, -1): 1j})
    b = TorusElement(form, {(1, 1): -0.25, (0, 0): 2.0})
    points = rng.uniform(-1, 1, size=(5, 1))
    lhs = evaluate(act_on_packets(a, act_on_packets(b, theta_vector_i, z2_lattice), z2_lattice), points)
    rhs = evaluate(act_on_packets(multiply(a, b), theta_vector_i, z2_lattice), points)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


# ---------------------------------------------------------------------------
#  Poisson and the vacuum
# ---------------------------------------------------------------------------

def test_poisson_for_2z(kaehler_i, lattice_2z):
    result = poisson_check(kaehler_i, lattice_2z, [[0.0, 0.0], [0.3, -0.7], [1.1, 0.4]])
    assert result.residual < 1e-8
    assert result.tail_bound < 1e-9


def test_poisson_for_self_dual_lattice_at_random_point(z2_lattice):
    k = KaehlerStructure.from_siegel(np.array([[0.3 + 0.8j]]))
    result = poisson_check(k, z2_lattice, sample_points(rng, 4, 2))
    assert result.residual <= 1e-8 + result.tail_bound


def test_vacuum_sum_at_origin_is_classical(kaehler_i, z2_lattice):
    total = vacuum_sum(kaehler_i, z2_lattice, [0.0, 0.0])
    theta_i = classical_theta(ClassicalThetaParams(SiegelPoint.standard(1), [0.0])).value
    assert abs(total.value - theta_i ** 2) < 1e-10


def test_theta_on_vacuum_at_origin(third_lattice):
    k = KaehlerStructure.from_siegel(TILTED)
    theta = quantum_theta(k, third_lattice)
    value = evaluate(apply_to_vacuum(theta), np.zeros(1, dtype=complex))
    expected = sum(
        a * math.exp(-0.5 * math.pi * hermitian_real(k, third_lattice.point(h), third_lattice.point(h)).real)
        for h, a in theta.element.terms.items()
    )
    assert abs(value - expected) < 1e-12
    assert abs(value - vacuum_sum(k, third_lattice, [0.0, 0.0]).value) < 1e-9


def test_theta_on_vacuum_term_parameters(third_lattice):
    k = KaehlerStructure.from_siegel(TILTED)
    theta = quantum_theta(k, third_lattice)
    terms = apply_to_vacuum(theta).terms
    assert len(terms) == len(theta.element.terms)
    for h, a in theta.element.terms.items():
        y = third_lattice.point(h)
        l = -math.pi * (k.S_inv @ embed(k, y).conj())
        gamma = a * math.exp(-0.5 * math.pi * hermitian_real(k, y, y).real)
        matches = [t for t in terms if np.allclose(t.l, l, atol=1e-12)]
        assert len(matches) == 1
        assert abs(matches[0].gamma - gamma) < 1e-14


def test_vacuum_identity(kaehler_i, bundled_lattice):
    result = vacuum_identity_check(kaehler_i, bundled_lattice, sample_points(rng, 5, 2))
    assert result.residual <= 1e-6 + result.tail_bound


# ---------------------------------------------------------------------------
#  eta and the self-Fourier property
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("T", [np.array([[1j]]), np.array([[1 + 1j]]), OMEGA_2])
def test_eta_identities(T):
    k = KaehlerStructure.from_siegel(T)
    dim = 2 * k.N
    for _ in range(20):
        x, g = rng.uniform(-1, 1, size=(2, dim))
        h_samples = rng.uniform(-1, 1, size=(3, dim))
        assert eta_identity_residual(k, x, g, h_samples).residual < 1e-10
        assert np.max(np.abs(eta_solve(k, x, g) - eta_closed_form(k, x, g))) < 1e-10


def test_self_fourier(kaehler_i):
    g_samples = sample_points(rng, 3, 2)
    assert self_fourier_check(kaehler_i, [0.3, -0.7], g_samples, 6.0, 120).residual < 1e-6


def test_self_fourier_for_tilted_siegel_point():
    k = KaehlerStructure.from_siegel(np.array([[0.5 + 1.0j]]))
    assert self_fourier_check(k, [0.1, 0.2], [[0.4, -0.3]], 6.0, 120).residual < 1e-6


# ---------------------------------------------------------------------------
#  Module structure
# ---------------------------------------------------------------------------

def test_associativity(bundled_lattice, theta_vector_i):
    points = sample_points(rng, 5, 1)
    f = theta_vector_i
    result = associativity_check(f, f, f, bundled_lattice, points)
    assert result.residual <= 1e-6 + result.tail_bound


def test_associativity_with_distinct_packets(lattice_2z):
    siegel = SiegelPoint.standard(1)
    phi = PacketSum(siegel, (GaussianPacket(1.0, [0.2], [0.1]),))
    psi = PacketSum(siegel, (GaussianPacket(0.5j, [-0.3], [0.4]),))
    xi = PacketSum.theta_vector(siegel)
    result = associativity_check(phi, psi, xi, lattice_2z, sample_points(rng, 4, 1))
    assert result.residual <= 1e-6 + result.tail_bound


def test_commutant(lattice_2z, theta_vector_i):
    result = commutant_check(theta_vector_i, lattice_2z, dual_lattice(lattice_2z), sample_points(rng, 5, 1))
    assert result.residual < 1e-12


def test_positivity_of_rieffel_square(z2_lattice):
    siegel = SiegelPoint.standard(1)
    for _ in range(5):
        packets = tuple(
            GaussianPacket(complex(rng.normal(), rng.normal()), rng.uniform(-1, 1, size=1), rng.uniform(-1, 1, size=1))
            for _ in range(2)
        )
        result = positivity_check(PacketSum(siegel, packets), z2_lattice, 1.5)
        assert result.residual <= 1e-8


def test_fock_model_is_unitary(kaehler_i):
    vacuum = FockSum.vacuum(kaehler_i)
    other = model2_act(VectorHeisenbergElement.translation([0.4, -0.2]), vacuum, kaehler_i)
    el = VectorHeisenbergElement.of(np.exp(0.7j), [0.3, 0.5])
    assert model2_unitarity(kaehler_i, vacuum, other, el, 6.0, 120).residual < 1e-6


# ---------------------------------------------------------------------------
#  Reconstruction
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("T", [np.array([[1j]]), np.array([[0.5 + 1.5j]])])
def test_reconstruct_from_theta_multiplier(T, bundled_lattice):
    k = KaehlerStructure.from_siegel(T)
    theta = quantum_theta(k, bundled_lattice)
    rebuilt = reconstruct_from_multiplier(theta_multiplier(theta))
    assert rebuilt.generator_residual < 1e-10
    assert np.allclose(coordinate_norm(rebuilt.kaehler, rebuilt.lattice), coordinate_norm(k, bundled_lattice), atol=1e-10)


def test_reconstruct_rejects_non_ample_multiplier():
    form = QuantizationForm(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    lifts = tuple(TorusHeisenbergElement(form, 1.0, TorusCharacterAction.trivial(2), g) for g in ((1, 0), (0, 1)))
    with pytest.raises(MultiplierError):
        reconstruct_from_multiplier(Multiplier(form, np.eye(2, dtype=int), lifts))

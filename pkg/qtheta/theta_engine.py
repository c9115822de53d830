import cmath
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from qtheta.errors import DimensionError, MultiplierError, ParameterError, SingularFormError, TailBoundError
from qtheta.gaussian_models import (
    FockExponential,
    FockSum,
    PacketSum,
    evaluate,
    fock_inner_quadrature,
    model1_act,
    model1_inner,
    model2_act,
)
from qtheta.heisenberg import (
    Multiplier,
    TorusHeisenbergElement,
    VectorHeisenbergElement,
    apply_heisenberg,
    gamma_basis,
    is_ample,
    structure_form,
)
from qtheta.kaehler import KaehlerStructure, SiegelPoint, embed, hermitian_gram, q_matrix
from qtheta.lattices import (
    LatticeEmbedding,
    SymplecticSpace,
    covolume,
    dual_lattice,
    enumerate_coordinates,
    gram,
    symplectic_basis,
)
from qtheta.numerics import (
    gauss_legendre_grid,
    guarded_inv,
    guarded_solve,
    lattice_tail_bound,
    min_eigenvalue,
    radius_for_tolerance,
    sqrt_det,
    stable_sum,
)
from qtheta.torus_algebra import (
    QuantizationForm,
    TorusCharacterAction,
    TorusElement,
    max_coefficient_difference,
    regular_rep_matrix,
    section_indices,
)

logger = logging.getLogger("qtheta.theta_engine")

TAIL_TOLERANCE = 1e-10
CLASSICAL_TAIL_TOLERANCE = 1e-12


class CheckResult(NamedTuple):
    residual: float
    tail_bound: float


class TruncatedSum(NamedTuple):
    value: complex
    tail_bound: float
    radius: float


# ---------------------------------------------------------------------------
#  Classical theta functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClassicalThetaParams:
    omega: SiegelPoint
    z: np.ndarray

    def __post_init__(self) -> None:
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if z.shape != (self.omega.N,):
            raise DimensionError(f"z must have length {self.omega.N}")
        object.__setattr__(self, "z", z)


def classical_theta(p: ClassicalThetaParams, radius: float | None = None,
                    tolerance: float = CLASSICAL_TAIL_TOLERANCE) -> TruncatedSum:
    """sum over n in Z^N of exp(pi*i n^T Omega n + 2 pi*i n^T z), radius in the Im Omega norm."""
    omega = p.omega.T
    norm = omega.imag
    drift = 2.0 * np.pi * float(np.linalg.norm(p.z.imag)) / math.sqrt(min_eigenvalue(norm))
    if radius is None:
        radius = radius_for_tolerance(norm, np.pi, tolerance, drift)
    bound = lattice_tail_bound(norm, radius, np.pi, drift)
    if bound > tolerance:
        raise TailBoundError(f"radius {radius} is too small for tolerance {tolerance:.1e}", bound)
    n = enumerate_coordinates(norm, radius).astype(float)
    exponent = 1j * np.pi * np.einsum("mi,ij,mj->m", n, omega, n) + 2j * np.pi * (n @ p.z)
    return TruncatedSum(stable_sum(np.exp(exponent)), bound, radius)


def classical_equations_check(omega: SiegelPoint, z, m: Sequence[int]) -> CheckResult:
    """Periodicity in z + m and quasi-periodicity in z + Omega m."""
    z = np.asarray(z, dtype=complex)
    m = np.asarray(m, dtype=float)
    base = classical_theta(ClassicalThetaParams(omega, z))
    shifted = classical_theta(ClassicalThetaParams(omega, z + m))
    quasi = classical_theta(ClassicalThetaParams(omega, z + omega.T @ m))
    factor = cmath.exp(-1j * np.pi * complex(m @ omega.T @ m) - 2j * np.pi * complex(m @ z))
    residual = max(abs(shifted.value - base.value), abs(quasi.value - factor * base.value))
    tail = max(shifted.tail_bound + base.tail_bound, quasi.tail_bound + abs(factor) * base.tail_bound)
    return CheckResult(residual, tail)


def classical_modular_check(omega: SiegelPoint, z) -> CheckResult:
    """theta(Omega^-1 z, -Omega^-1) against det(Omega/i)^(1/2) exp(pi*i z^T Omega^-1 z) theta(z, Omega)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    inv = guarded_inv(omega.T)
    lhs = classical_theta(ClassicalThetaParams(SiegelPoint(-inv), inv @ z))
    rhs = classical_theta(ClassicalThetaParams(omega, z))
    factor = sqrt_det(-1j * omega.T) * cmath.exp(1j * np.pi * complex(z @ inv @ z))
    return CheckResult(abs(lhs.value - factor * rhs.value), lhs.tail_bound + abs(factor) * rhs.tail_bound)


# ---------------------------------------------------------------------------
#  Quantum theta functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumTheta:
    """Normalized Theta_D (coefficient 1 at h = 0); prefactor kept apart."""

    element: TorusElement
    kaehler: KaehlerStructure
    lattice: LatticeEmbedding
    prefactor: float
    radius: float
    tail_bound: float

    def coefficient(self, h: Sequence[int]) -> complex:
        return self.element.coefficient(h)


def lattice_form(D: LatticeEmbedding) -> QuantizationForm:
    return QuantizationForm(gram(D).matrix)


def opposite_form(Ddual: LatticeEmbedding) -> QuantizationForm:
    """Form of the algebra acting on the right through E!(h)^{-1}."""
    return QuantizationForm(-gram(Ddual).matrix)


def _require_compatible(k: KaehlerStructure, D: LatticeEmbedding) -> None:
    if D.space.N != k.N or not D.space.is_standard():
        raise ParameterError("Kaehler structure is not compatible with the lattice's symplectic space")


def coordinate_norm(k: KaehlerStructure, D: LatticeEmbedding) -> np.ndarray:
    """P = G^T M G, so that n^T P n = H(Gn_, Gn_)."""
    g = D.generators
    p = g.T @ q_matrix(k) @ g
    return 0.5 * (p + p.T)


def quantum_theta(k: KaehlerStructure, D: LatticeEmbedding, radius: float | None = None,
                  tolerance: float = TAIL_TOLERANCE) -> QuantumTheta:
    """Theta_D = sum_h exp(-pi/2 H(h_, h_)) e(h), truncated in the H norm."""
    _require_compatible(k, D)
    norm = coordinate_norm(k, D)
    if radius is None:
        radius = radius_for_tolerance(norm, 0.5 * np.pi, tolerance)
    bound = lattice_tail_bound(norm, radius, 0.5 * np.pi)
    coords = enumerate_coordinates(norm, radius)
    values = np.exp(-0.5 * np.pi * np.einsum("mi,ij,mj->m", coords, norm, coords))
    terms = {tuple(int(v) for v in n): complex(c) for n, c in zip(coords, values)}
    logger.debug("quantum theta with %d terms, radius %.2f, tail %.3e", len(terms), radius, bound)
    return QuantumTheta(TorusElement(lattice_form(D), terms), k, D, k.prefactor, radius, bound)


def theta_lift(theta: QuantumTheta, g: Sequence[int]) -> TorusHeisenbergElement:
    """[C_g; x_g, g] with C_g = exp(-pi/2 H(g_, g_)), x_g(h) = exp(-pi H(g_, h_))."""
    return gaussian_lift(theta.kaehler, theta.lattice.generators, theta.element.form, g)


def gaussian_lift(k: KaehlerStructure, generators: np.ndarray, form: QuantizationForm,
                   g: Sequence[int]) -> TorusHeisenbergElement:
    hg = hermitian_gram(k)
    y = generators @ np.asarray(g, dtype=float)
    c = math.exp(-0.5 * np.pi * float((y @ hg @ y).real))
    w = -np.pi * (y @ hg @ generators)
    return TorusHeisenbergElement(form, c, TorusCharacterAction(w), tuple(int(v) for v in g))


def theta_multiplier(theta: QuantumTheta) -> Multiplier:
    rank = theta.lattice.rank
    basis = np.eye(rank, dtype=np.int64)
    lifts = tuple(theta_lift(theta, basis[:, j]) for j in range(rank))
    return Multiplier(theta.element.form, basis, lifts)


def invariance_residual(lifted: TorusHeisenbergElement, element: TorusElement) -> float:
    """max |(L . f)_h - f_h| over h present in both truncations."""
    moved = apply_heisenberg(lifted, element)
    overlap = set(moved.terms) & set(element.terms)
    return max_coefficient_difference(moved, element, overlap)


def verify_multiplier_invariance(theta: QuantumTheta, g: Sequence[int]) -> CheckResult:
    if len(g) != theta.lattice.rank:
        raise DimensionError(f"g must have length {theta.lattice.rank}")
    residual = invariance_residual(theta_lift(theta, g), theta.element)
    return CheckResult(residual, theta.tail_bound)


# ---------------------------------------------------------------------------
#  Vacuum (Model II) and the Poisson / Morita equation
# ---------------------------------------------------------------------------

def apply_to_vacuum(theta: QuantumTheta) -> FockSum:
    """Theta_D . 1 with E(h) acting through the Fock representation."""
    k = theta.kaehler
    vacuum = FockSum.vacuum(k)
    terms: list[FockExponential] = []
    for h, a in theta.element.terms.items():
        moved = model2_act(VectorHeisenbergElement.translation(theta.lattice.point(h)), vacuum, k)
        terms.extend(FockExponential(a * t.gamma, t.l) for t in moved.terms)
    return FockSum(k, tuple(terms))


def _vacuum_terms(k: KaehlerStructure, L: LatticeEmbedding, x: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """exp(-pi H(y_, y_) - pi H(x_, y_)) for y = G n."""
    y = embed(k, coords.astype(float) @ L.generators.T)
    xz = embed(k, x)
    quad = np.einsum("mi,ij,mj->m", y, k.S_inv, y.conj()).real
    cross = (xz @ k.S_inv) @ y.conj().T
    return np.exp(-np.pi * quad - np.pi * cross)


def vacuum_sum(k: KaehlerStructure, L: LatticeEmbedding, x, radius: float | None = None,
               tolerance: float = TAIL_TOLERANCE) -> TruncatedSum:
    """sum over h in L of exp(-pi H(h_, h_) - pi H(x_, h_))."""
    x = np.asarray(x, dtype=float)
    norm = coordinate_norm(k, L)
    drift = np.pi * math.sqrt(max(float(x @ q_matrix(k) @ x), 0.0))
    if radius is None:
        radius = radius_for_tolerance(norm, np.pi, tolerance, drift)
    bound = lattice_tail_bound(norm, radius, np.pi, drift)
    coords = enumerate_coordinates(norm, radius)
    return TruncatedSum(stable_sum(_vacuum_terms(k, L, x, coords)), bound, radius)


def poisson_check(k: KaehlerStructure, D: LatticeEmbedding, x_samples: Sequence, radius: float | None = None,
                  tolerance: float = TAIL_TOLERANCE) -> CheckResult:
    """covolume(D) * sum over D against the sum over D!, at every sample x."""
    _require_compatible(k, D)
    dual = dual_lattice(D)
    vol = covolume(D)
    residual = 0.0
    tail = 0.0
    for x in x_samples:
        lhs = vacuum_sum(k, D, x, radius, tolerance)
        rhs = vacuum_sum(k, dual, x, radius, tolerance)
        residual = max(residual, abs(vol * lhs.value - rhs.value))
        tail = max(tail, vol * lhs.tail_bound + rhs.tail_bound)
    return CheckResult(residual, tail)


def vacuum_identity_check(k: KaehlerStructure, D: LatticeEmbedding, samples: Sequence,
                          radius: float | None = None, tolerance: float = TAIL_TOLERANCE) -> CheckResult:
    """The Poisson equation restated through apply_to_vacuum on Theta_D and Theta_D!."""
    _require_compatible(k, D)
    dual = dual_lattice(D)
    vol = covolume(D)
    samples = [np.asarray(x, dtype=float) for x in samples]
    metric = q_matrix(k)
    drift = np.pi * max(math.sqrt(max(float(x @ metric @ x), 0.0)) for x in samples)

    tail = 0.0
    vacua = []
    for L in (D, dual):
        norm = coordinate_norm(k, L)
        r = radius if radius is not None else radius_for_tolerance(norm, np.pi, tolerance, drift)
        vacua.append(apply_to_vacuum(quantum_theta(k, L, r)))
        tail += (vol if L is D else 1.0) * lattice_tail_bound(norm, r, np.pi, drift)
    points = embed(k, np.vstack(samples))
    lhs = evaluate(vacua[0], points)
    rhs = evaluate(vacua[1], points)
    residual = float(np.max(np.abs(vol * lhs - rhs)))
    return CheckResult(residual, tail)


# ---------------------------------------------------------------------------
#  eta machinery and the self-Fourier property
# ---------------------------------------------------------------------------

def _quadratic(m: np.ndarray, v: np.ndarray) -> complex:
    return complex(v @ m @ v)


def eta_solve(k: KaehlerStructure, x, g) -> np.ndarray:
    """eta with Q(h + eta) - Q(eta) = H(h_, h_) + H(x_, h_) + 2i A(g, h) for all real h.

    Solves 2 M eta = c_x + 2i J^T g, where c_x^T h = H(x_, h_).
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    xz = embed(k, x)
    c_x = np.concatenate([k.T.conj() @ (k.S_inv @ xz), k.S_inv @ xz])
    rhs = c_x + 2j * (k.space.matrix.T @ g)
    return guarded_solve(2.0 * q_matrix(k).astype(complex), rhs)


def eta_closed_form(k: KaehlerStructure, x, g) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = x + 2.0 * np.asarray(g, dtype=float)
    n = k.N
    r, s, s_inv = k.R, k.S, k.S_inv
    eta1 = 0.5 * x[:n] - 0.5j * (s_inv @ (r @ u[:n] + u[n:]))
    eta2 = 0.5 * x[n:] + 0.5j * ((s + r @ s_inv @ r) @ u[:n] + r @ s_inv @ u[n:])
    return np.concatenate([eta1, eta2])


def eta_identity_residual(k: KaehlerStructure, x, g, h_samples: Sequence) -> CheckResult:
    """Defining identity over h_samples and Q(eta) = -H(g_, g_) - H(x_, g_)."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    m = q_matrix(k)
    hg = hermitian_gram(k)
    eta = eta_solve(k, x, g)
    q_eta = _quadratic(m, eta)
    residual = abs(q_eta - (-(g @ hg @ g) - (x @ hg @ g)))
    for h in h_samples:
        h = np.asarray(h, dtype=float)
        lhs = _quadratic(m, h + eta) - q_eta
        rhs = (h @ hg @ h) + (x @ hg @ h) + 2j * float(g @ k.space.matrix @ h)
        residual = max(residual, abs(lhs - rhs))
    return CheckResult(float(residual), 0.0)


def poisson_summand(k: KaehlerStructure, x, y) -> np.ndarray:
    """f_x(y) = exp(-pi H(y_, y_) - pi H(x_, y_)) for y of shape (2N,) or (M, 2N)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    hg = hermitian_gram(k)
    quad = np.einsum("mi,ij,mj->m", y, hg, y).real
    cross = np.asarray(x, dtype=float) @ hg @ y.T
    return np.exp(-np.pi * quad - np.pi * cross)


def self_fourier_check(k: KaehlerStructure, x, g_samples: Sequence, box_half_width: float,
                       points_per_axis: int) -> CheckResult:
    """Compare f_x(g) with the quadrature of f_x(h) exp(-2 pi*i A(g, h)) over R^2."""
    if k.N != 1:
        raise DimensionError("self-Fourier quadrature oracle supports N = 1 only")
    nodes, weights = gauss_legendre_grid(2, box_half_width, points_per_axis)
    fx = poisson_summand(k, x, nodes)
    residual = 0.0
    for g in g_samples:
        g = np.asarray(g, dtype=float)
        phase = np.exp(-2j * np.pi * (nodes @ (k.space.matrix.T @ g)))
        transform = complex(np.sum(weights * fx * phase))
        residual = max(residual, abs(transform - complex(poisson_summand(k, x, g)[0])))
    return CheckResult(residual, 0.0)


# ---------------------------------------------------------------------------
#  Rieffel scalar products on Model I
# ---------------------------------------------------------------------------

def _family_kaehler(Phi: PacketSum, L: LatticeEmbedding) -> KaehlerStructure:
    k = KaehlerStructure.from_siegel(Phi.siegel)
    _require_compatible(k, L)
    return k


def _tail_data(Phi: PacketSum, Psi: PacketSum, k: KaehlerStructure) -> tuple[float, float]:
    """Amplitude and drift bounding |<Phi, U_y Psi>| <= A exp(-pi/2 |y|^2 + drift |y|)."""
    m = q_matrix(k)
    amplitude = 0.0
    drift = 0.0
    for p in Phi.packets:
        for q in Psi.packets:
            amplitude += abs(p.gamma) * abs(q.gamma)
            delta = np.concatenate([(q.s - p.s).real, (q.b - p.b).real])
            drift = max(drift, np.pi * math.sqrt(max(float(delta @ m @ delta), 0.0)))
    return amplitude * k.prefactor, drift


def rieffel_tail_bound(Phi: PacketSum, Psi: PacketSum, L: LatticeEmbedding, radius: float) -> float:
    k = _family_kaehler(Phi, L)
    amplitude, drift = _tail_data(Phi, Psi, k)
    return amplitude * lattice_tail_bound(coordinate_norm(k, L), radius, 0.5 * np.pi, drift)


def _rieffel_radius(Phi: PacketSum, Psi: PacketSum, L: LatticeEmbedding, radius: float | None,
                    tolerance: float) -> tuple[np.ndarray, float]:
    k = _family_kaehler(Phi, L)
    norm = coordinate_norm(k, L)
    if radius is None:
        amplitude, drift = _tail_data(Phi, Psi, k)
        if amplitude == 0.0:
            return norm, 0.25
        radius = radius_for_tolerance(norm, 0.5 * np.pi, tolerance / amplitude, drift)
    return norm, radius


def rieffel_product_left(Phi: PacketSum, Psi: PacketSum, D: LatticeEmbedding, radius: float | None = None,
                         tolerance: float = TAIL_TOLERANCE) -> TorusElement:
    """_D<Phi, Psi> = sum_h <Phi, E(h) Psi> e(h), E(h) = U_(1, Gh)."""
    norm, radius = _rieffel_radius(Phi, Psi, D, radius, tolerance)
    terms = {}
    for n in enumerate_coordinates(norm, radius):
        moved = model1_act(VectorHeisenbergElement.translation(D.point(n)), Psi)
        terms[tuple(int(v) for v in n)] = model1_inner(Phi, moved)
    return TorusElement(lattice_form(D), terms)


def rieffel_product_right(Phi: PacketSum, Psi: PacketSum, Ddual: LatticeEmbedding, radius: float | None = None,
                          tolerance: float = TAIL_TOLERANCE) -> TorusElement:
    """<Phi, Psi>_D! = (1/covolume(D)) sum_g <E!(g) Psi, Phi> e(g) in the opposite algebra."""
    norm, radius = _rieffel_radius(Psi, Phi, Ddual, radius, tolerance)
    scale = covolume(Ddual)
    terms = {}
    for n in enumerate_coordinates(norm, radius):
        moved = model1_act(VectorHeisenbergElement.translation(Ddual.point(n)), Psi)
        terms[tuple(int(v) for v in n)] = scale * model1_inner(moved, Phi)
    return TorusElement(opposite_form(Ddual), terms)


def act_on_packets(a: TorusElement, f: PacketSum, D: LatticeEmbedding) -> PacketSum:
    """a . f = sum_h a_h E(h) f."""
    out = PacketSum(f.siegel)
    for h, v in a.terms.items():
        out = out + model1_act(VectorHeisenbergElement.of(v, D.point(h)), f)
    return out


def act_right_on_packets(b: TorusElement, f: PacketSum, Ddual: LatticeEmbedding) -> PacketSum:
    """f . b = sum_g b_g E!(-g) f."""
    out = PacketSum(f.siegel)
    for g, v in b.terms.items():
        out = out + model1_act(VectorHeisenbergElement.of(v, -Ddual.point(g)), f)
    return out


def _sup_amplitude(f: PacketSum) -> float:
    return sum(abs(p.gamma) for p in f.packets)


def associativity_check(Phi: PacketSum, Psi: PacketSum, Xi: PacketSum, D: LatticeEmbedding,
                        sample_points, radius: float | None = None,
                        tolerance: float = TAIL_TOLERANCE) -> CheckResult:
    """_D<Phi, Psi> Xi against Phi <Psi, Xi>_D! at Model I sample points."""
    dual = dual_lattice(D)
    left = rieffel_product_left(Phi, Psi, D, radius, tolerance)
    right = rieffel_product_right(Psi, Xi, dual, radius, tolerance)
    points = np.atleast_2d(np.asarray(sample_points, dtype=float))
    lhs = evaluate(act_on_packets(left, Xi, D), points)
    rhs = evaluate(act_right_on_packets(right, Phi, dual), points)
    residual = float(np.max(np.abs(lhs - rhs)))

    r_left = _rieffel_radius(Phi, Psi, D, radius, tolerance)[1]
    r_right = _rieffel_radius(Xi, Psi, dual, radius, tolerance)[1]
    tail = (rieffel_tail_bound(Phi, Psi, D, r_left) * _sup_amplitude(Xi)
            + covolume(dual) * rieffel_tail_bound(Xi, Psi, dual, r_right) * _sup_amplitude(Phi))
    return CheckResult(residual, tail)


def commutant_check(Psi: PacketSum, D: LatticeEmbedding, Ddual: LatticeEmbedding, sample_points) -> CheckResult:
    """E(h), h in D, commutes with E!(g), g in D!, on Model I (generator pairs)."""
    points = np.atleast_2d(np.asarray(sample_points, dtype=float))
    residual = 0.0
    for i in range(D.rank):
        eh = VectorHeisenbergElement.translation(D.generators[:, i])
        for j in range(Ddual.rank):
            eg = VectorHeisenbergElement.translation(Ddual.generators[:, j])
            one = model1_act(eh, model1_act(eg, Psi))
            two = model1_act(eg, model1_act(eh, Psi))
            residual = max(residual, float(np.max(np.abs(evaluate(one, points) - evaluate(two, points)))))
    return CheckResult(residual, 0.0)


def positivity_check(Phi: PacketSum, D: LatticeEmbedding, section_radius: float,
                     radius: float | None = None, tolerance: float = TAIL_TOLERANCE) -> CheckResult:
    """-min eigenvalue (clipped at 0) of the regular-representation section of _D<Phi, Phi>.

    The product is truncated wide enough that every difference of two section
    indices lies in its support, so the section is an exact compression.
    """
    k = _family_kaehler(Phi, D)
    norm = coordinate_norm(k, D)
    indices = section_indices(D.rank, section_radius)
    reach = 2.0 * section_radius * math.sqrt(float(np.max(np.linalg.eigvalsh(norm))))
    auto = _rieffel_radius(Phi, Phi, D, radius, tolerance)[1]
    radius = max(auto, reach)
    product = rieffel_product_left(Phi, Phi, D, radius)
    matrix = regular_rep_matrix(product, section_radius, indices=indices)
    hermitian_part = 0.5 * (matrix + matrix.conj().T)
    lowest = float(np.linalg.eigvalsh(hermitian_part)[0])
    logger.debug("positivity section of size %d, lowest eigenvalue %.3e", len(indices), lowest)
    return CheckResult(max(0.0, -lowest), rieffel_tail_bound(Phi, Phi, D, radius))


def model2_unitarity(k: KaehlerStructure, f: FockSum, g: FockSum, el: VectorHeisenbergElement,
                     box_half_width: float, points_per_axis: int) -> CheckResult:
    before = fock_inner_quadrature(f, g, box_half_width, points_per_axis)
    after = fock_inner_quadrature(model2_act(el, f, k), model2_act(el, g, k), box_half_width, points_per_axis)
    return CheckResult(abs(after - before), 0.0)


# ---------------------------------------------------------------------------
#  Reconstruction of (K, D, Theta_D) from an ample multiplier
# ---------------------------------------------------------------------------

class Reconstruction(NamedTuple):
    kaehler: KaehlerStructure
    lattice: LatticeEmbedding
    theta: QuantumTheta
    generator_residual: float


def reconstruct_from_multiplier(m: Multiplier, radius: float | None = None,
                                tolerance: float = TAIL_TOLERANCE) -> Reconstruction:
    """Recover H = P + iA from the structure form and build Theta_D on K = R (x) D.

    generator_residual compares the normalized gamma_basis generator with
    Theta_D on common exponents.
    """
    basis = m.basis
    if m.rank != m.form.rank or round(abs(np.linalg.det(basis.astype(float)))) != 1:
        raise MultiplierError("projection of B onto D is not an isomorphism")
    if m.form.twist is not None:
        raise MultiplierError("quantization form must come from a real antisymmetric matrix")
    if not is_ample(m):
        raise MultiplierError("log-modulus of the structure form is not negative definite")

    values = structure_form(m).values
    rank = m.rank
    for i in range(rank):
        for j in range(rank):
            v = values[i, j]
            if v.real <= 0 or abs(v.imag) > 1e-10 * abs(v):
                raise MultiplierError("structure form is not real positive", (i, j))

    inv_basis = np.rint(np.linalg.inv(basis.astype(float)))
    p_b = -np.log(values.real) / np.pi
    p = inv_basis.T @ p_b @ inv_basis
    p = 0.5 * (p + p.T)
    a = m.form.matrix
    complex_structure = guarded_solve(p, a)
    if not np.allclose(complex_structure @ complex_structure, -np.eye(rank), atol=1e-8):
        raise MultiplierError("phases of the quantization form do not match Im H for Re H from the structure form")

    bs = symplectic_basis(a)
    m_std = bs.T @ p @ bs
    m_std = 0.5 * (m_std + m_std.T)
    n = rank // 2
    s = guarded_inv(m_std[n:, n:])
    r = m_std[:n, n:] @ s
    try:
        k = KaehlerStructure.from_siegel(SiegelPoint(r + 1j * s))
    except SingularFormError as exc:
        raise MultiplierError(f"structure form is not of Kaehler type ({exc})") from None
    if not np.allclose(q_matrix(k), m_std, atol=1e-8):
        raise MultiplierError("structure form is not of Kaehler type")

    D = LatticeEmbedding.from_matrix(SymplecticSpace.standard(n), guarded_inv(bs))
    theta = quantum_theta(k, D, radius, tolerance)

    generator = gamma_basis(m, theta.radius)[0]
    common = set(generator.terms) & set(theta.element.terms)
    generator_residual = max(
        (abs(generator.terms[h] - theta.element.terms[h]) for h in common), default=0.0
    )
    logger.debug("reconstructed T = %s, generator residual %.3e", k.T.tolist(), generator_residual)
    return Reconstruction(k, D, theta, generator_residual)

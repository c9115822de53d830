import cmath
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import sympy

from qtheta.errors import CochainError, DimensionError, ParameterError
from qtheta.gaussian_models import PacketSum, model1_act, model1_inner
from qtheta.heisenberg import Cocycle, Multiplier, VectorHeisenbergElement
from qtheta.kaehler import KaehlerStructure, q_matrix
from qtheta.lattices import (
    IntVector,
    LatticeEmbedding,
    SymplecticSpace,
    enumerate_coordinates,
    smith_normal_form,
    to_exact,
    to_float,
)
from qtheta.numerics import lattice_tail_bound, make_rng, radius_for_tolerance
from qtheta.theta_engine import CheckResult, TAIL_TOLERANCE, gaussian_lift, invariance_residual
from qtheta.torus_algebra import QuantizationForm, TorusElement

logger = logging.getLogger("qtheta.finite_ext")

PHASE_TOL = 1e-10
RANDOM_PAIRS = 50
MAX_SOLVER_CANDIDATES = 1_000_000

FiniteElement = tuple[int, ...]


# ---------------------------------------------------------------------------
#  F and its dual
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z/m_1 x ... x Z/m_k; a character l acts by l(a) = exp(2 pi*i sum l_j a_j / m_j)."""

    orders: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        orders = tuple(int(m) for m in self.orders)
        if any(m < 1 for m in orders):
            raise ParameterError("group orders must be positive")
        object.__setattr__(self, "orders", orders)

    @property
    def card(self) -> int:
        return math.prod(self.orders)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    def reduce(self, a: Sequence[int]) -> FiniteElement:
        if len(a) != len(self.orders):
            raise DimensionError(f"element must have {len(self.orders)} residues")
        return tuple(int(v) % m for v, m in zip(a, self.orders))

    def elements(self) -> list[FiniteElement]:
        return [tuple(e) for e in itertools.product(*(range(m) for m in self.orders))]

    def index(self, a: Sequence[int]) -> int:
        out = 0
        for v, m in zip(self.reduce(a), self.orders):
            out = out * m + v
        return out

    def character(self, l: Sequence[int], a: Sequence[int]) -> complex:
        phase = sum(lj * aj / m for lj, aj, m in zip(l, a, self.orders))
        return cmath.exp(2j * math.pi * phase)


def psi0(group: FiniteAbelianGroup, g: tuple[Sequence[int], Sequence[int]],
         h: tuple[Sequence[int], Sequence[int]]) -> complex:
    """psi0((a, l), (a', l')) = l'(a)."""
    return group.character(h[1], g[0])


def delta(group: FiniteAbelianGroup, a: Sequence[int]) -> np.ndarray:
    out = np.zeros(group.card, dtype=complex)
    out[group.index(a)] = 1.0
    return out


def act_h2(group: FiniteAbelianGroup, el: tuple[complex, Sequence[int], Sequence[int]], phi) -> np.ndarray:
    """(U_(lambda; a, l) phi)(b) = lambda l(b) phi(a + b)."""
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (group.card,):
        raise DimensionError(f"function on F must have {group.card} values")
    lam, a, l = el
    out = np.empty(group.card, dtype=complex)
    for b in group.elements():
        shifted = tuple(x + y for x, y in zip(a, b))
        out[group.index(b)] = lam * group.character(l, b) * phi[group.index(shifted)]
    return out


# ---------------------------------------------------------------------------
#  The Heisenberg group of R^2N x F x F^
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtendedPoint:
    group: FiniteAbelianGroup
    v: np.ndarray
    a: FiniteElement
    l: FiniteElement

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "a", self.group.reduce(self.a))
        object.__setattr__(self, "l", self.group.reduce(self.l))

    def __add__(self, other: "ExtendedPoint") -> "ExtendedPoint":
        return ExtendedPoint(self.group, self.v + other.v,
                             tuple(x + y for x, y in zip(self.a, other.a)),
                             tuple(x + y for x, y in zip(self.l, other.l)))

    def __neg__(self) -> "ExtendedPoint":
        return ExtendedPoint(self.group, -self.v, tuple(-x for x in self.a), tuple(-x for x in self.l))

    def __sub__(self, other: "ExtendedPoint") -> "ExtendedPoint":
        return self + (-other)


def extended_cocycle(space: SymplecticSpace, group: FiniteAbelianGroup) -> Cocycle:
    """psi psi0 on (R^2N x F x F^)^2."""
    matrix = space.matrix

    def psi(p: ExtendedPoint, q: ExtendedPoint) -> complex:
        return cmath.exp(1j * math.pi * float(p.v @ matrix @ q.v)) * psi0(group, (p.a, p.l), (q.a, q.l))

    return psi


# ---------------------------------------------------------------------------
#  Lattice embeddings D in R^2N x F x F^
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtendedLattice:
    """Generator k is (vectors[:, k], a_part[:, k], l_part[:, k])."""

    space: SymplecticSpace
    group: FiniteAbelianGroup
    vectors: np.ndarray
    a_part: np.ndarray
    l_part: np.ndarray
    exact: sympy.ImmutableMatrix | None = None

    def __post_init__(self) -> None:
        k = len(self.group.orders)
        vectors = np.asarray(self.vectors, dtype=float)
        rank = vectors.shape[1]
        if vectors.shape[0] != self.space.dim:
            raise DimensionError(f"real parts must have length {self.space.dim}")
        if rank != self.space.dim:
            raise DimensionError("an embedded lattice with compact quotient has rank 2N")
        if abs(np.linalg.det(vectors)) < 1e-12:
            raise ParameterError("real parts of the generators do not span R^2N")
        mods = np.asarray(self.group.orders, dtype=np.int64).reshape(k, 1)
        a_part = np.asarray(self.a_part, dtype=np.int64).reshape(k, rank)
        l_part = np.asarray(self.l_part, dtype=np.int64).reshape(k, rank)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "a_part", np.mod(a_part, mods) if k else a_part)
        object.__setattr__(self, "l_part", np.mod(l_part, mods) if k else l_part)

    @classmethod
    def build(cls, space: SymplecticSpace, group: FiniteAbelianGroup,
              generators: Sequence[tuple[Sequence, Sequence[int], Sequence[int]]]) -> "ExtendedLattice":
        columns = [g[0] for g in generators]
        rows = np.asarray(columns, dtype=object).T
        exact = to_exact(rows)
        vectors = to_float(exact if exact is not None else rows)
        k = len(group.orders)
        a_part = np.array([list(g[1]) for g in generators], dtype=np.int64).reshape(len(generators), k).T
        l_part = np.array([list(g[2]) for g in generators], dtype=np.int64).reshape(len(generators), k).T
        return cls(space, group, vectors, a_part, l_part, exact)

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    @property
    def N(self) -> int:
        return self.space.N

    def point(self, n: Sequence[int]) -> np.ndarray:
        return self.vectors @ np.asarray(n, dtype=float)

    def a_of(self, n: Sequence[int]) -> FiniteElement:
        return self.group.reduce(self.a_part @ np.asarray(n, dtype=np.int64))

    def l_of(self, n: Sequence[int]) -> FiniteElement:
        return self.group.reduce(self.l_part @ np.asarray(n, dtype=np.int64))

    def key(self, n: Sequence[int]) -> FiniteElement:
        """Image of n in F x F^, flattened as (a..., l...)."""
        return self.a_of(n) + self.l_of(n)

    def extended_point(self, n: Sequence[int]) -> ExtendedPoint:
        return ExtendedPoint(self.group, self.point(n), self.a_of(n), self.l_of(n))

    def gram_matrix(self) -> np.ndarray:
        """A_D for the real parts."""
        m = self.vectors.T @ self.space.matrix @ self.vectors
        return 0.5 * (m - m.T)

    def finite_pairing(self) -> np.ndarray:
        """P with psi0(g, h) = exp(2 pi*i g^T P h)."""
        inv = np.diag([1.0 / m for m in self.group.orders]) if self.group.orders else np.zeros((0, 0))
        return self.a_part.T.astype(float) @ inv @ self.l_part.astype(float)

    def coordinate_norm(self, k: KaehlerStructure) -> np.ndarray:
        p = self.vectors.T @ q_matrix(k) @ self.vectors
        return 0.5 * (p + p.T)


class KernelData(NamedTuple):
    embedding: LatticeEmbedding
    basis: np.ndarray
    representatives: list[IntVector]
    index: int


def _projection(D: ExtendedLattice) -> tuple[np.ndarray, np.ndarray]:
    return np.vstack([D.a_part, D.l_part]), np.array(D.group.orders * 2, dtype=np.int64)


def kernel_d0(D: ExtendedLattice) -> KernelData:
    """D0 = ker(D -> F x F^) with minimal-norm representatives of D/D0."""
    proj, mods = _projection(D)
    r = D.rank
    if len(mods) == 0:
        basis = np.eye(r, dtype=np.int64)
    else:
        system = np.hstack([proj, -np.diag(mods)])
        snf, _, right = smith_normal_form(system)
        rank = int(np.count_nonzero(np.diag(snf)))
        basis = right[:r, rank:]
        if basis.shape[1] != r:
            raise ParameterError("kernel of the projection does not have full rank")
    index = int(abs(sympy.Matrix(basis.tolist()).det()))
    if index != D.group.card ** 2:
        raise ParameterError(
            f"projection onto F x F^ is not surjective (index {index}, expected {D.group.card ** 2})"
        )

    if D.exact is not None:
        exact = sympy.ImmutableMatrix(D.exact * sympy.Matrix(basis.tolist()))
        embedding = LatticeEmbedding(D.space, to_float(exact), exact)
    else:
        embedding = LatticeEmbedding(D.space, D.vectors @ basis)

    norm = D.vectors.T @ D.vectors
    found: dict[FiniteElement, tuple[float, IntVector]] = {}
    radius = 0.5
    while len(found) < index:
        for n in enumerate_coordinates(norm, radius):
            key = D.key(n)
            candidate = (round(float(n @ norm @ n), 12), tuple(int(v) for v in n))
            if key not in found or candidate < found[key]:
                found[key] = candidate
        radius += 0.5
    reps = [rep for _, rep in sorted(found.values())]
    logger.debug("D0 of index %d with representatives %s", index, reps)
    return KernelData(embedding, basis, reps, index)


# ---------------------------------------------------------------------------
#  Cochains and the quantization form of D
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cochain:
    """c on D/D0, keyed by the image (a..., l...) of a coset in F x F^."""

    values: Mapping[FiniteElement, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", {tuple(int(v) for v in k): complex(c) for k, c in self.values.items()})

    @classmethod
    def trivial(cls, D: ExtendedLattice) -> "Cochain":
        return cls({D.key(rep): 1.0 for rep in kernel_d0(D).representatives})

    def __call__(self, key: FiniteElement) -> complex:
        try:
            return self.values[key]
        except KeyError:
            raise CochainError("cochain has no value on coset", (key,)) from None


@dataclass(frozen=True)
class CoboundaryTwist:
    """(g, h) -> c_g c_h / c_{g+h}."""

    lattice: ExtendedLattice
    cochain: Cochain

    def __call__(self, g: IntVector, h: IntVector) -> complex:
        key = self.lattice.key
        total = tuple(x + y for x, y in zip(g, h))
        return self.cochain(key(g)) * self.cochain(key(h)) / self.cochain(key(total))


def quantization_form(D: ExtendedLattice, c: Cochain) -> QuantizationForm:
    """alpha(g, h) = (c_g c_h / c_{g+h}) psi(g, h) psi0(g, h)."""
    matrix = D.gram_matrix() + 2.0 * D.finite_pairing()
    return QuantizationForm(matrix, CoboundaryTwist(D, c))


def _pairs(reps: Sequence[IntVector]) -> list[tuple[IntVector, IntVector]]:
    return [(g, h) for g in reps for h in reps]


def validate_cochain(D: ExtendedLattice, c: Cochain, kernel: KernelData | None = None,
                     seed: int = 0) -> QuantizationForm:
    """Build alpha and verify alpha(h, h) = 1 and alpha(g, h) alpha(h, g) = 1."""
    kernel = kernel or kernel_d0(D)
    zero_key = D.key((0,) * D.rank)
    if abs(c(zero_key) - 1.0) > PHASE_TOL:
        raise CochainError("cochain must equal 1 on D0", (zero_key,))
    for rep in kernel.representatives:
        value = c(D.key(rep))
        if abs(abs(value) - 1.0) > PHASE_TOL:
            raise CochainError("cochain values must be unimodular", (rep,))

    form = quantization_form(D, c)
    eye = [tuple(int(v) for v in row) for row in np.eye(D.rank, dtype=np.int64)]
    sums = [tuple(x + y for x, y in zip(eye[i], eye[j])) for i in range(D.rank) for j in range(i + 1, D.rank)]
    for h in eye + sums + list(kernel.representatives):
        if abs(form.alpha(h, h) - 1.0) > PHASE_TOL:
            raise CochainError("alpha(h, h) != 1", (h, h))

    rng = make_rng(seed)
    random_pairs = [
        (tuple(int(v) for v in rng.integers(-3, 4, size=D.rank)),
         tuple(int(v) for v in rng.integers(-3, 4, size=D.rank)))
        for _ in range(RANDOM_PAIRS)
    ]
    for g, h in _pairs(eye) + _pairs(kernel.representatives) + random_pairs:
        if abs(form.alpha(g, h) * form.alpha(h, g) - 1.0) > PHASE_TOL:
            raise CochainError("alpha is not antisymmetric", (g, h))
    return form


def solve_cochain(D: ExtendedLattice, max_candidates: int = MAX_SOLVER_CANDIDATES) -> Cochain:
    """Search phases among roots of unity of order 4 * exponent(F), first valid in key order."""
    kernel = kernel_d0(D)
    zero_key = D.key((0,) * D.rank)
    keys = sorted(D.key(rep) for rep in kernel.representatives if D.key(rep) != zero_key)
    order = 4 * D.group.exponent
    if order ** len(keys) > max_candidates:
        raise ParameterError(f"cochain search space {order}^{len(keys)} is too large")
    roots = [cmath.exp(2j * math.pi * j / order) for j in range(order)]
    for choice in itertools.product(range(order), repeat=len(keys)):
        values = {zero_key: 1.0 + 0j}
        values.update({key: roots[j] for key, j in zip(keys, choice)})
        candidate = Cochain(values)
        try:
            validate_cochain(D, candidate, kernel)
        except CochainError:
            continue
        logger.debug("cochain found: %s", choice)
        return candidate
    raise CochainError("no cochain among the searched roots of unity makes alpha antisymmetric")


# ---------------------------------------------------------------------------
#  Theta_{a,b}
# ---------------------------------------------------------------------------

def coset_factor(D: ExtendedLattice, c: Cochain, a: Sequence[int], b: Sequence[int], n: Sequence[int]) -> complex:
    """conj(c_h) conj(l_h(a)) delta_{a + a_h, b}."""
    group = D.group
    a_h = D.a_of(n)
    if group.reduce(tuple(x + y for x, y in zip(a, a_h))) != group.reduce(b):
        return 0j
    return (c(D.key(n)) * group.character(D.l_of(n), a)).conjugate()


def _theta_radius(D: ExtendedLattice, k: KaehlerStructure, radius: float | None, tolerance: float) -> tuple[np.ndarray, float]:
    if D.N != k.N:
        raise DimensionError("Kaehler structure and lattice have different N")
    norm = D.coordinate_norm(k)
    if radius is None:
        radius = radius_for_tolerance(norm, 0.5 * math.pi, tolerance)
    return norm, radius


def theta_ab(D: ExtendedLattice, c: Cochain, k: KaehlerStructure, a: Sequence[int], b: Sequence[int],
             radius: float | None = None, form: QuantizationForm | None = None,
             tolerance: float = TAIL_TOLERANCE) -> TorusElement:
    """sum_h conj(c_h) conj(l_h(a)) delta_{a+a_h,b} exp(-pi/2 H(h'_, h'_)) e(h), without prefactor."""
    form = form or validate_cochain(D, c)
    norm, radius = _theta_radius(D, k, radius, tolerance)
    terms = {}
    for n in enumerate_coordinates(norm, radius):
        factor = coset_factor(D, c, a, b, n)
        if factor:
            terms[tuple(int(v) for v in n)] = factor * math.exp(-0.5 * math.pi * float(n @ norm @ n))
    return TorusElement(form, terms)


def theta_ab_tail_bound(D: ExtendedLattice, k: KaehlerStructure, radius: float) -> float:
    return lattice_tail_bound(D.coordinate_norm(k), radius, 0.5 * math.pi)


def theta_ab_factorized(D: ExtendedLattice, c: Cochain, k: KaehlerStructure, a: Sequence[int], b: Sequence[int],
                        radius: float | None = None, form: QuantizationForm | None = None,
                        tolerance: float = TAIL_TOLERANCE) -> TorusElement:
    """Scalar products conj(c_h) <f_T, U_h f_T> <delta_a, U_(1; a_h, l_h) delta_b>, prefactor included."""
    form = form or validate_cochain(D, c)
    norm, radius = _theta_radius(D, k, radius, tolerance)
    group = D.group
    f_t = PacketSum.theta_vector(k.siegel)
    delta_a = delta(group, a)
    delta_b = delta(group, b)
    terms = {}
    for n in enumerate_coordinates(norm, radius):
        moved = act_h2(group, (1.0, D.a_of(n), D.l_of(n)), delta_b)
        finite = np.vdot(moved, delta_a)
        if abs(finite) == 0:
            continue
        gaussian = model1_inner(f_t, model1_act(VectorHeisenbergElement.translation(D.point(n)), f_t))
        terms[tuple(int(v) for v in n)] = c(D.key(n)).conjugate() * gaussian * finite
    return TorusElement(form, terms)


def d0_multiplier(D: ExtendedLattice, c: Cochain, k: KaehlerStructure,
                  form: QuantizationForm | None = None) -> Multiplier:
    """g -> [C_g; x_g, g] on the D0 basis, H pulled back through the real parts."""
    form = form or validate_cochain(D, c)
    basis = kernel_d0(D).basis
    lifts = tuple(gaussian_lift(k, D.vectors, form, basis[:, j]) for j in range(basis.shape[1]))
    return Multiplier(form, basis, lifts)


def verify_theta_ab_invariance(theta: TorusElement, D: ExtendedLattice, k: KaehlerStructure,
                               g: Sequence[int]) -> CheckResult:
    zero_key = D.key((0,) * D.rank)
    if D.key(g) != zero_key:
        raise ParameterError(f"{tuple(g)} is not in D0")
    lifted = gaussian_lift(k, D.vectors, theta.form, g)
    return CheckResult(invariance_residual(lifted, theta), 0.0)


def basis_rank_check(D: ExtendedLattice, c: Cochain, k: KaehlerStructure, radius: float | None = None) -> int:
    """Rank of the Theta_{a,b} coefficient vectors restricted to representatives of D/D0."""
    kernel = kernel_d0(D)
    form = validate_cochain(D, c, kernel)
    group = D.group
    rows = []
    for a in group.elements():
        for b in group.elements():
            theta = theta_ab(D, c, k, a, b, radius, form)
            rows.append([theta.coefficient(rep) for rep in kernel.representatives])
    matrix = np.asarray(rows, dtype=complex)
    rank = int(np.linalg.matrix_rank(matrix, tol=1e-8 * max(1.0, float(np.max(np.abs(matrix))))))
    if rank != kernel.index:
        logger.warning("theta family has rank %d, expected %d", rank, kernel.index)
    return rank

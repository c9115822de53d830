import cmath
import itertools
import logging
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
import sympy

from qtheta.errors import DimensionError, FormMismatchError, MultiplierError, ParameterError
from qtheta.lattices import IntVector, SymplecticSpace, enumerate_coordinates
from qtheta.numerics import make_rng, min_eigenvalue
from qtheta.torus_algebra import (
    QuantizationForm,
    TorusCharacterAction,
    TorusElement,
    apply_character,
    multiply,
)

logger = logging.getLogger("qtheta.heisenberg")

Cocycle = Callable[[Any, Any], complex]

CHECK_TOL = 1e-12
AMPLE_EIGENVALUE = -1e-10
RANDOM_PAIRS = 50


def symplectic_cocycle(space: SymplecticSpace) -> Cocycle:
    """psi(x, y) = exp(pi*i * A(x, y))."""
    matrix = space.matrix

    def psi(x, y) -> complex:
        return cmath.exp(1j * np.pi * float(np.asarray(x, dtype=float) @ matrix @ np.asarray(y, dtype=float)))

    return psi


def cocycle_check(psi: Cocycle, samples: Sequence[tuple], tol: float = CHECK_TOL) -> bool:
    if not samples:
        return True
    first = samples[0][0]
    zero = first - first
    if abs(psi(zero, zero) - 1) > tol:
        raise ParameterError("cocycle must satisfy psi(0, 0) = 1")
    for x, y, z in samples:
        lhs = psi(x, y) * psi(x + y, z)
        rhs = psi(x, y + z) * psi(y, z)
        if abs(lhs - rhs) > tol:
            logger.warning("cocycle identity fails by %.3e", abs(lhs - rhs))
            return False
    return True


# ---------------------------------------------------------------------------
#  G(K, psi)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VectorHeisenbergElement:
    """(lambda, x) with x in K; x needs only + and unary -."""

    lam: complex
    x: Any

    @classmethod
    def of(cls, lam: complex, x) -> "VectorHeisenbergElement":
        if isinstance(x, (list, tuple, np.ndarray)):
            x = np.asarray(x, dtype=float)
        return cls(complex(lam), x)

    @classmethod
    def translation(cls, y) -> "VectorHeisenbergElement":
        return cls.of(1.0, y)


def compose_vector(a: VectorHeisenbergElement, b: VectorHeisenbergElement, psi: Cocycle) -> VectorHeisenbergElement:
    if isinstance(a.x, np.ndarray) and np.shape(a.x) != np.shape(b.x):
        raise DimensionError("Heisenberg elements live over different spaces")
    return VectorHeisenbergElement(a.lam * b.lam * psi(a.x, b.x), a.x + b.x)


def inverse_vector(a: VectorHeisenbergElement, psi: Cocycle) -> VectorHeisenbergElement:
    return VectorHeisenbergElement(1.0 / (a.lam * psi(a.x, -a.x)), -a.x)


def commutator_vector(a: VectorHeisenbergElement, b: VectorHeisenbergElement, psi: Cocycle) -> VectorHeisenbergElement:
    ab = compose_vector(a, b, psi)
    ab_ainv = compose_vector(ab, inverse_vector(a, psi), psi)
    return compose_vector(ab_ainv, inverse_vector(b, psi), psi)


def epsilon(psi: Cocycle, x, y) -> complex:
    return psi(x, y) / psi(y, x)


# ---------------------------------------------------------------------------
#  Torus Heisenberg group, left representatives [c; x, g]
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TorusHeisenbergElement:
    form: QuantizationForm
    c: complex
    x: TorusCharacterAction
    g: IntVector

    def __post_init__(self) -> None:
        g = tuple(int(v) for v in self.g)
        if len(g) != self.form.rank or self.x.w.shape != (self.form.rank,):
            raise DimensionError(f"element must have rank {self.form.rank}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "c", complex(self.c))

    @classmethod
    def identity(cls, form: QuantizationForm) -> "TorusHeisenbergElement":
        return cls(form, 1.0, TorusCharacterAction.trivial(form.rank), (0,) * form.rank)


def _require_same_torus(a: TorusHeisenbergElement, b: TorusHeisenbergElement) -> None:
    if not a.form.compatible(b.form):
        raise FormMismatchError("torus Heisenberg elements over different tori")


def compose_torus(a: TorusHeisenbergElement, b: TorusHeisenbergElement) -> TorusHeisenbergElement:
    """[c'; x', g'][c; x, g] = [c'c g(x') alpha(g', g); x'x, g' + g]."""
    _require_same_torus(a, b)
    c = a.c * b.c * a.x(b.g) * a.form.alpha(a.g, b.g)
    g = tuple(p + q for p, q in zip(a.g, b.g))
    return TorusHeisenbergElement(a.form, c, a.x * b.x, g)


def inverse_torus(a: TorusHeisenbergElement) -> TorusHeisenbergElement:
    neg = tuple(-v for v in a.g)
    c = a.x(a.g) / (a.c * a.form.alpha(a.g, neg))
    return TorusHeisenbergElement(a.form, c, a.x.inverse(), neg)


def commutator_torus(a: TorusHeisenbergElement, b: TorusHeisenbergElement) -> TorusHeisenbergElement:
    return compose_torus(compose_torus(compose_torus(a, b), inverse_torus(a)), inverse_torus(b))


def torus_cocycle(a: TorusHeisenbergElement, b: TorusHeisenbergElement) -> complex:
    """psi((x', g'), (x, g)) = g(x') alpha(g', g)."""
    return a.x(b.g) * a.form.alpha(a.g, b.g)


def epsilon_torus(a: TorusHeisenbergElement, b: TorusHeisenbergElement) -> complex:
    return torus_cocycle(a, b) / torus_cocycle(b, a)


def apply_heisenberg(a: TorusHeisenbergElement, f: TorusElement) -> TorusElement:
    """f -> c e(g) x*(f)."""
    if not a.form.compatible(f.form):
        raise FormMismatchError("Heisenberg element and function live on different tori")
    shift = TorusElement.monomial(f.form, a.g, a.c)
    return multiply(shift, apply_character(a.x, f))


# ---------------------------------------------------------------------------
#  Multipliers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Multiplier:
    """Lift of B (columns of `basis`, in D coordinates) given on generators."""

    form: QuantizationForm
    basis: np.ndarray
    lifts: tuple[TorusHeisenbergElement, ...]

    def __post_init__(self) -> None:
        basis = np.asarray(self.basis, dtype=np.int64).reshape(self.form.rank, -1)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "lifts", tuple(self.lifts))
        if len(self.lifts) != basis.shape[1]:
            raise DimensionError("one lift per basis vector of B is required")
        for k, element in enumerate(self.lifts):
            if element.g != tuple(int(v) for v in basis[:, k]):
                raise MultiplierError("lift does not project onto its generator", (k,))
        if basis.shape[1] and np.linalg.matrix_rank(basis) != basis.shape[1]:
            raise MultiplierError("projection of B to D is not injective")

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


def lift(m: Multiplier, n: Sequence[int]) -> TorusHeisenbergElement:
    """Lift of sum n_k b_k: generator powers composed in coordinate order."""
    if len(n) != m.rank:
        raise DimensionError(f"B coordinates must have length {m.rank}")
    out = TorusHeisenbergElement.identity(m.form)
    for k, count in enumerate(n):
        step = m.lifts[k] if count >= 0 else inverse_torus(m.lifts[k])
        for _ in range(abs(int(count))):
            out = compose_torus(out, step)
    return out


def _close(a: TorusHeisenbergElement, b: TorusHeisenbergElement, tol: float) -> bool:
    scale = max(1.0, abs(a.c), abs(b.c))
    return (
        a.g == b.g
        and abs(a.c - b.c) <= tol * scale
        and np.allclose(a.x.w, b.x.w, atol=tol, rtol=0.0)
    )


def check_homomorphism(m: Multiplier, seed: int = 0, tol: float = 1e-10) -> None:
    """Raise MultiplierError naming the first pair with lift(b)lift(b') != lift(b+b')."""
    k = m.rank
    eye = np.eye(k, dtype=np.int64)
    pairs = [(tuple(eye[i]), tuple(eye[j])) for i in range(k) for j in range(k)]
    rng = make_rng(seed)
    for _ in range(RANDOM_PAIRS if k else 0):
        pairs.append((tuple(rng.integers(-3, 4, size=k)), tuple(rng.integers(-3, 4, size=k))))
    for n1, n2 in pairs:
        total = tuple(int(p + q) for p, q in zip(n1, n2))
        if not _close(compose_torus(lift(m, n1), lift(m, n2)), lift(m, total), tol):
            raise MultiplierError("lift is not a homomorphism",
                                  (tuple(int(v) for v in n1), tuple(int(v) for v in n2)))


@dataclass(frozen=True, eq=False)
class StructureForm:
    """Values <b_i, b_j> on generator pairs, extended bimultiplicatively."""

    values: np.ndarray

    @property
    def rank(self) -> int:
        return self.values.shape[0]

    def value(self, n1: Sequence[int], n2: Sequence[int]) -> complex:
        out = 1.0 + 0j
        for i, p in enumerate(n1):
            for j, q in enumerate(n2):
                if p and q:
                    out *= complex(self.values[i, j]) ** (int(p) * int(q))
        return out

    def log_modulus(self) -> np.ndarray:
        return np.log(np.abs(self.values))


def structure_form(m: Multiplier, seed: int = 0, tol: float = 1e-10) -> StructureForm:
    check_homomorphism(m, seed=seed, tol=tol)
    k = m.rank
    values = np.ones((k, k), dtype=complex)
    for i, j in itertools.product(range(k), repeat=2):
        values[i, j] = torus_cocycle(m.lifts[i], m.lifts[j])
    for i, j in itertools.product(range(k), repeat=2):
        if abs(values[i, j] - values[j, i]) > tol * max(1.0, abs(values[i, j])):
            raise MultiplierError("structure form is not symmetric", (i, j))
    return StructureForm(values)


def is_ample(m: Multiplier) -> bool:
    form = structure_form(m)
    if form.rank == 0:
        return False
    log_mod = form.log_modulus()
    sym = 0.5 * (log_mod + log_mod.T)
    return bool(np.all(np.linalg.eigvalsh(sym) < AMPLE_EIGENVALUE))


# ---------------------------------------------------------------------------
#  Gamma(L): invariant truncated theta series
# ---------------------------------------------------------------------------

def _coset_key(adjugate: np.ndarray, det: int, h: np.ndarray) -> IntVector:
    return tuple(int(v) for v in np.mod(adjugate @ h, det))


def coset_representatives(basis: np.ndarray) -> list[IntVector]:
    """Minimal-norm representatives of D/B in lexicographic order among ties."""
    exact = sympy.Matrix(basis.tolist())
    det = int(abs(exact.det()))
    if det == 0:
        raise MultiplierError("B does not have finite index in D")
    adjugate = np.array(exact.adjugate().tolist(), dtype=np.int64)
    rank = basis.shape[0]
    found: dict[IntVector, tuple[int, IntVector]] = {}
    radius = 1.0
    while len(found) < det:
        for h in enumerate_coordinates(np.eye(rank), radius):
            key = _coset_key(adjugate, det, h)
            candidate = (int(h @ h), tuple(int(v) for v in h))
            if key not in found or candidate < found[key]:
                found[key] = candidate
        radius += 1.0
    return [rep for _, rep in sorted(found.values())]


def gamma_basis(m: Multiplier, radius: float) -> list[TorusElement]:
    """One invariant series per coset representative r of D/B, with a_r = 1.

    Invariance under [c_b; w_b, b] forces a_{b+r} = c_b exp(w_b . r) alpha(b, r) a_r.
    """
    if m.rank != m.form.rank:
        raise MultiplierError("B must have finite index in D")
    if not is_ample(m):
        raise MultiplierError("multiplier is not ample; theta coefficients would not decay")
    basis = m.basis
    exact = sympy.Matrix(basis.tolist())
    det = int(exact.det())
    adjugate = np.array(exact.adjugate().tolist(), dtype=np.int64)
    reps = coset_representatives(basis)
    rep_of = {_coset_key(adjugate, abs(det), np.asarray(r)): r for r in reps}

    form = structure_form(m)
    inv_basis = np.linalg.inv(basis.astype(float))
    gram = inv_basis.T @ (-0.5 * (form.log_modulus() + form.log_modulus().T)) @ inv_basis
    if min_eigenvalue(gram) <= 0:
        raise MultiplierError("structure form does not define a decaying norm")

    terms: dict[IntVector, dict[IntVector, complex]] = {r: {} for r in reps}
    for h in enumerate_coordinates(gram, radius):
        r = rep_of[_coset_key(adjugate, abs(det), h)]
        n = (adjugate @ (h - np.asarray(r))) // det
        lifted = lift(m, tuple(int(v) for v in n))
        value = lifted.c * lifted.x(r) * m.form.alpha(lifted.g, r)
        terms[r][tuple(int(v) for v in h)] = value
    logger.debug("gamma basis of dimension %d at radius %.2f", len(reps), radius)
    return [TorusElement(m.form, terms[r]) for r in reps]

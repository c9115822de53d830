import cmath
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from qtheta.errors import DimensionError, FormMismatchError, ParameterError
from qtheta.lattices import IntVector, enumerate_coordinates

logger = logging.getLogger("qtheta.torus_algebra")

# canonical form drops only coefficients this small
ZERO_CUTOFF = 1e-300


class PhaseTwist(Protocol):
    def __call__(self, g: IntVector, h: IntVector) -> complex: ...


def _vec(h: Sequence[int]) -> IntVector:
    return tuple(int(v) for v in h)


def _add(g: IntVector, h: IntVector) -> IntVector:
    return tuple(a + b for a, b in zip(g, h))


def _neg(h: IntVector) -> IntVector:
    return tuple(-a for a in h)


@dataclass(frozen=True, eq=False)
class QuantizationForm:
    """alpha(g, h) = twist(g, h) * exp(pi*i * g^T M h).

    M is the Gram form A_D for a plain lattice embedding. Extended lattices
    pass a non-antisymmetric M together with a coboundary twist.
    """

    matrix: np.ndarray
    twist: PhaseTwist | None = None

    def __post_init__(self) -> None:
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"quantization form must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def rank(self) -> int:
        return self.matrix.shape[0]

    def alpha(self, g: Sequence[int], h: Sequence[int]) -> complex:
        g_arr = np.asarray(g, dtype=float)
        h_arr = np.asarray(h, dtype=float)
        value = cmath.exp(1j * np.pi * float(g_arr @ self.matrix @ h_arr))
        if self.twist is not None:
            value *= self.twist(_vec(g), _vec(h))
        return value

    def compatible(self, other: "QuantizationForm") -> bool:
        return self is other or (
            self.twist == other.twist and np.array_equal(self.matrix, other.matrix)
        )


@dataclass(frozen=True, eq=False)
class TorusElement:
    form: QuantizationForm
    terms: Mapping[IntVector, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[IntVector, complex] = {}
        for h, value in self.terms.items():
            key = _vec(h)
            if len(key) != self.form.rank:
                raise DimensionError(f"exponent {key} has wrong rank, expected {self.form.rank}")
            value = complex(value)
            if abs(value) >= ZERO_CUTOFF:
                clean[key] = value
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, form: QuantizationForm, h: Sequence[int], coefficient: complex = 1.0) -> "TorusElement":
        return cls(form, {_vec(h): coefficient})

    @classmethod
    def unit(cls, form: QuantizationForm) -> "TorusElement":
        return cls.monomial(form, (0,) * form.rank)

    @property
    def support(self) -> list[IntVector]:
        return sorted(self.terms)

    def coefficient(self, h: Sequence[int]) -> complex:
        return self.terms.get(_vec(h), 0j)

    def scale(self, c: complex) -> "TorusElement":
        return TorusElement(self.form, {h: c * v for h, v in self.terms.items()})

    def __add__(self, other: "TorusElement") -> "TorusElement":
        _require_same_form(self, other)
        out = dict(self.terms)
        for h, v in other.terms.items():
            out[h] = out.get(h, 0j) + v
        return TorusElement(self.form, out)

    def __sub__(self, other: "TorusElement") -> "TorusElement":
        return self + other.scale(-1.0)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True, eq=False)
class TorusCharacterAction:
    """The point x of T(D, 1) acting by x*(e(h)) = exp(w^T h) e(h)."""

    w: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", np.asarray(self.w, dtype=complex).ravel())

    @classmethod
    def trivial(cls, rank: int) -> "TorusCharacterAction":
        return cls(np.zeros(rank, dtype=complex))

    def __call__(self, h: Sequence[int]) -> complex:
        return complex(np.exp(self.w @ np.asarray(h, dtype=float)))

    def __mul__(self, other: "TorusCharacterAction") -> "TorusCharacterAction":
        return TorusCharacterAction(self.w + other.w)

    def inverse(self) -> "TorusCharacterAction":
        return TorusCharacterAction(-self.w)


def _require_same_form(a: TorusElement, b: TorusElement) -> None:
    if not a.form.compatible(b.form):
        raise FormMismatchError("torus elements carry different quantization forms")


# ---------------------------------------------------------------------------
#  Algebra operations
# ---------------------------------------------------------------------------

def multiply(a: TorusElement, b: TorusElement) -> TorusElement:
    _require_same_form(a, b)
    alpha = a.form.alpha
    out: dict[IntVector, complex] = {}
    for g in a.support:
        ag = a.terms[g]
        for h in b.support:
            key = _add(g, h)
            out[key] = out.get(key, 0j) + ag * b.terms[h] * alpha(g, h)
    return TorusElement(a.form, out)


def star(a: TorusElement) -> TorusElement:
    """Sum conj(a_h) e(h)^{-1}, with e(h)^{-1} = conj(alpha(h, -h)) e(-h)."""
    alpha = a.form.alpha
    return TorusElement(
        a.form,
        {_neg(h): (v * alpha(h, _neg(h))).conjugate() for h, v in a.terms.items()},
    )


def apply_character(x: TorusCharacterAction, a: TorusElement) -> TorusElement:
    if x.w.shape != (a.form.rank,):
        raise DimensionError(f"log-character has length {x.w.shape[0]}, expected {a.form.rank}")
    return TorusElement(a.form, {h: x(h) * v for h, v in a.terms.items()})


def max_coefficient_difference(a: TorusElement, b: TorusElement, keys: Iterable[IntVector] | None = None) -> float:
    """max |a_h - b_h| over keys (default: union of supports)."""
    _require_same_form(a, b)
    if keys is None:
        keys = set(a.terms) | set(b.terms)
    residual = 0.0
    for h in keys:
        residual = max(residual, abs(a.coefficient(h) - b.coefficient(h)))
    return residual


# ---------------------------------------------------------------------------
#  Finite sections of the regular representation on l2(D)
# ---------------------------------------------------------------------------

def section_indices(rank: int, radius: float, gram=None) -> list[IntVector]:
    if gram is None:
        gram = np.eye(rank)
    return [tuple(int(v) for v in row) for row in enumerate_coordinates(gram, radius)]


def regular_rep_matrix(a: TorusElement, radius: float, gram=None,
                       indices: Sequence[IntVector] | None = None) -> np.ndarray:
    """Left multiplication by a on span{delta_k}, k in the enumeration of radius.

    Column k holds a * delta_k = sum_h a_h alpha(h, k) delta_{h+k}, cut to the
    index set. gram is the coordinate norm used for the enumeration.
    """
    if indices is None:
        indices = section_indices(a.form.rank, radius, gram)
    if not indices:
        raise ParameterError("regular representation section has no indices")
    position = {k: i for i, k in enumerate(indices)}
    alpha = a.form.alpha
    matrix = np.zeros((len(indices), len(indices)), dtype=complex)
    for col, k in enumerate(indices):
        for h, v in a.terms.items():
            row = position.get(_add(h, k))
            if row is not None:
                matrix[row, col] += v * alpha(h, k)
    logger.debug("regular representation section of size %d", len(indices))
    return matrix


def interior_indices(a: TorusElement, indices: Sequence[IntVector]) -> list[int]:
    """Positions of k whose translates k + h, h in support(a), stay in the index set."""
    present = set(indices)
    return [
        i for i, k in enumerate(indices)
        if all(_add(h, k) in present for h in a.terms)
    ]

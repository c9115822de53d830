import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from qtheta.errors import DimensionError, ParameterError, SingularFormError
from qtheta.numerics import guarded_inv, min_eigenvalue

logger = logging.getLogger("qtheta.lattices")

IntVector = tuple[int, ...]

PAIR_INTEGRALITY_TOL = 1e-12
_MAX_DENOMINATOR = 10**6


# ---------------------------------------------------------------------------
#  Exact / float matrix plumbing
# ---------------------------------------------------------------------------

def _exact_entry(value) -> sympy.Rational | None:
    if isinstance(value, sympy.Basic):
        return sympy.Rational(value) if value.is_rational else None
    if isinstance(value, (int, np.integer)):
        return sympy.Integer(int(value))
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        frac = Fraction(value.strip())
        return sympy.Rational(frac.numerator, frac.denominator)
    if isinstance(value, (float, np.floating)):
        frac = Fraction(float(value)).limit_denominator(_MAX_DENOMINATOR)
        if float(frac) == float(value):
            return sympy.Rational(frac.numerator, frac.denominator)
        return None
    return None


def to_exact(values) -> sympy.ImmutableMatrix | None:
    """Rational matrix for `values`, or None when some entry is not a small rational."""
    if isinstance(values, sympy.MatrixBase):
        return sympy.ImmutableMatrix(values)
    rows = [list(r) for r in np.atleast_2d(np.asarray(values, dtype=object))]
    out = []
    for row in rows:
        exact_row = []
        for v in row:
            e = _exact_entry(v)
            if e is None:
                return None
            exact_row.append(e)
        out.append(exact_row)
    return sympy.ImmutableMatrix(out)


def to_float(values) -> np.ndarray:
    if isinstance(values, sympy.MatrixBase):
        return np.array(values.tolist(), dtype=float)
    arr = np.atleast_2d(np.asarray(values, dtype=object))
    out = np.empty(arr.shape, dtype=float)
    for idx, v in np.ndenumerate(arr):
        out[idx] = float(Fraction(v.strip())) if isinstance(v, str) else float(v)
    return out


# ---------------------------------------------------------------------------
#  Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymplecticSpace:
    N: int
    matrix: np.ndarray
    exact: sympy.ImmutableMatrix | None = None

    def __post_init__(self) -> None:
        if self.N < 1:
            raise DimensionError("half-dimension N must be positive")
        if self.matrix.shape != (2 * self.N, 2 * self.N):
            raise DimensionError(f"form must be {2 * self.N}x{2 * self.N}, got {self.matrix.shape}")
        if self.exact is not None:
            if self.exact.T != -self.exact:
                raise ParameterError("symplectic form is not antisymmetric")
            if self.exact.det() == 0:
                raise SingularFormError("symplectic form is degenerate")
        else:
            if not np.array_equal(self.matrix.T, -self.matrix):
                raise ParameterError("symplectic form is not antisymmetric")
            if abs(np.linalg.det(self.matrix)) <= 0:
                raise SingularFormError("symplectic form is degenerate")

    @classmethod
    def from_matrix(cls, values) -> "SymplecticSpace":
        exact = to_exact(values)
        matrix = to_float(exact if exact is not None else values)
        return cls(N=matrix.shape[0] // 2, matrix=matrix, exact=exact)

    @classmethod
    def standard(cls, N: int) -> "SymplecticSpace":
        return cls(N=N, matrix=to_float(_standard_exact(N)), exact=_standard_exact(N))

    @property
    def dim(self) -> int:
        return 2 * self.N

    def is_standard(self) -> bool:
        return np.array_equal(self.matrix, standard_form(self.N))


def _standard_exact(N: int) -> sympy.ImmutableMatrix:
    eye = sympy.eye(N)
    zero = sympy.zeros(N, N)
    return sympy.ImmutableMatrix(sympy.BlockMatrix([[zero, eye], [-eye, zero]]).as_explicit())


def standard_form(N: int) -> np.ndarray:
    eye = np.eye(N)
    zero = np.zeros((N, N))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True, eq=False)
class LatticeEmbedding:
    space: SymplecticSpace
    generators: np.ndarray
    exact: sympy.ImmutableMatrix | None = None

    def __post_init__(self) -> None:
        if self.generators.ndim != 2 or self.generators.shape[0] != self.space.dim:
            raise DimensionError(
                f"generator matrix must have {self.space.dim} rows, got shape {self.generators.shape}"
            )
        if np.linalg.matrix_rank(self.generators) != self.generators.shape[1]:
            raise SingularFormError("lattice generators are linearly dependent")

    @classmethod
    def from_columns(cls, space: SymplecticSpace, columns: Sequence[Sequence]) -> "LatticeEmbedding":
        """Build from a list of generator columns (images of the basis vectors)."""
        rows = np.asarray(columns, dtype=object).T
        exact = to_exact(rows)
        return cls(space=space, generators=to_float(exact if exact is not None else rows), exact=exact)

    @classmethod
    def from_matrix(cls, space: SymplecticSpace, matrix) -> "LatticeEmbedding":
        exact = to_exact(matrix)
        return cls(space=space, generators=to_float(exact if exact is not None else matrix), exact=exact)

    @property
    def rank(self) -> int:
        return self.generators.shape[1]

    def point(self, n: Sequence[int]) -> np.ndarray:
        return self.generators @ np.asarray(n, dtype=float)

    def is_exact(self) -> bool:
        return self.exact is not None and self.space.exact is not None


@dataclass(frozen=True, eq=False)
class GramForm:
    matrix: np.ndarray
    exact: sympy.ImmutableMatrix | None = None

    @property
    def rank(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
#  Operations
# ---------------------------------------------------------------------------

def pair(space: SymplecticSpace, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (space.dim,) or y.shape != (space.dim,):
        raise DimensionError(f"vectors must have length {space.dim}")
    return float(x @ space.matrix @ y)


def gram(embedding: LatticeEmbedding) -> GramForm:
    if embedding.is_exact():
        exact = sympy.ImmutableMatrix(embedding.exact.T * embedding.space.exact * embedding.exact)
        return GramForm(matrix=to_float(exact), exact=exact)
    g = embedding.generators
    m = g.T @ embedding.space.matrix @ g
    return GramForm(matrix=0.5 * (m - m.T))


def dual_lattice(embedding: LatticeEmbedding) -> LatticeEmbedding:
    """D! = {x | A(x, y) in Z for all y in D}, in the basis with A(g_k, h_l) = delta_kl."""
    space = embedding.space
    if embedding.rank != space.dim:
        raise DimensionError("dual lattice needs a full-rank embedding (r = 2N)")
    if embedding.is_exact():
        m = embedding.exact.T * space.exact
        if m.det() == 0:
            raise SingularFormError("Gram form of the lattice is degenerate")
        dual_exact = sympy.ImmutableMatrix(-m.inv())
        return LatticeEmbedding(space=space, generators=to_float(dual_exact), exact=dual_exact)
    m = embedding.generators.T @ space.matrix
    return LatticeEmbedding(space=space, generators=-guarded_inv(m))


def morita_dual_form(form: GramForm) -> GramForm:
    """A! = -A_D^{-1}."""
    if form.exact is not None:
        if form.exact.det() == 0:
            raise SingularFormError("Gram form is singular")
        exact = sympy.ImmutableMatrix(-form.exact.inv())
        return GramForm(matrix=to_float(exact), exact=exact)
    inv = guarded_inv(form.matrix)
    return GramForm(matrix=-0.5 * (inv - inv.T))


def enumerate_coordinates(form, radius: float) -> np.ndarray:
    """All integer n with n^T P n <= radius^2, lexicographic order, shape (M, r)."""
    if radius <= 0:
        raise ParameterError("enumeration radius must be positive")
    form = np.atleast_2d(np.asarray(form, dtype=float))
    lam = min_eigenvalue(form)
    if lam <= 0:
        raise SingularFormError("enumeration norm is not positive definite")
    rank = form.shape[0]
    bound = int(math.floor(radius / math.sqrt(lam) + 1e-9))
    axis = range(-bound, bound + 1)
    coords = np.array(list(itertools.product(axis, repeat=rank)), dtype=np.int64).reshape(-1, rank)
    values = np.einsum("ij,jk,ik->i", coords, form, coords)
    limit = radius * radius * (1.0 + 1e-12) + 1e-12
    return coords[values <= limit]


def enumerate_lattice(embedding: LatticeEmbedding, radius: float, norm=None) -> list[IntVector]:
    if norm is None:
        norm = np.eye(embedding.space.dim)
    norm = np.asarray(norm, dtype=float)
    if norm.shape != (embedding.space.dim, embedding.space.dim):
        raise DimensionError("norm must be a quadratic form on the ambient space")
    if min_eigenvalue(norm) <= 0:
        raise SingularFormError("enumeration norm is not positive definite")
    g = embedding.generators
    coords = enumerate_coordinates(g.T @ norm @ g, radius)
    logger.debug("enumerated %d lattice points within radius %.3f", len(coords), radius)
    return [tuple(int(v) for v in row) for row in coords]


def covolume(embedding: LatticeEmbedding) -> float:
    if embedding.rank != embedding.space.dim:
        raise DimensionError("covolume needs a full-rank embedding (r = 2N)")
    if embedding.exact is not None:
        return float(abs(embedding.exact.det()))
    return float(abs(np.linalg.det(embedding.generators)))


def pairing_defect(embedding: LatticeEmbedding, dual: LatticeEmbedding) -> float:
    """max distance of A(G! y, G h) from the nearest integer over basis pairs."""
    m = dual.generators.T @ embedding.space.matrix @ embedding.generators
    return float(np.max(np.abs(m - np.rint(m))))


def same_subgroup(a: LatticeEmbedding, b: LatticeEmbedding) -> bool:
    """True when the two generator sets span the same subgroup."""
    if a.rank != b.rank:
        return False
    if a.is_exact() and b.is_exact():
        change = a.exact.inv() * b.exact if a.exact.is_square else None
        return change is not None and all(v.is_integer for v in change) and abs(change.det()) == 1
    change = np.linalg.lstsq(a.generators, b.generators, rcond=None)[0]
    return bool(np.allclose(change, np.rint(change), atol=1e-9)
                and abs(abs(np.linalg.det(np.rint(change))) - 1) < 1e-9)


# ---------------------------------------------------------------------------
#  Symplectic basis and Smith normal form
# ---------------------------------------------------------------------------

def symplectic_basis(form) -> np.ndarray:
    """Real basis B (columns e_1..e_N, f_1..f_N) with B^T A B standard."""
    a = np.atleast_2d(np.asarray(form, dtype=float))
    dim = a.shape[0]
    if dim % 2 or not np.allclose(a, -a.T, atol=1e-12):
        raise ParameterError("symplectic basis needs an even-dimensional antisymmetric form")

    def omega(x, y):
        return float(x @ a @ y)

    remaining = [np.eye(dim)[:, i] for i in range(dim)]
    es: list[np.ndarray] = []
    fs: list[np.ndarray] = []
    while remaining:
        e = remaining.pop(0)
        pairings = [abs(omega(e, v)) for v in remaining]
        if not pairings or max(pairings) < 1e-12:
            raise SingularFormError("form is degenerate")
        v = remaining.pop(int(np.argmax(pairings)))
        f = v / omega(e, v)
        remaining = [w - omega(w, f) * e + omega(w, e) * f for w in remaining]
        es.append(e)
        fs.append(f)
    return np.column_stack(es + fs)


def smith_normal_form(matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (D, L, R) with D = L @ M @ R diagonal, L and R unimodular."""
    a = np.array(matrix, dtype=np.int64)
    rows, cols = a.shape
    left = np.eye(rows, dtype=np.int64)
    right = np.eye(cols, dtype=np.int64)

    for s in range(min(rows, cols)):
        while True:
            block = np.abs(a[s:, s:])
            if not block.any():
                return a, left, right
            masked = np.where(block > 0, block, np.iinfo(np.int64).max)
            i, j = np.unravel_index(np.argmin(masked), masked.shape)
            i, j = i + s, j + s
            a[[s, i]] = a[[i, s]]
            left[[s, i]] = left[[i, s]]
            a[:, [s, j]] = a[:, [j, s]]
            right[:, [s, j]] = right[:, [j, s]]

            pivot = a[s, s]
            clean = True
            for r in range(s + 1, rows):
                q = a[r, s] // pivot
                if q:
                    a[r] -= q * a[s]
                    left[r] -= q * left[s]
                clean = clean and a[r, s] == 0
            for c in range(s + 1, cols):
                q = a[s, c] // pivot
                if q:
                    a[:, c] -= q * a[:, s]
                    right[:, c] -= q * right[:, s]
                clean = clean and a[s, c] == 0
            if not clean:
                continue

            offending = np.argwhere(a[s + 1:, s + 1:] % pivot != 0)
            if len(offending):
                r = offending[0][0] + s + 1
                a[s] += a[r]
                left[s] += left[r]
                continue
            break

        if a[s, s] < 0:
            a[s] = -a[s]
            left[s] = -left[s]

    return a, left, right

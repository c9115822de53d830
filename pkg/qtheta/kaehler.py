import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from qtheta.errors import DimensionError, ParameterError, SingularFormError
from qtheta.lattices import SymplecticSpace
from qtheta.numerics import guarded_inv, min_eigenvalue

logger = logging.getLogger("qtheta.kaehler")

IM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    T: np.ndarray

    def __post_init__(self) -> None:
        t = np.atleast_2d(np.asarray(self.T, dtype=complex))
        if t.shape[0] != t.shape[1]:
            raise DimensionError(f"Siegel point must be square, got {t.shape}")
        t = 0.5 * (t + t.T)
        lam = min_eigenvalue(t.imag)
        if lam <= IM_FLOOR:
            raise SingularFormError(f"Im T is not positive definite (smallest eigenvalue {lam:.3e})")
        object.__setattr__(self, "T", t)

    @classmethod
    def from_parts(cls, real, imag) -> "SiegelPoint":
        return cls(np.atleast_2d(np.asarray(real, dtype=float)) + 1j * np.atleast_2d(np.asarray(imag, dtype=float)))

    @classmethod
    def standard(cls, N: int) -> "SiegelPoint":
        return cls(1j * np.eye(N))

    @property
    def N(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True, eq=False)
class KaehlerStructure:
    siegel: SiegelPoint
    space: SymplecticSpace

    def __post_init__(self) -> None:
        if self.space.N != self.siegel.N:
            raise DimensionError(f"T is {self.siegel.N}x{self.siegel.N} but the space has N = {self.space.N}")
        if not self.space.is_standard():
            raise ParameterError("Kaehler structures are defined for the standard symplectic form only")

    @classmethod
    def from_siegel(cls, T) -> "KaehlerStructure":
        siegel = T if isinstance(T, SiegelPoint) else SiegelPoint(T)
        return cls(siegel, SymplecticSpace.standard(siegel.N))

    @property
    def N(self) -> int:
        return self.siegel.N

    @property
    def T(self) -> np.ndarray:
        return self.siegel.T

    @property
    def R(self) -> np.ndarray:
        return self.siegel.T.real

    @property
    def S(self) -> np.ndarray:
        return self.siegel.T.imag

    @cached_property
    def S_inv(self) -> np.ndarray:
        inv = guarded_inv(self.S)
        return 0.5 * (inv + inv.T)

    @cached_property
    def prefactor(self) -> float:
        """1 / sqrt(2^N det Im T)."""
        return float(1.0 / np.sqrt(2.0 ** self.N * np.linalg.det(self.S)))


def embed(k: KaehlerStructure, x) -> np.ndarray:
    """x -> T x_1 + x_2; accepts (2N,) or (M, 2N)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2 * k.N:
        raise DimensionError(f"expected vectors of length {2 * k.N}, got {x.shape[-1]}")
    return x[..., :k.N] @ k.T.T + x[..., k.N:]


def hermitian(k: KaehlerStructure, u, v) -> complex:
    """H(u, v) = u^T (Im T)^{-1} conj(v)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != (k.N,) or v.shape != (k.N,):
        raise DimensionError(f"expected complex vectors of length {k.N}")
    return complex(u @ k.S_inv @ v.conj())


def hermitian_real(k: KaehlerStructure, x, y) -> complex:
    """H(x_, y_) for real x, y in R^{2N}."""
    return hermitian(k, embed(k, x), embed(k, y))


def q_matrix(k: KaehlerStructure) -> np.ndarray:
    """M with x^T M x = H(x_, x_): [[R S^-1 R + S, R S^-1], [S^-1 R, S^-1]]."""
    r, s, s_inv = k.R, k.S, k.S_inv
    top = np.hstack([r @ s_inv @ r + s, r @ s_inv])
    bottom = np.hstack([s_inv @ r, s_inv])
    m = np.vstack([top, bottom])
    return 0.5 * (m + m.T)


def hermitian_gram(k: KaehlerStructure) -> np.ndarray:
    """Complex 2N x 2N matrix of H on the real basis: x^T G y = H(x_, y_)."""
    basis = embed(k, np.eye(2 * k.N))
    return basis @ k.S_inv @ basis.conj().T


def compatibility_residual(k: KaehlerStructure, x, y) -> float:
    """|Im H(x_, y_) - A(x, y)|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return abs(hermitian_real(k, x, y).imag - float(x @ k.space.matrix @ y))

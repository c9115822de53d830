import cmath
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qtheta.errors import DimensionError, FormMismatchError
from qtheta.heisenberg import VectorHeisenbergElement
from qtheta.kaehler import KaehlerStructure, SiegelPoint, embed, hermitian
from qtheta.numerics import gauss_legendre_grid, guarded_solve, sqrt_det, stable_sum

logger = logging.getLogger("qtheta.gaussian_models")

QUADRATURE_MAX_N = 2


# ---------------------------------------------------------------------------
#  Closed-form Gaussian integral
# ---------------------------------------------------------------------------

def complete_square(Q, l) -> np.ndarray:
    """lambda with x^T Q x + l^T x = (x+lambda)^T Q (x+lambda) - lambda^T Q lambda."""
    Q = np.atleast_2d(np.asarray(Q, dtype=complex))
    l = np.atleast_1d(np.asarray(l, dtype=complex))
    return 0.5 * guarded_solve(Q, l)


def gaussian_integral(Q, l, c: complex = 0.0) -> complex:
    """Integral over R^r of exp(-pi (x^T Q x + l^T x + c)) dx."""
    Q = np.atleast_2d(np.asarray(Q, dtype=complex))
    l = np.atleast_1d(np.asarray(l, dtype=complex))
    if Q.shape[0] != Q.shape[1] or l.shape != (Q.shape[0],):
        raise DimensionError("Q must be r x r and l of length r")
    Q = 0.5 * (Q + Q.T)
    root = sqrt_det(Q)
    lam = complete_square(Q, l)
    return complex(cmath.exp(-np.pi * (complex(c) - complex(lam @ Q @ lam))) / root)


# ---------------------------------------------------------------------------
#  Model I: Gaussian wave packets on R^N
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaussianPacket:
    """x -> gamma exp(pi*i (x+s)^T T (x+s) + 2 pi*i b^T x)."""

    gamma: complex
    s: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "s", np.asarray(self.s, dtype=complex).ravel())
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex).ravel())

    def key(self) -> tuple:
        return tuple(self.s.tolist()) + tuple(self.b.tolist())


@dataclass(frozen=True, eq=False)
class PacketSum:
    siegel: SiegelPoint
    packets: tuple[GaussianPacket, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        merged: dict[tuple, GaussianPacket] = {}
        for p in self.packets:
            if p.s.shape != (self.N,) or p.b.shape != (self.N,):
                raise DimensionError(f"packet parameters must have length {self.N}")
            k = p.key()
            if k in merged:
                prev = merged[k]
                merged[k] = GaussianPacket(prev.gamma + p.gamma, prev.s, prev.b)
            else:
                merged[k] = p
        object.__setattr__(self, "packets", tuple(merged.values()))

    @classmethod
    def theta_vector(cls, siegel: SiegelPoint) -> "PacketSum":
        """f_T(x) = exp(pi*i x^T T x)."""
        zero = np.zeros(siegel.N)
        return cls(siegel, (GaussianPacket(1.0, zero, zero),))

    @property
    def N(self) -> int:
        return self.siegel.N

    def scale(self, c: complex) -> "PacketSum":
        return PacketSum(self.siegel, tuple(GaussianPacket(c * p.gamma, p.s, p.b) for p in self.packets))

    def __add__(self, other: "PacketSum") -> "PacketSum":
        _require_same_family(self, other)
        return PacketSum(self.siegel, self.packets + other.packets)


def _require_same_family(f: PacketSum, g: PacketSum) -> None:
    if f.siegel is not g.siegel and not np.array_equal(f.siegel.T, g.siegel.T):
        raise FormMismatchError("packet sums use different Siegel points")


def _pair_integral(T: np.ndarray, p: GaussianPacket, q: GaussianPacket) -> complex:
    """Integral of p(x) conj(q(x)) dx."""
    Tc = T.conj()
    s2 = q.s.conj()
    Q = -1j * (T - Tc)
    l = -2j * (T @ p.s - Tc @ s2 + p.b - q.b.conj())
    c = -1j * (p.s @ T @ p.s - s2 @ Tc @ s2)
    return p.gamma * q.gamma.conjugate() * gaussian_integral(Q, l, c)


def model1_inner(f: PacketSum, g: PacketSum) -> complex:
    _require_same_family(f, g)
    T = f.siegel.T
    return stable_sum(_pair_integral(T, p, q) for p in f.packets for q in g.packets)


def model1_act(el: VectorHeisenbergElement, f: PacketSum) -> PacketSum:
    """(U_(lambda,y) f)(x) = lambda exp(2 pi*i x^T y_2 + pi*i y_1^T y_2) f(x + y_1)."""
    y = np.asarray(el.x, dtype=float)
    if y.shape != (2 * f.N,):
        raise DimensionError(f"translation must have length {2 * f.N}")
    y1, y2 = y[:f.N], y[f.N:]
    phase = 1j * np.pi * float(y1 @ y2)
    out = []
    for p in f.packets:
        gamma = el.lam * p.gamma * cmath.exp(phase + 2j * np.pi * complex(p.b @ y1))
        out.append(GaussianPacket(gamma, p.s + y1, p.b + y2))
    return PacketSum(f.siegel, tuple(out))


def _evaluate_packets(f: PacketSum, points: np.ndarray) -> np.ndarray:
    T = f.siegel.T
    values = np.zeros(points.shape[0], dtype=complex)
    for p in f.packets:
        shifted = points + p.s
        quad = np.einsum("mi,ij,mj->m", shifted, T, shifted)
        values += p.gamma * np.exp(1j * np.pi * quad + 2j * np.pi * (points @ p.b))
    return values


# ---------------------------------------------------------------------------
#  Model II_T: exponentials of linear forms on C^N
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FockExponential:
    """z -> gamma exp(l^T z)."""

    gamma: complex
    l: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "l", np.asarray(self.l, dtype=complex).ravel())


@dataclass(frozen=True, eq=False)
class FockSum:
    kaehler: KaehlerStructure
    terms: tuple[FockExponential, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        merged: dict[tuple, FockExponential] = {}
        for t in self.terms:
            if t.l.shape != (self.kaehler.N,):
                raise DimensionError(f"linear form must have length {self.kaehler.N}")
            k = tuple(t.l.tolist())
            if k in merged:
                merged[k] = FockExponential(merged[k].gamma + t.gamma, t.l)
            else:
                merged[k] = t
        object.__setattr__(self, "terms", tuple(merged.values()))

    @classmethod
    def vacuum(cls, kaehler: KaehlerStructure) -> "FockSum":
        return cls(kaehler, (FockExponential(1.0, np.zeros(kaehler.N)),))

    def scale(self, c: complex) -> "FockSum":
        return FockSum(self.kaehler, tuple(FockExponential(c * t.gamma, t.l) for t in self.terms))

    def __add__(self, other: "FockSum") -> "FockSum":
        return FockSum(self.kaehler, self.terms + other.terms)


def model2_act(el: VectorHeisenbergElement, f: FockSum, k: KaehlerStructure) -> FockSum:
    """(U'_(lambda,y) f)(z) = lambda^-1 exp(-pi H(z, y_) - pi/2 H(y_, y_)) f(z + y_)."""
    y = np.asarray(el.x, dtype=float)
    if y.shape != (2 * k.N,):
        raise DimensionError(f"translation must have length {2 * k.N}")
    yz = embed(k, y)
    norm = hermitian(k, yz, yz).real
    shift = -np.pi * (k.S_inv @ yz.conj())
    out = []
    for t in f.terms:
        gamma = t.gamma / el.lam * cmath.exp(complex(t.l @ yz) - 0.5 * np.pi * norm)
        out.append(FockExponential(gamma, t.l + shift))
    return FockSum(k, tuple(out))


def _evaluate_fock(f: FockSum, points: np.ndarray) -> np.ndarray:
    values = np.zeros(points.shape[0], dtype=complex)
    for t in f.terms:
        values += t.gamma * np.exp(points @ t.l)
    return values


def evaluate(f: PacketSum | FockSum, point) -> complex | np.ndarray:
    """Value at a point of R^N (Model I) or C^N (Model II); a batch gives an array."""
    point = np.asarray(point)
    single = point.ndim == 1
    points = np.atleast_2d(point)
    if isinstance(f, PacketSum):
        if points.shape[1] != f.N:
            raise DimensionError(f"Model I points must have length {f.N}")
        values = _evaluate_packets(f, points.astype(float))
    else:
        if points.shape[1] != f.kaehler.N:
            raise DimensionError(f"Model II points must have length {f.kaehler.N}")
        values = _evaluate_fock(f, points.astype(complex))
    return complex(values[0]) if single else values


# ---------------------------------------------------------------------------
#  Quadrature oracles
# ---------------------------------------------------------------------------

def quadrature_inner(f: PacketSum, g: PacketSum, box_half_width: float, points_per_axis: int) -> complex:
    """Gauss-Legendre approximation of the Model I inner product."""
    _require_same_family(f, g)
    if f.N > QUADRATURE_MAX_N:
        raise DimensionError(f"quadrature oracle supports N <= {QUADRATURE_MAX_N}")
    nodes, weights = gauss_legendre_grid(f.N, box_half_width, points_per_axis)
    integrand = _evaluate_packets(f, nodes) * _evaluate_packets(g, nodes).conj()
    return complex(np.sum(weights * integrand))


def fock_inner_quadrature(f: FockSum, g: FockSum, box_half_width: float, points_per_axis: int) -> complex:
    """<f, g>_T = integral of f(x_) conj(g(x_)) exp(-pi H(x_, x_)) dx over R^2 (N = 1)."""
    k = f.kaehler
    if k.N != 1:
        raise DimensionError("Fock quadrature oracle supports N = 1 only")
    nodes, weights = gauss_legendre_grid(2, box_half_width, points_per_axis)
    z = embed(k, nodes)
    weight = np.exp(-np.pi * np.einsum("mi,ij,mj->m", z, k.S_inv, z.conj()).real)
    integrand = _evaluate_fock(f, z) * _evaluate_fock(g, z).conj() * weight
    return complex(np.sum(weights * integrand))


def translated_theta_vector(siegel: SiegelPoint, y: Sequence[float]) -> PacketSum:
    """U_(1,y) f_T."""
    return model1_act(VectorHeisenbergElement.translation(y), PacketSum.theta_vector(siegel))

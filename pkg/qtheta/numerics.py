import logging
import math
from typing import Iterable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from qtheta.errors import SingularFormError, TailBoundError

logger = logging.getLogger("qtheta.numerics")

COND_LIMIT = 1e10
# exp(-760) is below the smallest subnormal double
_NEGLIGIBLE_EXPONENT = 760.0


# ---------------------------------------------------------------------------
#  Guarded dense linear algebra
# ---------------------------------------------------------------------------

def guarded_solve(a, b, cond_limit: float = COND_LIMIT) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a))
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularFormError(f"matrix condition number {cond:.3e} exceeds {cond_limit:.1e}")
    return linalg.solve(a, b)


def guarded_inv(a, cond_limit: float = COND_LIMIT) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a))
    return guarded_solve(a, np.eye(a.shape[0], dtype=a.dtype), cond_limit)


def min_eigenvalue(symmetric) -> float:
    symmetric = np.atleast_2d(np.asarray(symmetric, dtype=float))
    return float(linalg.eigvalsh(symmetric)[0])


def require_positive_definite(symmetric, what: str, floor: float = 1e-12) -> None:
    lam = min_eigenvalue(symmetric)
    if lam <= floor:
        raise SingularFormError(f"{what} is not positive definite (smallest eigenvalue {lam:.3e})")


def sqrt_det(q) -> complex:
    """Square root of det Q for complex symmetric Q with positive definite real part.

    The branch is the one continuous along Re Q + t*i*Im Q, t in [0, 1],
    starting from the positive root on the real cone. With Im Q v = mu Re Q v
    the determinant factors as det(Re Q) * prod(1 + i*mu), and every factor
    stays in the right half plane along the path.
    """
    q = np.atleast_2d(np.asarray(q, dtype=complex))
    re, im = q.real, q.imag
    try:
        linalg.cholesky(re, lower=True)
    except linalg.LinAlgError:
        raise SingularFormError("real part of the quadratic form is not positive definite") from None
    mu = linalg.eigh(im, re, eigvals_only=True)
    root = math.sqrt(float(np.linalg.det(re)))
    return complex(root * np.prod(np.sqrt(1.0 + 1j * mu)))


def stable_sum(values: Iterable[complex]) -> complex:
    re: list[float] = []
    im: list[float] = []
    for v in values:
        re.append(float(np.real(v)))
        im.append(float(np.imag(v)))
    return complex(math.fsum(re), math.fsum(im))


# ---------------------------------------------------------------------------
#  Gaussian tails of lattice sums
# ---------------------------------------------------------------------------

def lattice_tail_bound(gram, radius: float, scale: float, drift: float = 0.0) -> float:
    """Bound sum over n in Z^r with t = sqrt(n^T P n) > radius of exp(-scale*t^2 + drift*t).

    Points are grouped by sup-norm shells; a shell of sup-norm k holds
    (2k+1)^r - (2k-1)^r points, each with t >= sqrt(lambda_min)*k.
    """
    gram = np.atleast_2d(np.asarray(gram, dtype=float))
    rank = gram.shape[0]
    lam = min_eigenvalue(gram)
    if lam <= 0:
        raise SingularFormError("lattice Gram matrix is not positive definite")
    root = math.sqrt(lam)
    peak = drift / (2.0 * scale) if drift > 0 else 0.0
    reach = radius + peak + drift / scale + math.sqrt(_NEGLIGIBLE_EXPONENT / scale)
    k_max = int(math.ceil(reach / root)) + 2
    k = np.arange(1, k_max + 1, dtype=float)
    shell = (2.0 * k + 1.0) ** rank - (2.0 * k - 1.0) ** rank
    t = np.maximum(np.maximum(radius, root * k), peak)
    exponents = np.log(shell) - scale * t * t + drift * t
    return float(np.sum(np.exp(exponents)))


def radius_for_tolerance(gram, scale: float, tolerance: float, drift: float = 0.0,
                         step: float = 0.25, max_radius: float = 64.0) -> float:
    radius = step
    while radius <= max_radius:
        bound = lattice_tail_bound(gram, radius, scale, drift)
        if bound < tolerance:
            logger.debug("radius %.2f gives tail bound %.3e (scale %.4f)", radius, bound, scale)
            return radius
        radius += step
    raise TailBoundError(f"no radius up to {max_radius} reaches tolerance {tolerance:.1e}",
                         lattice_tail_bound(gram, max_radius, scale, drift))


# ---------------------------------------------------------------------------
#  Quadrature grids
# ---------------------------------------------------------------------------

def gauss_legendre_grid(dim: int, half_width: float, points_per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product Gauss-Legendre nodes (M, dim) and weights (M,) on [-L, L]^dim."""
    x, w = leggauss(points_per_axis)
    x = half_width * x
    w = half_width * w
    axes = np.meshgrid(*([x] * dim), indexing="ij")
    weights = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([a.ravel() for a in axes], axis=1)
    ww = np.prod(np.stack([b.ravel() for b in weights], axis=1), axis=1)
    return nodes, ww


# ---------------------------------------------------------------------------
#  Reproducible sampling
# ---------------------------------------------------------------------------

def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_points(rng: np.random.Generator, count: int, dim: int, half_width: float = 1.0) -> np.ndarray:
    """The origin followed by count-1 uniform points in [-w, w]^dim."""
    pts = rng.uniform(-half_width, half_width, size=(max(count - 1, 0), dim))
    return np.vstack([np.zeros((1, dim)), pts])


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def random_siegel_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """T = Sym(C) + i(Sym(B)^T Sym(B) + I); Im T >= I."""
    b = _sym(rng.normal(size=(n, n)))
    c = _sym(rng.normal(size=(n, n)))
    return c + 1j * (b.T @ b + np.eye(n))

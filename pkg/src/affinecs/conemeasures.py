"""Polar coordinates on GL+(n) and the cone change-of-variables Jacobians.

Every S with det S > 0 factors uniquely as S = M T with M special
orthogonal and T upper triangular with positive diagonal.  The wedge
bookkeeping for this chart is

    prod dS        = [prod_{j<n} (T_j^j)^(n-j)] dOmega ^ prod dT
    prod dG^{ab}   = 2^n [prod_j (T_j^j)^(n+1-j)] prod dT      (G = T^T T)

so the two Jacobians combine to 2^n det S, and integrals of f(G) over the
cone push forward to det-weighted integrals over GL+(n).  The measured
lhs/rhs ratio of that pushforward isolates the O(n)-vs-SO(n) volume
convention (it is 2 when the prefactor uses the product-of-spheres volume
omega_n); the checks here assert its constancy, not its value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinend import kn_closed, omega_n
from .errors import DomainError, IllConditioned
from .matrixcore import check_glplus
from .mc import McConfig, McResult, run_chunked

__all__ = [
    "PolarFactors",
    "polar_decompose",
    "RotationChain",
    "build_rotation",
    "jacobian_polar",
    "jacobian_t_to_g",
    "PushforwardResult",
    "pushforward_check",
]


@dataclass(frozen=True)
class PolarFactors:
    """S = M T with M in SO(n), T upper triangular, diag T > 0."""

    m: np.ndarray
    t: np.ndarray


def polar_decompose(s: np.ndarray, tol: float = 1e-12) -> PolarFactors:
    """Gram-Schmidt on columns with positive-diagonal normalization of T.

    Modified Gram-Schmidt with one reorthogonalization pass, which keeps
    M orthogonal to roundoff even for poorly conditioned inputs.
    """
    s = check_glplus(s)
    n = s.shape[0]
    scale = np.linalg.norm(s)
    m = np.zeros_like(s)
    t = np.zeros_like(s)
    for j in range(n):
        v = s[:, j].copy()
        for _ in range(2):
            for i in range(j):
                c = m[:, i] @ v
                t[i, j] += c
                v -= c * m[:, i]
        norm = np.linalg.norm(v)
        if norm <= tol * scale:
            raise IllConditioned(f"column {j} collapsed during orthogonalization")
        t[j, j] = norm
        m[:, j] = v / norm
    return PolarFactors(m=m, t=t)


@dataclass(frozen=True)
class RotationChain:
    """Angles theta_ij for n >= i > j (0-based i > j here).

    The product order is (R_10 R_20 ... R_{n-1,0})(R_21 ... R_{n-1,1}) ...
    (R_{n-1,n-2}); each factor rotates the (j, i) coordinate plane.
    """

    n: int
    angles: dict

    def __post_init__(self):
        for (i, j) in self.angles:
            if not (0 <= j < i < self.n):
                raise DomainError(f"invalid rotation axis ({i}, {j})")


def _givens(n: int, i: int, j: int, theta: float) -> np.ndarray:
    r = np.eye(n)
    c, s = np.cos(theta), np.sin(theta)
    r[j, j] = c
    r[j, i] = -s
    r[i, j] = s
    r[i, i] = c
    return r


def build_rotation(chain: RotationChain) -> np.ndarray:
    """Ordered product of the Givens factors; special orthogonal by construction."""
    n = chain.n
    m = np.eye(n)
    for j in range(n - 1):
        for i in range(j + 1, n):
            theta = chain.angles.get((i, j), 0.0)
            m = m @ _givens(n, i, j, theta)
    return m


def jacobian_polar(t: np.ndarray) -> float:
    """Wedge factor prod_{j<n} (T_j^j)^(n-j) of the S = M T chart (1-based j)."""
    t = np.asarray(t, dtype=float)
    n = t.shape[0]
    diag = np.diag(t)
    if np.any(diag <= 0):
        raise DomainError("T must have a positive diagonal")
    return float(np.prod([diag[j] ** (n - 1 - j) for j in range(n - 1)])) if n > 1 else 1.0


def jacobian_t_to_g(t: np.ndarray) -> float:
    """Wedge factor 2^n prod_j (T_j^j)^(n+1-j) of G = T^T T (1-based j)."""
    t = np.asarray(t, dtype=float)
    n = t.shape[0]
    diag = np.diag(t)
    if np.any(diag <= 0):
        raise DomainError("T must have a positive diagonal")
    return float(2.0**n * np.prod([diag[j] ** (n - j) for j in range(n)]))


@dataclass(frozen=True)
class PushforwardResult:
    lhs: float
    rhs: McResult
    ratio: float

    @property
    def ratio_stderr(self) -> float:
        return self.lhs * self.rhs.stderr / self.rhs.real**2


def pushforward_check(n: int, a: float, mc: McConfig) -> PushforwardResult:
    """Central change-of-variables identity on f(G) = (det G)^a e^(-tr G).

    lhs: the direct cone integral, i.e. kn(n, a) in closed form.
    rhs: 2^n omega_n^-1 * integral over det S > 0 of det S * f(S^T S),
         estimated by Gaussian importance sampling (the integrand reduces
         to |det S|^(2a+1) against a centered Gaussian).

    The ratio is reported, not asserted: with the product-of-spheres
    omega_n it measures vol O(n) / vol SO(n) = 2.
    """
    lhs = kn_closed(n, a)
    pref = 2.0**n / omega_n(n) * np.pi ** (0.5 * n * n)

    def sample_fn(rng: np.random.Generator, m: int) -> np.ndarray:
        s = rng.normal(0.0, np.sqrt(0.5), size=(m, n, n))
        det = np.linalg.det(s)
        out = np.zeros(m)
        good = det > 0
        out[good] = det[good] ** (2 * a + 1)
        return out

    raw = run_chunked(sample_fn, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=31)
    rhs = McResult(pref * raw.mean, pref * raw.stderr, raw.n_samples, raw.ess)
    return PushforwardResult(lhs=lhs, rhs=rhs, ratio=float(lhs / rhs.real))

"""Dense real/complex matrix kernel.

Symmetry-aware helpers, factorizations with explicit failure modes, a matrix
exponential, the principal-branch log-determinant on the half-plane domain
Re X > 0, and seeded random samplers for the matrix families used elsewhere
(symmetric, SPD, GL+ and special orthogonal).

All functions are pure; samplers are deterministic given their seed.
"""

from __future__ import annotations

import numpy as np

from .errors import IllConditioned, NotPositiveDefinite, RealPartNotSPD

__all__ = [
    "symmetrize",
    "check_symmetric",
    "check_spd",
    "check_glplus",
    "check_complex_symmetric",
    "cholesky",
    "mat_exp",
    "complex_symlogdet",
    "complex_symlogdet_batch",
    "rng_from",
    "sample_sym",
    "sample_spd",
    "sample_glplus",
    "sample_so",
]

# Pivot-tolerance factor for declaring a matrix outside the SPD cone.
PIVOT_TOL = 1e-13


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return the symmetric part (a + a.T)/2."""
    a = np.asarray(a)
    return 0.5 * (a + a.swapaxes(-1, -2))


def check_symmetric(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > tol * scale:
        raise ValueError("matrix is not symmetric")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return symmetrize(a)


def check_spd(a: np.ndarray) -> np.ndarray:
    """Validate symmetry and positive definiteness; return the symmetrized copy."""
    a = check_symmetric(a)
    cholesky(a)
    return a


def check_glplus(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("matrix has non-finite entries")
    sign, _ = np.linalg.slogdet(s)
    if sign <= 0:
        raise ValueError("matrix must have positive determinant")
    return s


def check_complex_symmetric(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    scale = max(1.0, float(np.abs(x).max()))
    if np.abs(x - x.T).max() > tol * scale:
        raise ValueError("matrix is not complex symmetric")
    return 0.5 * (x + x.T)


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor of an SPD matrix.

    Runs a plain right-looking elimination so that the failure mode is the
    sign of an explicit pivot: any pivot below ``PIVOT_TOL * max|entry|``
    raises :class:`NotPositiveDefinite` (the incoming point is not in the
    open cone for numerical purposes).

    Returns L with positive diagonal and ``L @ L.T == a`` to roundoff.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    work = symmetrize(a).copy()
    tol = PIVOT_TOL * max(1.0, float(np.abs(work).max()))
    L = np.zeros_like(work)
    for j in range(n):
        pivot = work[j, j] - L[j, :j] @ L[j, :j]
        if not np.isfinite(pivot) or pivot <= tol:
            raise NotPositiveDefinite(
                f"pivot {pivot:.3e} at column {j} is below tolerance {tol:.3e}"
            )
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1:, j] = (work[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def mat_exp(b: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring on a Pade core.

    Total on finite input; relative accuracy ~1e-13 for moderate norms.
    """
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ValueError("matrix has non-finite entries")
    from scipy.linalg import expm

    return expm(b)


def _logdet_half_plane(re_chol: np.ndarray, im: np.ndarray) -> complex:
    """log det (Re + i Im) given the Cholesky factor of the real part.

    Writes X = L (I + i M) L^T with M = L^-1 Im L^-T real symmetric, so
    log det X = 2 sum log diag L + sum log(1 + i mu_j) with each factor in
    the open right half-plane.  Every principal logarithm on the right is
    unambiguous, and the sum is the unique continuous branch that is real
    on real SPD matrices.
    """
    from scipy.linalg import solve_triangular

    half = solve_triangular(re_chol, im, lower=True)
    m = solve_triangular(re_chol, half.T, lower=True)
    mu = np.linalg.eigvalsh(symmetrize(m))
    return 2.0 * np.sum(np.log(np.diag(re_chol))) + np.sum(np.log1p(1j * mu))


def complex_symlogdet(x: np.ndarray) -> complex:
    """Principal-branch log-determinant of a complex symmetric matrix.

    Defined on the domain Re x > 0, where det x never vanishes; the branch
    is the analytic continuation from the real SPD subcone (real value
    there).  ``exp`` of the result reproduces det x.

    Raises
    ------
    RealPartNotSPD
        If the real part fails its Cholesky factorization.
    """
    x = np.asarray(x, dtype=complex)
    re = symmetrize(x.real)
    try:
        L = cholesky(re)
    except NotPositiveDefinite as exc:
        raise RealPartNotSPD(str(exc)) from exc
    return complex(_logdet_half_plane(L, symmetrize(x.imag)))


def complex_symlogdet_batch(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    """Vectorized principal log-determinants for stacks of Re > 0 matrices.

    ``re`` and ``im`` have shape (..., n, n); ``re`` entries must already be
    symmetric positive definite (no per-item error reporting on this path).
    """
    L = np.linalg.cholesky(re)
    linv = np.linalg.inv(L)
    m = linv @ im @ linv.swapaxes(-1, -2)
    mu = np.linalg.eigvalsh(symmetrize(m))
    logdiag = np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum(axis=-1)
    return 2.0 * logdiag + np.log1p(1j * mu).sum(axis=-1)


def rng_from(seed: int, *tags: int) -> np.random.Generator:
    """Deterministic generator keyed by a master seed plus integer tags.

    Chunked Monte Carlo derives one generator per (seed, chunk) so results
    do not depend on how the sample budget is split across workers.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(t) & 0xFFFFFFFF for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def sample_sym(n: int, seed: int | np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random symmetric matrix with iid Gaussian upper triangle."""
    rng = seed if isinstance(seed, np.random.Generator) else rng_from(seed)
    g = rng.normal(0.0, scale, size=(n, n))
    return symmetrize(g)


def sample_spd(n: int, seed: int | np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random SPD matrix Q Q^T + eps*I with Gaussian Q.

    The eps = 1e-9*scale ridge keeps samples off the cone boundary so that
    downstream Cholesky factorizations cannot fail on roundoff.
    """
    rng = seed if isinstance(seed, np.random.Generator) else rng_from(seed)
    q = rng.normal(0.0, scale, size=(n, n))
    return symmetrize(q @ q.T) + 1e-9 * scale * np.eye(n)


def sample_glplus(n: int, seed: int | np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random GL+(n) matrix: Gaussian matrices resampled until det > 0."""
    rng = seed if isinstance(seed, np.random.Generator) else rng_from(seed)
    for _ in range(1000):
        s = rng.normal(0.0, scale, size=(n, n))
        if np.linalg.det(s) > 0:
            return s
    raise IllConditioned("could not draw a matrix with positive determinant")


def sample_so(n: int, seed: int | np.random.Generator) -> np.ndarray:
    """Haar-distributed special orthogonal matrix via sign-fixed QR."""
    rng = seed if isinstance(seed, np.random.Generator) else rng_from(seed)
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q

"""Chunked, seed-deterministic Monte Carlo driver.

A sample budget is split into fixed-size chunks; chunk ``i`` draws from a
generator keyed by ``(seed, i)``.  Accumulation happens in chunk order, so
the estimate is bit-identical for a given master seed regardless of the
number of worker threads used to evaluate the chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .matrixcore import rng_from

__all__ = ["McConfig", "McResult", "run_chunked", "wishart_sample",
           "wishart_logpdf", "invwishart_sample", "invwishart_logpdf"]


@dataclass(frozen=True)
class McConfig:
    """Budget and seeding for a chunk-deterministic MC estimate."""

    samples: int = 200_000
    seed: int = 0
    chunk_size: int = 100_000
    threads: int = 1


@dataclass(frozen=True)
class McResult:
    """Mean estimate with a per-sample standard error.

    ``ess`` is the importance-sampling effective sample size
    (sum |w|)^2 / sum |w|^2; when it is tiny the stderr itself is
    unreliable and the estimate should not be trusted.
    """

    mean: complex
    stderr: float
    n_samples: int
    ess: float = float("nan")

    @property
    def real(self) -> float:
        return float(np.real(self.mean))

    def within(self, target: complex, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr


def run_chunked(
    sample_fn: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    seed: int,
    chunk_size: int = 100_000,
    threads: int = 1,
    tag: int = 0,
) -> McResult:
    """Estimate E[f] by averaging ``sample_fn(rng, m)`` over derived-seed chunks.

    ``sample_fn`` must return one value per requested sample (shape (m,),
    real or complex).  The standard error combines the per-sample variance
    of both real and imaginary parts.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    sizes = []
    remaining = n_samples
    while remaining > 0:
        take = min(chunk_size, remaining)
        sizes.append(take)
        remaining -= take

    def eval_chunk(idx_size):
        idx, size = idx_size
        rng = rng_from(seed, tag, idx)
        vals = np.asarray(sample_fn(rng, size))
        absvals = np.abs(vals)
        s1 = vals.sum(dtype=complex)
        s2 = float((absvals.astype(float) ** 2).sum())
        sa = float(absvals.sum())
        return s1, s2, sa

    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(eval_chunk, jobs))
    else:
        results = [eval_chunk(j) for j in jobs]

    total = complex(0.0)
    total_sq = 0.0
    total_abs = 0.0
    for s1, s2, sa in results:   # fixed order: independent of thread count
        total += s1
        total_sq += s2
        total_abs += sa
    mean = total / n_samples
    var = max(total_sq / n_samples - abs(mean) ** 2, 0.0)
    stderr = float(np.sqrt(var / n_samples))
    ess = total_abs**2 / total_sq if total_sq > 0 else 0.0
    return McResult(mean=mean, stderr=stderr, n_samples=n_samples, ess=float(ess))


def _lgamma_mv(x: float, n: int) -> float:
    from scipy.special import gammaln

    return 0.25 * n * (n - 1) * np.log(np.pi) + sum(
        gammaln(x - 0.5 * j) for j in range(n)
    )


def wishart_sample(rng: np.random.Generator, scale: np.ndarray, df: float,
                   size: int) -> np.ndarray:
    """Draw ``size`` Wishart(scale, df) matrices by Bartlett decomposition.

    Requires df > n - 1; df may be non-integer.
    """
    n = scale.shape[0]
    if df <= n - 1:
        raise ValueError("wishart df must exceed n - 1")
    L = np.linalg.cholesky(scale)
    a = np.zeros((size, n, n))
    for i in range(n):
        a[:, i, i] = np.sqrt(rng.chisquare(df - i, size=size))
        for j in range(i):
            a[:, i, j] = rng.standard_normal(size)
    la = L[None, :, :] @ a
    return la @ la.swapaxes(-1, -2)


def wishart_logpdf(x: np.ndarray, scale: np.ndarray, df: float) -> np.ndarray:
    n = scale.shape[0]
    sign, logdet_scale = np.linalg.slogdet(scale)
    _, logdet_x = np.linalg.slogdet(x)
    vinv = np.linalg.inv(scale)
    tr = np.einsum("ij,...ji->...", vinv, x)
    logz = 0.5 * df * n * np.log(2.0) + 0.5 * df * logdet_scale + _lgamma_mv(0.5 * df, n)
    return 0.5 * (df - n - 1) * logdet_x - 0.5 * tr - logz


def invwishart_sample(rng: np.random.Generator, psi: np.ndarray, df: float,
                      size: int) -> np.ndarray:
    w = wishart_sample(rng, np.linalg.inv(psi), df, size)
    return np.linalg.inv(w)


def invwishart_logpdf(x: np.ndarray, psi: np.ndarray, df: float) -> np.ndarray:
    n = psi.shape[0]
    _, logdet_psi = np.linalg.slogdet(psi)
    _, logdet_x = np.linalg.slogdet(x)
    xinv = np.linalg.inv(x)
    tr = np.einsum("ij,...ji->...", psi, xinv)
    logz = 0.5 * df * n * np.log(2.0) - 0.5 * df * logdet_psi + _lgamma_mv(0.5 * df, n)
    return -0.5 * (df + n + 1) * logdet_x - 0.5 * tr - logz

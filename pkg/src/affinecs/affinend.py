"""n-dimensional affine kinematics over the SPD cone.

Labels come in two charts: (F, S) with F symmetric and det S > 0, and the
gauge-reduced (F, G) with G the lower-index SPD matrix, G^-1 = S^T S.
The overlap kernel in the reduced chart is

    <F',G'|F,G> = [ (det G' det G)^{-1/2} / det( (G'^-1 + G^-1)/2 + i(F'-F)/(2 beta) ) ]^p

with exponent p = 2 alpha + (n+1)/2, evaluated through the principal-branch
log-determinant on the half-plane domain.

Cone integrals reduce to the multivariate gamma function

    Gamma_n(x) = pi^(n(n-1)/4) prod_{j=1..n} Gamma(x - (j-1)/2),

so that kn(n, a) := integral over SPD k of (det k)^a e^(-tr k) equals
Gamma_n(a + (n+1)/2).  This closed form is treated as an oracle to be
validated against direct quadrature and two independent Monte Carlo routes.

Group-volume convention: omega_n below is the product of sphere volumes,
which is the volume of O(n); the volume of SO(n) under the same measure is
half of it.  Published prefactors that mix the two conventions are exposed
side by side (see :func:`admissibility_nd`), and the resolution-of-unity
constant used here is convention-free: the two factors of 2 cancel in
``2^-n * omega_n / N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .affine1d import LocalExpansion, PolarizationResult, ResolutionResult
from .errors import ConeExit, DivergentIntegral, DomainError
from .matrixcore import (
    check_glplus,
    check_spd,
    check_symmetric,
    cholesky,
    complex_symlogdet_batch,
    symmetrize,
)
from .mc import McConfig, McResult, run_chunked, wishart_logpdf, wishart_sample

__all__ = [
    "FiducialND",
    "LabelS",
    "LabelG",
    "compose",
    "invert",
    "s_to_g",
    "overlap_nd",
    "overlap_s",
    "overlap_nd_many",
    "lgamma_mv",
    "kn_closed",
    "omega_n",
    "so_volume",
    "KnResult",
    "kn",
    "AdmissibilityResult",
    "admissibility_nd",
    "resolution_check_nd",
    "polarization_residual_nd",
    "local_expansion_nd",
    "unitarity_check",
    "UnitarityResult",
]


def lgamma_mv(x: float, n: int) -> float:
    """log of the multivariate gamma Gamma_n(x); requires x > (n-1)/2."""
    if x <= 0.5 * (n - 1):
        raise DivergentIntegral(f"Gamma_{n}({x}) diverges")
    return 0.25 * n * (n - 1) * np.log(np.pi) + sum(
        gammaln(x - 0.5 * j) for j in range(n)
    )


def kn_closed(n: int, a: float) -> float:
    """Closed form of the cone integral of (det k)^a e^(-tr k).

    Equals Gamma_n(a + (n+1)/2); converges iff a > -1.
    """
    if a <= -1:
        raise DivergentIntegral("kn requires a > -1")
    return float(np.exp(lgamma_mv(a + 0.5 * (n + 1), n)))


def omega_n(n: int) -> float:
    """Product of sphere volumes prod_j 2 pi^(j/2)/Gamma(j/2): vol O(n)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return float(np.prod([2 * np.pi ** (0.5 * j) / np.exp(gammaln(0.5 * j))
                          for j in range(1, n + 1)]))


def so_volume(n: int) -> float:
    """Volume of SO(n): half of omega_n (one of the two O(n) components)."""
    return 0.5 * omega_n(n)


@dataclass(frozen=True)
class FiducialND:
    """n-dimensional fiducial parameters with derived constants.

    Any alpha > 0 gives a normalizable fiducial and a well-defined overlap;
    the measure-level constants additionally need admissibility,
    2 alpha > (n-1)/2, so that kn(2 alpha - (n+1)/2) converges.  Operations
    that depend on it raise :class:`DivergentIntegral` otherwise.
    """

    n: int
    alpha: float
    beta: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise DomainError("beta must be positive")
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise DomainError("alpha must be positive")

    @property
    def admissible(self) -> bool:
        return 2 * self.alpha > 0.5 * (self.n - 1)

    def require_admissible(self) -> None:
        if not self.admissible:
            raise DivergentIntegral("admissibility requires 2 alpha > (n-1)/2")

    @property
    def p_exponent(self) -> float:
        """Overlap exponent 2 alpha + (n+1)/2."""
        return 2 * self.alpha + 0.5 * (self.n + 1)

    @property
    def gamma(self) -> float:
        """beta^-1 [ (n+1)/4 + alpha ]; equals p/(2 beta)."""
        return (0.25 * (self.n + 1) + self.alpha) / self.beta

    @property
    def log_cn(self) -> float:
        """log of the normalization (2 beta)^(alpha n + n(n+1)/4) / sqrt(kn(2 alpha))."""
        n, a, b = self.n, self.alpha, self.beta
        return (a * n + 0.25 * n * (n + 1)) * np.log(2 * b) - 0.5 * lgamma_mv(
            2 * a + 0.5 * (n + 1), n
        )

    @property
    def n_flat(self) -> float:
        """Normalizer of the flat (F, G) resolution of unity.

        2^(-n(n-1)/2) (4 pi beta)^(n(n+1)/2) kn(2a - (n+1)/2) / kn(2a);
        reduces to 2 pi beta / alpha at n = 1 and is independent of the
        O(n)-vs-SO(n) volume convention.

        The 2^(-n(n-1)/2) factor comes from the F-sector Fourier constants:
        each off-diagonal F entry is conjugate to 2 k_jk, so it contributes
        pi, not 2 pi.  The value is fixed by the exact sandwich identity
        N^-1 int dF dG |<l|F,G>|^2 = 1, which reduces to an Ingham-type
        F-integral and a matrix Beta integral in G (and is covered by the
        resolution Monte Carlo checks).
        """
        self.require_admissible()
        n, a, b = self.n, self.alpha, self.beta
        lg = lgamma_mv(2 * a, n) - lgamma_mv(2 * a + 0.5 * (n + 1), n)
        return float(np.exp(
            0.5 * n * (n + 1) * np.log(4 * np.pi * b)
            - 0.5 * n * (n - 1) * np.log(2.0)
            + lg
        ))


@dataclass(frozen=True)
class LabelS:
    """Group-chart label (F, S): F symmetric, det S > 0."""

    f: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", check_symmetric(self.f))
        object.__setattr__(self, "s", check_glplus(self.s))
        if self.f.shape != self.s.shape:
            raise DomainError("F and S must have matching shapes")

    @property
    def n(self) -> int:
        return self.f.shape[0]


@dataclass(frozen=True)
class LabelG:
    """Gauge-reduced label (F, G) with G SPD (lower-index convention)."""

    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", check_symmetric(self.f))
        object.__setattr__(self, "g", check_spd(self.g))
        if self.f.shape != self.g.shape:
            raise DomainError("F and G must have matching shapes")

    @property
    def n(self) -> int:
        return self.f.shape[0]


def compose(g1: LabelS, g2: LabelS) -> LabelS:
    """Group law (F1, S1) * (F2, S2) = (F1 + S1^T F2 S1, S2 S1).

    The S factors multiply in this order; it is the unique order that is
    associative and leaves the overlap kernel invariant under left
    translation, together with the (S^T S)-based gauge reduction and the
    inverse below.
    """
    return LabelS(f=g1.f + g1.s.T @ g2.f @ g1.s, s=g2.s @ g1.s)


def invert(g: LabelS) -> LabelS:
    """Inverse element: compose(invert(g), g) is the identity (0, I)."""
    sinv = np.linalg.inv(g.s)
    return LabelS(f=-sinv.T @ g.f @ sinv, s=sinv)


def s_to_g(s: np.ndarray) -> np.ndarray:
    """Lower-index label matrix G = (S^T S)^-1; invariant under S -> M S."""
    s = check_glplus(s)
    return np.linalg.inv(s.T @ s)


def overlap_nd_many(fid: FiducialND, f1, g1, f2, g2) -> np.ndarray:
    """Vectorized overlap for stacks of (F, G) labels (bra 1, ket 2).

    Arguments broadcast: each of f1, g1, f2, g2 is (n, n) or (m, n, n).
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    w1 = np.linalg.inv(g1)
    w2 = np.linalg.inv(g2)
    ld1 = np.linalg.slogdet(g1)[1]
    ld2 = np.linalg.slogdet(g2)[1]
    re = symmetrize(0.5 * (w1 + w2))
    im = symmetrize(0.5 * (f1 - f2) / fid.beta)
    re, im = np.broadcast_arrays(re, im)
    logdet_d = complex_symlogdet_batch(re, im)
    return np.exp(fid.p_exponent * (-0.5 * (ld1 + ld2) - logdet_d))


def overlap_nd(fid: FiducialND, l1: LabelG, l2: LabelG) -> complex:
    """Closed-form overlap <l1|l2> in the reduced chart, principal branch."""
    if l1.n != fid.n or l2.n != fid.n:
        raise DomainError("label dimension does not match the fiducial")
    val = overlap_nd_many(fid, l1.f[None], l1.g[None], l2.f[None], l2.g[None])
    return complex(val[0])


def overlap_s(fid: FiducialND, l1: LabelS, l2: LabelS) -> complex:
    """Overlap in the (F, S) chart.

    { det(S'S) / det[ (S'^T S' + S^T S)/2 + i(F'-F)/(2 beta) ] }^p, which
    equals overlap_nd after the G = (S^T S)^-1 reduction of both labels.
    """
    return overlap_nd(fid, LabelG(l1.f, s_to_g(l1.s)), LabelG(l2.f, s_to_g(l2.s)))


# ---------------------------------------------------------------------------
# kn: three routes


@dataclass(frozen=True)
class KnResult:
    closed: float
    gauss: McResult
    cone: McResult

    def consistent(self, k: float = 3.0) -> bool:
        ok_g = abs(self.gauss.real - self.closed) <= k * self.gauss.stderr
        ok_c = abs(self.cone.real - self.closed) <= k * self.cone.stderr
        ok_gc = abs(self.gauss.real - self.cone.real) <= k * np.hypot(
            self.gauss.stderr, self.cone.stderr
        )
        return bool(ok_g and ok_c and ok_gc)


def kn(n: int, a: float, mc: McConfig) -> KnResult:
    """Cone integral of (det k)^a e^(-tr k) by three routes.

    closed  multivariate-gamma oracle Gamma_n(a + (n+1)/2)
    gauss   Gaussian-matrix form: 2^(n-1)/vol SO(n) * pi^(n^2/2)
            * E |det Q|^(2a+1) with iid N(0, 1/2) entries
    cone    importance sampling directly in the k_(ab) coordinates with an
            SPD indicator (Gamma diagonals, Laplace off-diagonals)
    """
    closed = kn_closed(n, a)

    # entry variance inflated to track the |det|^(2a+1) radial growth;
    # the residual Gaussian factor rides in the importance weight
    cvar = 1.0 + (2 * a + 1) / n

    def gauss_fn(rng: np.random.Generator, m: int) -> np.ndarray:
        q = rng.normal(0.0, np.sqrt(0.5 * cvar), size=(m, n, n))
        det = np.abs(np.linalg.det(q))
        expo = -(1.0 - 1.0 / cvar) * np.einsum("mij,mij->m", q, q)
        return det ** (2 * a + 1) * np.exp(expo) * cvar ** (0.5 * n * n)

    pref = 2.0 ** (n - 1) / so_volume(n) * np.pi ** (0.5 * n * n)
    gauss_raw = run_chunked(gauss_fn, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=21)
    gauss = McResult(pref * gauss_raw.mean, pref * gauss_raw.stderr,
                     gauss_raw.n_samples, gauss_raw.ess)

    shape_d = a + 1.5
    rate_d = 0.5
    scale_off = 1.25 * max(1, n - 1)

    def cone_fn(rng: np.random.Generator, m: int) -> np.ndarray:
        kdiag = rng.gamma(shape_d, 1.0 / rate_d, size=(m, n))
        kmat = np.zeros((m, n, n))
        logq = np.zeros(m)
        logq += (
            (shape_d - 1) * np.log(kdiag) - rate_d * kdiag
            + shape_d * np.log(rate_d) - gammaln(shape_d)
        ).sum(axis=1)
        for i in range(n):
            kmat[:, i, i] = kdiag[:, i]
        for i in range(n):
            for j in range(i + 1, n):
                off = rng.laplace(0.0, scale_off, size=m)
                kmat[:, i, j] = off
                kmat[:, j, i] = off
                logq += -np.abs(off) / scale_off - np.log(2 * scale_off)
        eigmin = np.linalg.eigvalsh(kmat)[:, 0]
        good = eigmin > 0
        out = np.zeros(m)
        if np.any(good):
            km = kmat[good]
            logdet = np.linalg.slogdet(km)[1]
            tr = np.einsum("mii->m", km)
            out[good] = np.exp(a * logdet - tr - logq[good])
        return out

    cone = run_chunked(cone_fn, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=22)
    return KnResult(closed=closed, gauss=gauss, cone=cone)


# ---------------------------------------------------------------------------
# Admissibility


@dataclass(frozen=True)
class AdmissibilityResult:
    """Closed forms of the admissibility constant against its direct integral.

    ``closed_on`` uses the O(n)-volume convention (omega_n) and reduces to
    2 pi beta / alpha at n = 1; ``closed_so`` uses vol SO(n) and equals the
    literal GL+ integral, which ``mc`` estimates.  The convention ratio
    closed_on / mc is therefore 2 up to MC error.
    """

    closed_on: float
    closed_so: float
    mc: McResult
    convention_ratio: float

    def consistent(self, k: float = 3.0) -> bool:
        return abs(self.mc.real - self.closed_so) <= k * self.mc.stderr


def admissibility_nd(fid: FiducialND, mc: McConfig) -> AdmissibilityResult:
    """Admissibility constant: closed forms and Gaussian-importance MC.

    The direct integral is (2 pi)^(n(n+1)/2) * C_n^2 *
    integral_{det S > 0} (det S)^(4 alpha - n) e^(-2 beta sum S^2) dS over
    GL+(n), estimated with iid N(0, 1/(4 beta)) entries and a det > 0
    indicator.
    """
    fid.require_admissible()
    n, a, b = fid.n, fid.alpha, fid.beta
    lg_ratio = lgamma_mv(2 * a, n) - lgamma_mv(2 * a + 0.5 * (n + 1), n)
    log_closed_so = (
        -n * np.log(2.0)
        + 0.5 * n * (n + 1) * np.log(4 * np.pi * b)
        + np.log(so_volume(n))
        + lg_ratio
    )
    closed_so = float(np.exp(log_closed_so))
    closed_on = 2.0 * closed_so

    sigma = 1.0 / np.sqrt(4.0 * b)
    log_pref = (
        0.5 * n * (n + 1) * np.log(2 * np.pi)
        + 2 * fid.log_cn
        + 0.5 * n * n * np.log(np.pi / (2 * b))
    )
    pref = float(np.exp(log_pref))
    power = 4 * a - n

    def sample_fn(rng: np.random.Generator, m: int) -> np.ndarray:
        s = rng.normal(0.0, sigma, size=(m, n, n))
        det = np.linalg.det(s)
        out = np.zeros(m)
        good = det > 0
        out[good] = det[good] ** power
        return out

    raw = run_chunked(sample_fn, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=23)
    est = McResult(pref * raw.mean, pref * raw.stderr, raw.n_samples, raw.ess)
    ratio = float(closed_on / est.real) if est.real else float("nan")
    return AdmissibilityResult(
        closed_on=closed_on, closed_so=closed_so, mc=est, convention_ratio=ratio
    )


# ---------------------------------------------------------------------------
# Resolution of unity


def _sym_stack(entries: np.ndarray, n: int) -> np.ndarray:
    """Assemble (m, n, n) symmetric matrices from (m, n(n+1)/2) entries."""
    m = entries.shape[0]
    out = np.zeros((m, n, n))
    pos = 0
    for i in range(n):
        for j in range(i, n):
            out[:, i, j] = entries[:, pos]
            out[:, j, i] = entries[:, pos]
            pos += 1
    return out


def _inv_sqrt_batch(x: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(x)
    return (vec * (lam[..., None, :] ** -0.5)) @ vec.swapaxes(-1, -2)


def resolution_check_nd(
    fid: FiducialND, l1: LabelG, l2: LabelG, mc: McConfig
) -> ResolutionResult:
    """Sandwich of the reduced resolution of unity against the overlap.

    Estimates N_flat^-1 * integral dF dG <l1|F,G><F,G|l2> by importance
    sampling.  The G proposal is a matrix-F distribution centered on the
    label midpoint with degrees (2p, 2p - n - 1): for coinciding labels this
    is exactly the G-marginal of the integrand (the F integral of the
    squared overlap), and its power-law tails match the integrand's decay
    in every cone direction, so the weights stay bounded where Wishart-type
    proposals would not.  F entries then use conditional Cauchy proposals
    with widths set by the sampled G (power-law F tails).
    """
    if mc.samples < 100_000:
        raise DomainError("n-D resolution sandwiches need at least 1e5 samples")
    n = fid.n
    p = fid.p_exponent
    fid.require_admissible()
    nfree = n * (n + 1) // 2
    iu = [(i, j) for i in range(n) for j in range(i, n)]

    w1 = np.linalg.inv(l1.g)
    w2 = np.linalg.inv(l2.g)
    center_f = 0.5 * (l1.f + l2.f)
    cf = np.array([center_f[i, j] for (i, j) in iu])
    df_half = np.array([0.5 * abs(l1.f[i, j] - l2.f[i, j]) for (i, j) in iu])

    amid = 0.5 * (l1.g + l2.g)
    a_sqrt = _inv_sqrt_batch(np.linalg.inv(amid)[None])[0]
    _, logdet_a = np.linalg.slogdet(amid)
    nu1 = 2.0 * p
    nu2 = 2.0 * p - n - 1.0
    log_bn = lgamma_mv(0.5 * nu1, n) + lgamma_mv(0.5 * nu2, n) - lgamma_mv(
        0.5 * (nu1 + nu2), n
    )
    eye = np.eye(n)

    def sample_fn(rng: np.random.Generator, m: int) -> np.ndarray:
        x = wishart_sample(rng, eye, nu1, m)
        y = wishart_sample(rng, eye, nu2, m)
        yi = _inv_sqrt_batch(y)
        hmat = symmetrize(yi @ x @ yi)
        g = symmetrize(a_sqrt[None] @ hmat @ a_sqrt[None].swapaxes(-1, -2))

        lam = np.linalg.eigvalsh(g)
        ok = (lam[:, 0] > lam[:, -1] * 1e-12) & (lam[:, -1] < 1e100) & (lam[:, 0] > 1e-100)
        out = np.zeros(m, dtype=complex)
        if not np.any(ok):
            return out
        g = g[ok]
        hmat = hmat[ok]
        mok = g.shape[0]

        _, logdet_h = np.linalg.slogdet(hmat)
        _, logdet_1h = np.linalg.slogdet(eye + hmat)
        logq_g = (
            -log_bn
            + 0.5 * (nu1 - n - 1) * logdet_h
            - 0.5 * (nu1 + nu2) * logdet_1h
            - 0.5 * (n + 1) * logdet_a
        )

        w = np.linalg.inv(g)
        wmid = 0.5 * (0.5 * (w1 + w2)[None] + w)
        diag = np.diagonal(wmid, axis1=-2, axis2=-1)
        scale_f = np.empty((mok, nfree))
        for col, (i, j) in enumerate(iu):
            scale_f[:, col] = (
                1.4 * fid.beta * np.sqrt(diag[:, i] * diag[:, j]) + df_half[col]
            )
        fent = cf + scale_f * np.tan(np.pi * (rng.random((mok, nfree)) - 0.5))
        logq_f = (
            -np.log(np.pi * scale_f) - np.log1p(((fent - cf) / scale_f) ** 2)
        ).sum(axis=1)
        fmat = _sym_stack(fent, n)

        integ = overlap_nd_many(fid, l1.f, l1.g, fmat, g) * overlap_nd_many(
            fid, fmat, g, l2.f, l2.g
        )
        out[ok] = integ * np.exp(-logq_f - logq_g)
        return out

    raw = run_chunked(sample_fn, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=24)
    estimate = raw.mean / fid.n_flat
    stderr = raw.stderr / fid.n_flat
    target = overlap_nd(fid, l1, l2)
    ratio = float(np.real(estimate / target)) if target != 0 else float("nan")
    return ResolutionResult(estimate=estimate, target=target, stderr=stderr,
                            ratio=ratio, n_samples=mc.samples, ess=raw.ess)


# ---------------------------------------------------------------------------
# Polarization and local geometry


def polarization_residual_nd(
    fid: FiducialND, label: LabelG, psi: LabelG, h: float = 1e-3
) -> PolarizationResult:
    """Residual of the matrix polarization identity on <F,G|psi>.

    Checks { i G^{ap} d/dF^{pb} + beta^-1 G^{ap} d/dG^{pb} - gamma delta }
    acting on the bra label, with derivatives taken w.r.t. the independent
    upper-triangle entries of F and of the contravariant W = G^-1 under the
    symmetric-perturbation convention, Richardson extrapolated.
    """
    n = fid.n
    w0 = np.linalg.inv(label.g)
    f0 = label.f
    gamma = fid.gamma

    def ov(fmat: np.ndarray, wmat: np.ndarray) -> complex:
        val = overlap_nd_many(
            fid,
            fmat[None],
            np.linalg.inv(wmat)[None],
            psi.f[None],
            psi.g[None],
        )
        return complex(val[0])

    # step sizes follow the natural scales: the overlap varies in F over
    # ~beta * (smallest eigenvalue of the W midpoint), and W perturbations
    # must stay well inside the cone
    w_eig_min = float(np.linalg.eigvalsh(w0)[0])
    wpsi = np.linalg.inv(psi.g)
    f_scale = fid.beta * float(np.linalg.eigvalsh(0.5 * (w0 + wpsi))[0])
    h_f = h * f_scale
    h_w = h * w_eig_min
    clamped = h_w < 1e-10
    if clamped:
        h_w = min(1e-10, 0.25 * w_eig_min)

    def sym_dir(i: int, j: int, n_: int) -> np.ndarray:
        e = np.zeros((n_, n_))
        e[i, j] = 1.0
        e[j, i] = 1.0
        return e

    def richardson(fn, step):
        def central(s):
            return (fn(s) - fn(-s)) / (2 * s)

        return (4.0 * central(step / 2) - central(step)) / 3.0

    df = np.zeros((n, n), dtype=complex)
    dw = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            direction = sym_dir(i, j, n)
            # symmetric perturbation computes d^(ij); halve off-diagonals
            fac = 1.0 if i == j else 0.5
            df_val = fac * richardson(lambda s: ov(f0 + s * direction, w0), h_f)
            dw_val = fac * richardson(lambda s: ov(f0, w0 + s * direction), h_w)
            df[i, j] = df[j, i] = df_val
            dw[i, j] = dw[j, i] = dw_val

    val = ov(f0, w0)
    resid_mat = 1j * w0 @ df + w0 @ dw / fid.beta - gamma * val * np.eye(n)
    residual = float(np.abs(resid_mat).max() / max(abs(val), 1e-300))
    return PolarizationResult(residual=residual, h_f=h_f, h_g=h_w, clamped=clamped)


def local_expansion_nd(
    fid: FiducialND, label: LabelG, df: np.ndarray, dg: np.ndarray
) -> LocalExpansion:
    """Symmetric-split log-overlap against the symplectic form and ray metric.

    dtheta   = -gamma tr(G dF)
    dSigma^2 = (gamma/2) [ beta tr((G^-1 dG)^2) + beta^-1 tr((G dF)^2) ]

    The quadratic form carries the same 1/2 as the 1-D case; both follow
    from expanding the exact overlap kernel to second order.
    """
    df = check_symmetric(df) if np.any(df) else np.zeros_like(label.g)
    dg = check_symmetric(dg) if np.any(dg) else np.zeros_like(label.g)
    g0 = label.g
    try:
        cholesky(g0 + 0.5 * dg)
        cholesky(g0 - 0.5 * dg)
    except Exception as exc:
        raise ConeExit("G +/- dG/2 must stay in the SPD cone") from exc
    if not np.any(df) and not np.any(dg):
        return LocalExpansion(0.0, 0.0, 0.0, 0.0)
    plus = LabelG(label.f + 0.5 * df, g0 + 0.5 * dg)
    minus = LabelG(label.f - 0.5 * df, g0 - 0.5 * dg)
    logval = np.log(overlap_nd(fid, plus, minus))
    ginv = np.linalg.inv(g0)
    gamma = fid.gamma
    dtheta_f = -gamma * float(np.trace(g0 @ df))
    m1 = ginv @ dg
    m2 = g0 @ df
    dsigma2_f = 0.5 * gamma * (
        fid.beta * float(np.trace(m1 @ m1)) + float(np.trace(m2 @ m2)) / fid.beta
    )
    return LocalExpansion(
        dtheta_num=float(np.imag(logval)),
        dsigma2_num=float(-2.0 * np.real(logval)),
        dtheta_formula=dtheta_f,
        dsigma2_formula=dsigma2_f,
    )


# ---------------------------------------------------------------------------
# Unitarity of the dilation action


@dataclass(frozen=True)
class UnitarityResult:
    norm_before: float
    norm_after: float
    discrepancy: float
    stderr: float


def unitarity_check(f, bmat: np.ndarray, mc: McConfig) -> UnitarityResult:
    """MC check that the dilation action preserves the cone-measure norm.

    Estimates ||U_B f||^2 and ||f||^2 with common samples from a half/half
    mixture of Wishart proposals matched to |f|^2 and |U_B f|^2, and returns
    the relative discrepancy of the two norms.
    """
    from .conetest import dilation_action

    g = dilation_action(f, bmat)
    n = f.n

    def norm_params(func):
        # |func|^2 ~ (det k)^(2 dp) e^(-tr(2 C k)); Wishart(V, df) matches
        # with df = 4 dp + n + 1 and V = (4 C)^-1.
        dp = max((d for (_, d) in func.terms), default=0.0)
        df = 4.0 * dp + n + 1
        if df <= n - 1:
            df = n + 0.5
        scale = np.linalg.inv(4.0 * func.base)
        return df, scale

    df_f, scale_f = norm_params(f)
    df_g, scale_g = norm_params(g)

    def draw(rng: np.random.Generator, m: int):
        pick = rng.random(m) < 0.5
        k = np.empty((m, n, n))
        n_a = int(pick.sum())
        if n_a:
            k[pick] = wishart_sample(rng, scale_f, df_f, n_a)
        if m - n_a:
            k[~pick] = wishart_sample(rng, scale_g, df_g, m - n_a)
        la = wishart_logpdf(k, scale_f, df_f)
        lb = wishart_logpdf(k, scale_g, df_g)
        mx = np.maximum(la, lb)
        logq = mx + np.log(0.5 * np.exp(la - mx) + 0.5 * np.exp(lb - mx))
        return k, logq

    def fn_diff(rng: np.random.Generator, m: int) -> np.ndarray:
        k, logq = draw(rng, m)
        vals = np.abs(g.eval_batch(k)) ** 2 - np.abs(f.eval_batch(k)) ** 2
        return vals * np.exp(-logq)

    def fn_norm(rng: np.random.Generator, m: int) -> np.ndarray:
        k, logq = draw(rng, m)
        return np.abs(f.eval_batch(k)) ** 2 * np.exp(-logq)

    # identical tags: both passes see the same draws, so the difference
    # estimate keeps its correlated-error cancellation
    diff_res = run_chunked(fn_diff, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=25)
    norm_res = run_chunked(fn_norm, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=25)
    norm_f = norm_res.real
    return UnitarityResult(
        norm_before=norm_f,
        norm_after=norm_f + diff_res.real,
        discrepancy=abs(diff_res.real) / max(norm_f, 1e-300),
        stderr=diff_res.stderr / max(norm_f, 1e-300),
    )

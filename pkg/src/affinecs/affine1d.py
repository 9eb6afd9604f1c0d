"""One-dimensional affine kinematics.

The representation space is L^2(0, infinity) with multiplication operator
sigma = k and dilation generator kappa = (theta k + k theta)/2,
theta = -i d/dk.  Coherent states are e^{iFk} G^{-1/2} eta(k/G) built from
the fiducial profile eta(k) = C1 k^alpha e^{-beta k}.

Closed forms implemented here:

    overlap   <F',G'|F,G> = [ (G'G)^{-1/2} / ((1/G' + 1/G)/2 + i(F'-F)/(2 beta)) ]^(2 alpha + 1)
    <sigma>   gamma1 * G          with gamma1 = (alpha + 1/2)/beta
    <kappa>   gamma1 * G * F
    flat-measure normalizer  N = 2 pi beta / alpha

Grid states sample wavefunctions on a log-spaced k grid with trapezoid
weights in log k, which is spectrally accurate for these decaying profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import gamma as gamma_dist

from .errors import ConeExit, DomainError, GridTooCoarse
from .mc import McConfig, run_chunked

__all__ = [
    "Fiducial1D",
    "Label1D",
    "GridState1D",
    "fiducial_eval",
    "make_grid",
    "coherent_wavefunction",
    "grid_inner",
    "overlap_1d",
    "overlap_1d_many",
    "admissibility_1d",
    "theta_matrix",
    "sigma_matrix",
    "kappa_matrix",
    "apply_sigma_grid",
    "apply_theta_grid",
    "apply_kappa_grid",
    "moments_1d",
    "upper_symbol_1d",
    "polarization_residual_1d",
    "local_expansion_1d",
    "resolution_check_1d",
]


@dataclass(frozen=True)
class Fiducial1D:
    """Fiducial parameters (alpha, beta) with derived constants."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise DomainError("alpha must be positive")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise DomainError("beta must be positive")

    @property
    def c1(self) -> float:
        """Normalization constant (2 beta)^(alpha+1/2) / sqrt(Gamma(2 alpha + 1))."""
        a, b = self.alpha, self.beta
        return float(np.exp((a + 0.5) * np.log(2 * b) - 0.5 * gammaln(2 * a + 1)))

    @property
    def gamma1(self) -> float:
        """(alpha + 1/2) / beta; the polarization constant and <sigma>."""
        return (self.alpha + 0.5) / self.beta

    @property
    def nconst(self) -> float:
        """Flat-measure resolution normalizer 2 pi beta / alpha."""
        return 2.0 * np.pi * self.beta / self.alpha


@dataclass(frozen=True)
class Label1D:
    """Coherent-state label (F, G) with G > 0."""

    f: float
    g: float

    def __post_init__(self):
        if not (self.g > 0 and np.isfinite(self.g) and np.isfinite(self.f)):
            raise DomainError("label requires finite F and G > 0")


@dataclass
class GridState1D:
    """Complex samples on a strictly increasing positive k grid."""

    kgrid: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.kgrid = np.asarray(self.kgrid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.kgrid[0] <= 0 or np.any(np.diff(self.kgrid) <= 0):
            raise DomainError("kgrid must be strictly increasing and positive")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2)))


def fiducial_eval(fid: Fiducial1D, k) -> np.ndarray | float:
    """Evaluate eta(k) = C1 k^alpha e^(-beta k) for k > 0."""
    karr = np.asarray(k, dtype=float)
    if np.any(karr <= 0):
        raise DomainError("fiducial is defined on k > 0")
    out = fid.c1 * karr**fid.alpha * np.exp(-fid.beta * karr)
    return out if out.ndim else float(out)


def make_grid(
    fid: Fiducial1D,
    labels: tuple[Label1D, ...] = (),
    npoints: int = 2048,
    tail_mass: float = 1e-14,
) -> tuple[np.ndarray, np.ndarray]:
    """Log-spaced grid covering every listed coherent state.

    |eta(k/G)|^2/G is a Gamma(2 alpha + 1, rate 2 beta / G) density; the grid
    spans the union of its quantile ranges so that the mass left outside is
    below ``tail_mass`` for each state, with a safety pad on both ends.
    """
    shape = 2 * fid.alpha + 1
    gvals = [1.0] + [lab.g for lab in labels]
    kmin = min(gamma_dist.ppf(tail_mass, shape, scale=g / (2 * fid.beta)) for g in gvals)
    kmax = max(gamma_dist.ppf(1 - tail_mass, shape, scale=g / (2 * fid.beta)) for g in gvals)
    kmin *= 0.2
    kmax *= 1.5
    kgrid = np.geomspace(kmin, kmax, npoints)
    du = np.log(kgrid[1] / kgrid[0])
    weights = kgrid * du
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return kgrid, weights


def coherent_wavefunction(
    fid: Fiducial1D,
    label: Label1D,
    grid: tuple[np.ndarray, np.ndarray] | None = None,
    npoints: int = 2048,
) -> GridState1D:
    """Samples of e^{iFk} G^{-1/2} eta(k/G) on a (shared or fresh) grid."""
    if grid is None:
        grid = make_grid(fid, (label,), npoints=npoints)
    kgrid, weights = grid
    vals = np.exp(1j * label.f * kgrid) * fiducial_eval(fid, kgrid / label.g) / np.sqrt(label.g)
    return GridState1D(kgrid=kgrid, values=vals, weights=weights)


def grid_inner(a: GridState1D, b: GridState1D) -> complex:
    """Quadrature inner product <a|b> on a common grid."""
    if a.kgrid.shape != b.kgrid.shape or not np.allclose(a.kgrid, b.kgrid):
        raise DomainError("states must share a grid")
    return complex(np.sum(a.weights * np.conj(a.values) * b.values))


def overlap_1d(fid: Fiducial1D, l1: Label1D, l2: Label1D) -> complex:
    """Closed-form overlap <l1|l2> on the principal branch.

    The denominator has positive real part for any valid labels, so the
    principal complex logarithm gives the unique branch continuous in the
    labels and real at l1 == l2.
    """
    return complex(overlap_1d_many(fid, l1.f, l1.g, l2.f, l2.g))


def overlap_1d_many(fid: Fiducial1D, f1, g1, f2, g2) -> np.ndarray:
    """Vectorized overlap for label arrays (bra f1,g1; ket f2,g2)."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    denom = 0.5 * (1.0 / g1 + 1.0 / g2) + 0.5j * (np.asarray(f1) - np.asarray(f2)) / fid.beta
    logval = (2 * fid.alpha + 1) * (-0.5 * (np.log(g1) + np.log(g2)) - np.log(denom))
    return np.exp(logval)


def admissibility_1d(fid: Fiducial1D, npoints: int = 4096) -> tuple[float, float]:
    """(closed form, quadrature estimate) of 2 pi * integral k^-1 |eta|^2 dk.

    The closed form is 2 pi beta / alpha; the estimate integrates on the
    log grid as an independent numerical route.
    """
    kgrid, weights = make_grid(fid, npoints=npoints)
    eta = fiducial_eval(fid, kgrid)
    quad = 2.0 * np.pi * float(np.sum(weights * eta**2 / kgrid))
    return fid.nconst, quad


# Five-point interior stencil for d/du on the uniform log grid, with
# one-sided fourth-order rows at the edges.
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def _ddu_matrix(n: int, du: float) -> np.ndarray:
    d = np.zeros((n, n))
    c1, c2 = 8.0 / (12.0 * du), 1.0 / (12.0 * du)
    idx = np.arange(2, n - 2)
    d[idx, idx - 2] = c2
    d[idx, idx - 1] = -c1
    d[idx, idx + 1] = c1
    d[idx, idx + 2] = -c2
    d[0, :5] = _EDGE0 / du
    d[1, :5] = _EDGE1 / du
    d[-1, -5:] = -_EDGE0[::-1] / du
    d[-2, -5:] = -_EDGE1[::-1] / du
    return d


def _require_log_grid(kgrid: np.ndarray) -> float:
    if kgrid.size < 16:
        raise GridTooCoarse("grid operators need at least 16 points")
    du = np.diff(np.log(kgrid))
    if not np.allclose(du, du[0], rtol=1e-8):
        raise DomainError("grid operators require a log-spaced grid")
    return float(du[0])


def theta_matrix(kgrid: np.ndarray) -> np.ndarray:
    """Dense matrix of theta = -i d/dk, written as -i k^-1 d/du on log k."""
    du = _require_log_grid(kgrid)
    return -1j * (_ddu_matrix(kgrid.size, du) / kgrid[:, None])


def sigma_matrix(kgrid: np.ndarray) -> np.ndarray:
    return np.diag(kgrid).astype(complex)


def kappa_matrix(kgrid: np.ndarray) -> np.ndarray:
    """Dense matrix of kappa = (theta k + k theta)/2."""
    th = theta_matrix(kgrid)
    sg = sigma_matrix(kgrid)
    return 0.5 * (th @ sg + sg @ th)


def apply_sigma_grid(state: GridState1D) -> GridState1D:
    _require_log_grid(state.kgrid)
    return GridState1D(state.kgrid, state.kgrid * state.values, state.weights)


def _ddu_apply(values: np.ndarray, du: float) -> np.ndarray:
    """Stencil application of d/du without forming the dense matrix."""
    out = np.empty_like(values)
    v = values
    out[2:-2] = (8.0 * (v[3:-1] - v[1:-3]) - (v[4:] - v[:-4])) / (12.0 * du)
    out[0] = np.dot(_EDGE0, v[:5]) / du
    out[1] = np.dot(_EDGE1, v[:5]) / du
    out[-1] = -np.dot(_EDGE0[::-1], v[-5:]) / du
    out[-2] = -np.dot(_EDGE1[::-1], v[-5:]) / du
    return out


def apply_theta_grid(state: GridState1D) -> GridState1D:
    du = _require_log_grid(state.kgrid)
    dvals = _ddu_apply(state.values, du)
    return GridState1D(state.kgrid, -1j * dvals / state.kgrid, state.weights)


def apply_kappa_grid(state: GridState1D) -> GridState1D:
    half1 = apply_theta_grid(apply_sigma_grid(state))
    half2 = apply_sigma_grid(apply_theta_grid(state))
    return GridState1D(state.kgrid, 0.5 * (half1.values + half2.values), state.weights)


@dataclass(frozen=True)
class Moments1D:
    sigma_mean: float
    kappa_mean: float
    sigma_var: float
    kappa_var: float


def moments_1d(fid: Fiducial1D, nquad: int = 96) -> Moments1D:
    """Fiducial moments; means in closed form, variances by quadrature.

    Variances use generalized Gauss-Laguerre nodes for the weight
    x^(2 alpha) e^(-x), which integrates the polynomial factors exactly.
    kappa eta = -i((alpha + 1/2) - beta k) eta, so <kappa^2> = ||kappa eta||^2
    reduces to the same weight.
    """
    from scipy.special import roots_genlaguerre

    a, b = fid.alpha, fid.beta
    x, w = roots_genlaguerre(nquad, 2 * a)
    norm = np.exp(gammaln(2 * a + 1))
    k = x / (2 * b)
    sigma_mean = (a + 0.5) / b
    sigma_var = float(np.sum(w * (k - sigma_mean) ** 2) / norm)
    kappa_var = float(np.sum(w * ((a + 0.5) - b * k) ** 2) / norm)
    return Moments1D(sigma_mean=sigma_mean, kappa_mean=0.0,
                     sigma_var=sigma_var, kappa_var=kappa_var)


def upper_symbol_1d(
    fid: Fiducial1D,
    which: str,
    label: Label1D,
    method: str = "closed",
    npoints: int = 4096,
) -> float:
    """Diagonal expectation <F,G|op|F,G> for op in {sigma, kappa}.

    Closed forms: gamma1*G for sigma and gamma1*G*F for kappa.  The "grid"
    method evaluates the same sandwich by quadrature with the dense grid
    operators and must agree to ~1e-6.
    """
    if which not in ("sigma", "kappa"):
        raise DomainError(f"unknown operator {which!r}")
    if method == "closed":
        if which == "sigma":
            return fid.gamma1 * label.g
        return fid.gamma1 * label.g * label.f
    if method == "grid":
        state = coherent_wavefunction(fid, label, npoints=npoints)
        op_state = apply_sigma_grid(state) if which == "sigma" else apply_kappa_grid(state)
        return float(np.real(grid_inner(state, op_state)))
    raise DomainError(f"unknown method {method!r}")


@dataclass(frozen=True)
class PolarizationResult:
    residual: float
    h_f: float
    h_g: float
    clamped: bool


def polarization_residual_1d(
    fid: Fiducial1D,
    label: Label1D,
    psi: Label1D,
    h: float = 1e-3,
) -> PolarizationResult:
    """Residual of [i G^-1 d/dF - beta^-1 G d/dG - gamma1] on <F,G|psi>.

    Derivatives are Richardson-extrapolated central differences with steps
    scaled to each coordinate; the residual is reported relative to the
    overlap magnitude.  A floor on the G step guards degenerate labels and
    is flagged via ``clamped``.
    """
    f0, g0 = label.f, label.g
    # the overlap varies in F over ~beta/G and in G over ~G itself
    h_f = h * fid.beta * 0.5 * (1.0 / g0 + 1.0 / psi.g)
    h_g = h * g0
    clamped = False
    if h_g < 1e-10:
        h_g = 1e-10
        clamped = True
        if g0 - h_g <= 0:
            h_g = 0.5 * g0

    def ov(f, g):
        return overlap_1d(fid, Label1D(f, g), psi)

    def central(fn, x0, step):
        return (fn(x0 + step) - fn(x0 - step)) / (2 * step)

    def richardson(fn, x0, step):
        return (4.0 * central(fn, x0, step / 2) - central(fn, x0, step)) / 3.0

    df = richardson(lambda f: ov(f, g0), f0, h_f)
    dg = richardson(lambda g: ov(f0, g), g0, h_g)
    val = ov(f0, g0)
    resid = 1j / g0 * df - g0 * dg / fid.beta - fid.gamma1 * val
    return PolarizationResult(
        residual=float(abs(resid) / max(abs(val), 1e-300)),
        h_f=h_f, h_g=h_g, clamped=clamped,
    )


@dataclass(frozen=True)
class LocalExpansion:
    dtheta_num: float
    dsigma2_num: float
    dtheta_formula: float
    dsigma2_formula: float


def local_expansion_1d(fid: Fiducial1D, label: Label1D, df: float, dg: float) -> LocalExpansion:
    """Second-order log-overlap expansion against the geometric forms.

    For the symmetric split <F+dF/2, G+dG/2 | F-dF/2, G-dG/2> the log equals
    i*dtheta - dSigma^2/2 + O(eps^3) with

        dtheta   = -gamma1 * G * dF
        dSigma^2 = (gamma1/2) * [beta^-1 G^2 dF^2 + beta G^-2 dG^2]

    The quadratic coefficient carries the 1/2 required by the exact overlap
    kernel; it equals the fiducial variance metric (for example at
    alpha=1/2, beta=1, G=1 the dF^2 coefficient is var sigma = 1/2).
    """
    f0, g0 = label.f, label.g
    if g0 - abs(dg) / 2 <= 0:
        raise ConeExit("G - dG/2 must stay positive")
    if df == 0.0 and dg == 0.0:
        return LocalExpansion(0.0, 0.0, 0.0, 0.0)
    plus = Label1D(f0 + df / 2, g0 + dg / 2)
    minus = Label1D(f0 - df / 2, g0 - dg / 2)
    logval = np.log(overlap_1d(fid, plus, minus))
    g1 = fid.gamma1
    dtheta_f = -g1 * g0 * df
    dsigma2_f = 0.5 * g1 * (g0**2 * df**2 / fid.beta + fid.beta * dg**2 / g0**2)
    return LocalExpansion(
        dtheta_num=float(np.imag(logval)),
        dsigma2_num=float(-2.0 * np.real(logval)),
        dtheta_formula=dtheta_f,
        dsigma2_formula=dsigma2_f,
    )


@dataclass(frozen=True)
class ResolutionResult:
    estimate: complex
    target: complex
    stderr: float
    ratio: float
    n_samples: int
    ess: float = float("nan")

    def within(self, k: float = 3.0) -> bool:
        return abs(self.estimate - self.target) <= k * self.stderr


def resolution_check_1d(
    fid: Fiducial1D, l1: Label1D, l2: Label1D, mc: McConfig
) -> ResolutionResult:
    """Sandwich N^-1 integral dF dG <l1|F,G><F,G|l2> against the overlap.

    Importance sampling: Cauchy in F centered between the labels (the
    integrand decays as a power of F, so Gaussian proposals undersample
    those tails) and truncated Cauchy in log G about the geometric
    midpoint (the integrand decays exponentially in log G, so lighter
    proposals there give unbounded weights and a biased-low estimate).
    """
    if mc.samples < 10_000:
        raise DomainError("resolution sandwiches need at least 1e4 samples")
    cf = 0.5 * (l1.f + l2.f)
    sf = fid.beta * (1.0 / l1.g + 1.0 / l2.g) + 0.5 * abs(l1.f - l2.f)
    cu = 0.5 * (np.log(l1.g) + np.log(l2.g))
    su = 1.1
    theta_u = np.arctan(40.0 / su)

    def sample_fn(rng: np.random.Generator, m: int) -> np.ndarray:
        fvals = cf + sf * np.tan(np.pi * (rng.random(m) - 0.5))
        u = cu + su * np.tan(theta_u * (2 * rng.random(m) - 1))
        gvals = np.exp(u)
        q_f = 1.0 / (np.pi * sf * (1.0 + ((fvals - cf) / sf) ** 2))
        q_g = 1.0 / (2 * theta_u * su * (1.0 + ((u - cu) / su) ** 2)) / gvals
        integ = overlap_1d_many(fid, l1.f, l1.g, fvals, gvals) * overlap_1d_many(
            fid, fvals, gvals, l2.f, l2.g
        )
        return integ / (q_f * q_g)

    res = run_chunked(sample_fn, mc.samples, mc.seed, mc.chunk_size, mc.threads, tag=11)
    estimate = res.mean / fid.nconst
    stderr = res.stderr / fid.nconst
    target = overlap_1d(fid, l1, l2)
    ratio = float(np.real(estimate / target)) if target != 0 else float("nan")
    return ResolutionResult(estimate=estimate, target=target, stderr=stderr,
                            ratio=ratio, n_samples=mc.samples, ess=res.ess)

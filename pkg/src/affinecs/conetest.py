"""Analytic test functions on the SPD cone, closed under the affine algebra.

A :class:`ConeTestFunction` is a finite sum

    f(k) = sum_t  c_t * m_t(k) * (det k)^(d_t) * exp(-tr(C k))

where each m_t is a monomial in the symmetrized entries k_(ab) and the d_t
are real det powers.  The family is closed under

  * multiplication by k_(ab)                      (the sigma operators),
  * the symmetrized derivatives d^(ab) = (d/dk_ab + d/dk_ba)/2
    (Jacobi's formula turns det powers into adjugate-entry polynomials),
  * the dilation action f -> (det S)^((n+1)/2) f(S^T k S).

All derivatives are exact, so commutator identities can be checked at
individual cone points to roundoff.

Indices are 0-based throughout this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import DomainError
from .matrixcore import mat_exp, symmetrize

__all__ = [
    "ConeTestFunction",
    "fiducial_function",
    "apply_sigma_nd",
    "apply_kappa_nd",
    "dilation_action",
    "commutator_residual",
]

# A monomial is a sorted tuple of (((a, b), power), ...) with a <= b;
# a polynomial maps monomials to complex coefficients.
Monomial = tuple
Polynomial = dict


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    acc = dict(m1)
    for key, p in m2:
        acc[key] = acc.get(key, 0) + p
    return tuple(sorted(acc.items()))


def _poly_mul(p1: Polynomial, p2: Polynomial) -> Polynomial:
    out: Polynomial = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            key = _mono_mul(m1, m2)
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def _poly_scale(p: Polynomial, c: complex) -> Polynomial:
    return {m: c * v for m, v in p.items()}


def _entry_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def _entry_poly(a: int, b: int) -> Polynomial:
    return {((_entry_key(a, b), 1),): 1.0}


def _mono_eval(m: Monomial, k: np.ndarray) -> complex:
    out = 1.0
    for (a, b), p in m:
        out = out * k[a, b] ** p
    return out


def _poly_eval(p: Polynomial, k: np.ndarray) -> complex:
    return sum(c * _mono_eval(m, k) for m, c in p.items())


def _d_sym_entry(a: int, b: int, c: int, d: int) -> float:
    """d^(ab) applied to k_(cd): (delta_ac delta_bd + delta_ad delta_bc)/2."""
    return 0.5 * ((a == c) * (b == d) + (a == d) * (b == c))


def _mono_diff(m: Monomial, a: int, b: int) -> Polynomial:
    out: Polynomial = {}
    for i, ((c, d), p) in enumerate(m):
        coeff = p * _d_sym_entry(a, b, c, d)
        if coeff == 0.0:
            continue
        rest = list(m)
        if p == 1:
            rest.pop(i)
        else:
            rest[i] = ((c, d), p - 1)
        key = tuple(rest)
        out[key] = out.get(key, 0.0) + coeff
    return out


def _det_poly(n: int, rows: list[int], cols: list[int]) -> Polynomial:
    """Determinant of the submatrix k[rows, cols] as a polynomial in k_(ab)."""
    out: Polynomial = {}
    for perm in permutations(range(len(rows))):
        sign = _perm_sign(perm)
        mono: Monomial = ()
        for i, j in enumerate(perm):
            mono = _mono_mul(mono, ((_entry_key(rows[i], cols[j]), 1),))
        out[mono] = out.get(mono, 0.0) + sign
    return out


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _adjugate_poly(n: int, a: int, b: int) -> Polynomial:
    """adj(k)_(ab) as a polynomial (degree n-1); d^(ab) det k = adj(k)_(ab)."""
    if n == 1:
        return {(): 1.0}
    rows = [i for i in range(n) if i != b]
    cols = [j for j in range(n) if j != a]
    sign = (-1) ** (a + b)
    return _poly_scale(_det_poly(n, rows, cols), sign)


@dataclass
class ConeTestFunction:
    """Sum of monomial * det-power terms against exp(-tr(C k))."""

    n: int
    base: np.ndarray
    terms: dict  # (monomial, detpower) -> complex coefficient

    def __post_init__(self):
        self.base = symmetrize(np.asarray(self.base, dtype=float))
        if self.base.shape != (self.n, self.n):
            raise DomainError("base exponent matrix has the wrong shape")
        self.terms = {key: complex(c) for key, c in self.terms.items() if c != 0}

    def __call__(self, k: np.ndarray) -> complex:
        k = np.asarray(k, dtype=float)
        logdet = np.linalg.slogdet(k)[1]
        expfac = np.exp(-np.trace(self.base @ k))
        out = 0.0 + 0.0j
        for (mono, dp), c in self.terms.items():
            out += c * _mono_eval(mono, k) * np.exp(dp * logdet)
        return complex(out * expfac)

    def eval_batch(self, kstack: np.ndarray) -> np.ndarray:
        """Evaluate on a stack of SPD matrices, shape (m, n, n) -> (m,)."""
        kstack = np.asarray(kstack, dtype=float)
        logdet = np.linalg.slogdet(kstack)[1]
        tr = np.einsum("ij,mji->m", self.base, kstack)
        out = np.zeros(kstack.shape[0], dtype=complex)
        for (mono, dp), c in self.terms.items():
            vals = np.full(kstack.shape[0], c, dtype=complex)
            for (a, b), p in mono:
                vals *= kstack[:, a, b] ** p
            out += vals * np.exp(dp * logdet)
        return out * np.exp(-tr)

    def scaled(self, c: complex) -> "ConeTestFunction":
        return ConeTestFunction(self.n, self.base, _scale_terms(self.terms, c))

    def plus(self, other: "ConeTestFunction") -> "ConeTestFunction":
        if not np.allclose(self.base, other.base):
            raise DomainError("can only add functions with a common exponent matrix")
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0.0) + c
        return ConeTestFunction(self.n, self.base, terms)

    def d_sym(self, a: int, b: int) -> "ConeTestFunction":
        """Exact symmetrized partial derivative d^(ab) of the function."""
        n = self.n
        out: dict = {}
        adj = _adjugate_poly(n, a, b)
        cab = self.base[a, b]
        for (mono, dp), c in self.terms.items():
            for m2, c2 in _mono_diff(mono, a, b).items():
                _acc(out, (m2, dp), c * c2)
            if dp != 0.0:
                for m2, c2 in _poly_mul({mono: 1.0}, adj).items():
                    _acc(out, (m2, dp - 1.0), c * dp * c2)
            _acc(out, (mono, dp), -c * cab)
        return ConeTestFunction(n, self.base, out)

    def mul_entry(self, a: int, b: int) -> "ConeTestFunction":
        out: dict = {}
        key = ((_entry_key(a, b), 1),)
        for (mono, dp), c in self.terms.items():
            _acc(out, (_mono_mul(mono, key), dp), c)
        return ConeTestFunction(self.n, self.base, out)

    def max_detpower_drop(self) -> float:
        return min((dp for (_, dp) in self.terms), default=0.0)


def _acc(d: dict, key, val) -> None:
    d[key] = d.get(key, 0.0) + val


def _scale_terms(terms: dict, c: complex) -> dict:
    return {key: c * v for key, v in terms.items()}


def fiducial_function(n: int, alpha: float, beta: float, coeff: complex = 1.0) -> ConeTestFunction:
    """(det k)^alpha e^(-beta tr k), the n-dimensional fiducial profile."""
    return ConeTestFunction(n, beta * np.eye(n), {((), float(alpha)): coeff})


def apply_sigma_nd(f: ConeTestFunction, a: int, b: int) -> ConeTestFunction:
    """sigma_ab f = k_(ab) f."""
    _check_index(f.n, a, b)
    return f.mul_entry(a, b)


def apply_kappa_nd(f: ConeTestFunction, a: int, b: int) -> ConeTestFunction:
    """kappa_a^b f = -i [ sum_p k_(ap) d^(bp) + (n+1)/4 ] f."""
    _check_index(f.n, a, b)
    n = f.n
    acc = f.scaled(0.25 * (n + 1) if a == b else 0.0)
    for p in range(n):
        acc = acc.plus(f.d_sym(b, p).mul_entry(a, p))
    return acc.scaled(-1j)


def dilation_action(f: ConeTestFunction, bmat: np.ndarray) -> ConeTestFunction:
    """Unitary dilation: f -> (det S)^((n+1)/2) f(S^T k S) with S = exp(-B/2)."""
    n = f.n
    bmat = np.asarray(bmat, dtype=float)
    s = mat_exp(-0.5 * bmat)
    logdet_s = np.linalg.slogdet(s)[1]
    # k_(ab) pulled back through k -> S^T k S becomes a linear form in k_(pq)
    entry_forms = {}
    for a in range(n):
        for b in range(a, n):
            form: Polynomial = {}
            for p in range(n):
                for q in range(p, n):
                    c = s[p, a] * s[q, b] + (s[q, a] * s[p, b] if p != q else 0.0)
                    if c != 0.0:
                        _acc(form, (((p, q), 1),), c)
            entry_forms[(a, b)] = form

    new_terms: dict = {}
    prefac = np.exp(0.5 * (n + 1) * logdet_s)
    for (mono, dp), c in f.terms.items():
        poly: Polynomial = {(): 1.0}
        for (a, b), p in mono:
            for _ in range(p):
                poly = _poly_mul(poly, entry_forms[(a, b)])
        factor = prefac * np.exp(2.0 * dp * logdet_s)
        for m2, c2 in poly.items():
            _acc(new_terms, (m2, dp), c * c2 * factor)
    new_base = symmetrize(s @ f.base @ s.T)
    return ConeTestFunction(n, new_base, new_terms)


def _check_index(n: int, a: int, b: int) -> None:
    if not (0 <= a < n and 0 <= b < n):
        raise DomainError(f"indices must lie in [0, {n})")


def _kappa_rhs(f, which: str, idx):
    """Commutator right-hand sides of the algebra, applied to f."""
    n = f.n
    zero = f.scaled(0.0)
    if which == "sigma_sigma":
        return zero
    if which == "sigma_kappa":
        # [sigma_jk, kappa_a^b] = (i/2)(delta_j^b sigma_ak + delta_k^b sigma_aj)
        j, k, a, b = idx
        out = zero
        if j == b:
            out = out.plus(apply_sigma_nd(f, a, k).scaled(0.5j))
        if k == b:
            out = out.plus(apply_sigma_nd(f, a, j).scaled(0.5j))
        return out
    if which == "kappa_kappa":
        # [kappa_a^b, kappa_j^k] = (i/2)(delta_a^k kappa_j^b - delta_j^b kappa_a^k)
        a, b, j, k = idx
        out = zero
        if a == k:
            out = out.plus(apply_kappa_nd(f, j, b).scaled(0.5j))
        if j == b:
            out = out.plus(apply_kappa_nd(f, a, k).scaled(-0.5j))
        return out
    raise DomainError(f"unknown commutator family {which!r}")


def commutator_residual(
    f: ConeTestFunction,
    which: str,
    idx: tuple,
    points: list[np.ndarray],
) -> float:
    """Max relative deviation of [A, B] f from its algebra value at cone points.

    ``which`` is one of "kappa_kappa", "sigma_kappa", "sigma_sigma";
    ``idx`` carries the four operator indices (0-based).
    """
    if which == "sigma_sigma":
        j, k, a, b = idx
        op1 = lambda h: apply_sigma_nd(h, j, k)
        op2 = lambda h: apply_sigma_nd(h, a, b)
    elif which == "sigma_kappa":
        j, k, a, b = idx
        op1 = lambda h: apply_sigma_nd(h, j, k)
        op2 = lambda h: apply_kappa_nd(h, a, b)
    elif which == "kappa_kappa":
        a, b, j, k = idx
        op1 = lambda h: apply_kappa_nd(h, a, b)
        op2 = lambda h: apply_kappa_nd(h, j, k)
    else:
        raise DomainError(f"unknown commutator family {which!r}")

    f1 = op1(f)
    f2 = op2(f)
    comm_plus = op1(f2)
    comm_minus = op2(f1)
    rhs = _kappa_rhs(f, which, idx)
    pts = np.asarray(points, dtype=float)
    diff = comm_plus.eval_batch(pts) - comm_minus.eval_batch(pts) - rhs.eval_batch(pts)
    scale = (np.abs(f.eval_batch(pts)) + np.abs(f1.eval_batch(pts))
             + np.abs(f2.eval_batch(pts))).max()
    return float(np.abs(diff).max() / max(scale, 1e-300))

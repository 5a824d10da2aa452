"""Exact parameter algebra for W(u, psi) with psi(z) = a z + b and u(z) = u0 exp(c z).

Functions of the form exp(alpha z) * polynomial are closed under W, so orbits of
such functions are represented exactly by :class:`ExpPoly`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "ATOL",
    "OperatorParams",
    "IterateParams",
    "ExpPoly",
    "iterate_params",
    "compose",
    "fixed_point",
    "weight_at_fixed_point",
    "bound_constant",
    "apply",
    "expoly_coeffs",
    "expoly_coeffs_scaled",
    "truncation_for",
    "fock_norm",
    "kernel",
    "normalized_kernel",
    "is_close",
]

#: absolute tolerance for every complex equality test (c == -a conj(b), a == 1, ...)
ATOL = 1e-12


def is_close(x, y, atol=ATOL):
    return abs(complex(x) - complex(y)) <= atol


@dataclass(frozen=True)
class OperatorParams:
    """The tuple (p, a, b, c, u0) determining W f = u0 e^{cz} f(az + b) on F_p.

    Boundedness is not checked here; it is a verdict of :func:`fockdyn.classify.classify`.
    """

    a: complex
    b: complex = 0j
    c: complex = 0j
    u0: complex = 1 + 0j
    p: float = 2.0

    def __post_init__(self):
        for name in ("a", "b", "c", "u0"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "p", float(self.p))
        if not self.p >= 1.0:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.u0 == 0:
            raise ValueError("u0 must be nonzero (the zero operator is not supported)")
        for name in ("a", "b", "c", "u0"):
            v = getattr(self, name)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"{name} must be finite, got {v}")

    def u(self, z):
        """Evaluate the weight u at z (scalar or array)."""
        return self.u0 * np.exp(self.c * np.asarray(z))

    def psi(self, z):
        return self.a * np.asarray(z) + self.b

    @property
    def a_is_one(self):
        return is_close(self.a, 1)

    @property
    def is_composition(self):
        """u == 1 identically, i.e. W is the plain composition operator C_psi."""
        return is_close(self.c, 0) and is_close(self.u0, 1)


@dataclass(frozen=True)
class IterateParams:
    """Coefficients of W^n = W(u_n, psi^n) with psi^n(z) = a_n z + b_n, u_n(z) = u0_n e^{c_n z}."""

    n: int
    a_n: complex
    b_n: complex
    c_n: complex
    u0_n: complex

    def as_params(self, p=2.0):
        return OperatorParams(a=self.a_n, b=self.b_n, c=self.c_n, u0=self.u0_n, p=p)


def _translation_sum(a, b, n):
    """sum_{j=0}^{n-1} b_j where psi^j(z) = a^j z + b_j."""
    if is_close(a, 1):
        return b * n * (n - 1) / 2
    geo = (1 - a**n) / (1 - a)
    return b / (1 - a) * (n - geo)


def iterate_params(P: OperatorParams, n: int) -> IterateParams:
    if n < 1:
        raise ValueError("iterate index n must be >= 1")
    a, b, c, u0 = P.a, P.b, P.c, P.u0
    if is_close(a, 1):
        # separate branch: the a != 1 formulas are 0/0 here
        return IterateParams(n, a**n, n * b, n * c, u0**n * cmath.exp(c * b * n * (n - 1) / 2))
    geo = (1 - a**n) / (1 - a)
    return IterateParams(n, a**n, b * geo, c * geo, u0**n * cmath.exp(c * _translation_sum(a, b, n)))


def compose(P: OperatorParams, Q: OperatorParams) -> OperatorParams:
    """Parameters of the product W_P W_Q (apply Q first, then P)."""
    return OperatorParams(
        a=P.a * Q.a,
        b=Q.a * P.b + Q.b,
        c=P.c + Q.c * P.a,
        u0=P.u0 * Q.u0 * cmath.exp(Q.c * P.b),
        p=P.p,
    )


def fixed_point(P: OperatorParams) -> complex:
    if P.a_is_one:
        raise ValueError("no finite fixed point: a == 1")
    return P.b / (1 - P.a)


def weight_at_fixed_point(P: OperatorParams) -> complex:
    return P.u0 * cmath.exp(P.c * fixed_point(P))


def bound_constant(P: OperatorParams) -> float:
    """M(u, psi) = sup_z |u(z)| exp((|psi(z)|^2 - |z|^2) / 2), in closed form."""
    abs_a = abs(P.a)
    drift = P.c + P.a * P.b.conjugate()
    if abs_a < 1 - ATOL:
        expo = abs(P.b) ** 2 / 2 + abs(drift) ** 2 / (2 * (1 - abs_a**2))
        return abs(P.u0) * math.exp(expo)
    if abs_a <= 1 + ATOL and abs(drift) <= ATOL:
        return abs(P.u0) * math.exp(abs(P.b) ** 2 / 2)
    return math.inf


@dataclass(frozen=True)
class ExpPoly:
    """f(z) = exp(alpha z) * sum_k coeffs[k] z^k."""

    alpha: complex = 0j
    coeffs: tuple = field(default=(1 + 0j,))

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        cs = tuple(complex(x) for x in self.coeffs)
        if not cs:
            raise ValueError("ExpPoly needs at least one coefficient")
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self):
        nz = [k for k, q in enumerate(self.coeffs) if q != 0]
        return nz[-1] if nz else -1

    @property
    def zero_free(self):
        """Nonzero constant polynomial part; the exponential factor never vanishes."""
        return self.degree == 0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        poly = np.polynomial.polynomial.polyval(z, np.array(self.coeffs))
        return np.exp(self.alpha * z) * poly

    def scale(self, s):
        return ExpPoly(self.alpha, tuple(s * q for q in self.coeffs))


def kernel(w) -> ExpPoly:
    """Reproducing kernel K_w(z) = exp(conj(w) z)."""
    return ExpPoly(complex(w).conjugate(), (1,))


def normalized_kernel(w) -> ExpPoly:
    w = complex(w)
    return ExpPoly(w.conjugate(), (math.exp(-abs(w) ** 2 / 2),))


def apply(P: OperatorParams, f: ExpPoly) -> ExpPoly:
    """Exact image u0 e^{cz} f(az + b) as a new ExpPoly."""
    a, b = P.a, P.b
    deg = len(f.coeffs)
    out = np.zeros(deg, dtype=complex)
    # (a z + b)^k = sum_j C(k, j) a^j b^(k-j) z^j
    for k, q in enumerate(f.coeffs):
        if q == 0:
            continue
        for j in range(k + 1):
            out[j] += q * math.comb(k, j) * a**j * b ** (k - j)
    scalar = P.u0 * cmath.exp(f.alpha * b)
    return ExpPoly(P.c + f.alpha * a, tuple(scalar * out))


def _log_abs_phase(x):
    """log|x| and x/|x| elementwise, with log 0 = -inf and phase 0 -> 1."""
    x = np.asarray(x, dtype=complex)
    mag = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        logm = np.log(mag)
    # from the angle, not x / |x|, which overflows for subnormal x
    phase = np.where(mag > 0, np.exp(1j * np.angle(x)), 1)
    return logm, phase


def expoly_coeffs_scaled(f: ExpPoly, N: int):
    """(v, s) with <f, e_m> = v[m] * exp(s), scaled so that max |v| = 1.

    For orbits whose norms overflow a float (e.g. translated kernels).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    m = np.arange(N)
    half_lfact = 0.5 * gammaln(m + 1)
    log_alpha, ph_alpha = _log_abs_phase(f.alpha)
    parts = []
    for k, q in enumerate(f.coeffs):
        if q == 0 or k >= N:
            continue
        logq, phq = math.log(abs(q)), cmath.exp(1j * cmath.phase(q))
        if f.alpha == 0:
            logt = np.array([logq + half_lfact[k]])
            parts.append((k, logt, np.array([phq])))
            continue
        d = m[k:] - k
        logt = logq + half_lfact[k:] + d * log_alpha - gammaln(d + 1)
        parts.append((k, logt, phq * ph_alpha**d))
    out = np.zeros(N, dtype=complex)
    if not parts:
        return out, 0.0
    shift = max(float(np.max(lt)) for _, lt, _ in parts)
    for k, logt, ph in parts:
        out[k : k + len(logt)] += np.exp(logt - shift) * ph
    peak = np.max(np.abs(out))
    if peak == 0:
        return out, 0.0
    return out / peak, shift + math.log(peak)


def expoly_coeffs(f: ExpPoly, N: int | None = None, tol: float = 1e-12) -> np.ndarray:
    """Coefficients <f, e_m>, m < N, in the orthonormal basis e_m = z^m / sqrt(m!).

    For f = e^{alpha z} z^k the coefficient is sqrt(m!) alpha^(m-k) / (m-k)! for m >= k.
    With ``N=None`` the truncation is chosen by :func:`truncation_for`.
    """
    if N is None:
        N = truncation_for(f, tol)
    v, shift = expoly_coeffs_scaled(f, N)
    return v * math.exp(shift)


def truncation_for(f: ExpPoly, tol: float = 1e-12, start: int = 16, cap: int = 1 << 14) -> int:
    """Smallest N (grown in steps of 10) whose next 10 coefficients carry < tol^2 of the norm^2."""
    N = max(start, len(f.coeffs) + 1)
    while N <= cap:
        c, _ = expoly_coeffs_scaled(f, N + 10)
        head = np.sum(np.abs(c[:N]) ** 2)
        tail = np.sum(np.abs(c[N:]) ** 2)
        if tail <= tol**2 * head or head == 0:
            return N
        N += 10
    raise ValueError(f"coefficient tail did not decay below tol={tol} by N={cap}")


def fock_norm(f: ExpPoly, tol: float = 1e-12) -> float:
    """F_2 norm, from the basis coefficients."""
    if f.alpha == 0:
        return math.hypot(*(abs(q) * math.exp(0.5 * gammaln(k + 1)) for k, q in enumerate(f.coeffs)))
    return float(np.linalg.norm(expoly_coeffs(f, None, tol)))

"""Truncated matrix of W on F_2 and the small dense kernels used on it.

The matrix is the compression of W to polynomials of degree < N, in the
orthonormal basis e_m(z) = z^m / sqrt(m!):

    T[n, m] = <W e_m, e_n>
            = u0 * sum_j sqrt(n!) sqrt(m!) a^j b^(m-j) c^(n-j) / (j! (m-j)! (n-j)!)

Each term is formed in the log domain with its phase carried separately.
"""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import blas, lapack
from scipy.special import gammaln

from .symbolcore import OperatorParams, bound_constant

__all__ = [
    "MatrixRep",
    "ConvergenceError",
    "SpectrumHitError",
    "build_matrix",
    "op_norm",
    "resolvent_norm",
    "mat_power",
    "mat_power_diff",
    "matrix_to_csv",
    "format_complex",
]

#: terms more than this many e-folds below the largest term of an entry are dropped
LOG_DROP = 60.0


class ConvergenceError(RuntimeError):
    """Power iteration hit its iteration cap.

    ``vector`` holds the last iterate, ``estimate`` and ``residual`` the last values.
    """

    def __init__(self, msg, vector, estimate, residual):
        super().__init__(msg)
        self.vector = vector
        self.estimate = estimate
        self.residual = residual


class SpectrumHitError(ArithmeticError):
    """lambda I - M is numerically singular."""


@dataclass(frozen=True)
class MatrixRep:
    n_dim: int
    entries: np.ndarray
    params: OperatorParams
    bounded: bool = True

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def _log_phase(x):
    x = complex(x)
    if x == 0:
        return -np.inf, 1.0 + 0j
    return np.log(abs(x)), x / abs(x)


def _entries_direct(P, N):
    """The j-sum itself, term by term in the log domain (no cancellation control)."""
    la, pa = _log_phase(P.a)
    lb, pb = _log_phase(P.b)
    lc, pc = _log_phase(P.c)
    idx = np.arange(N)
    hlf = 0.5 * gammaln(idx + 1)
    lf = gammaln(idx + 1)
    n = idx[:, None]
    m = idx[None, :]

    def term(j):
        nn, mm = n[j:], m[:, j:]
        with np.errstate(invalid="ignore"):
            # 0 * log(0) stands for 0^0 = 1
            ea = j * la if j else 0.0
            eb = np.where(mm - j > 0, (mm - j) * lb, 0.0)
            ec = np.where(nn - j > 0, (nn - j) * lc, 0.0)
        logt = hlf[nn] + hlf[mm] + ea + eb + ec - lf[j] - lf[mm - j] - lf[nn - j]
        phase = pa**j * pb ** (mm - j) * pc ** (nn - j)
        return logt, phase

    peak = np.full((N, N), -np.inf)
    for j in range(N):
        logt, _ = term(j)
        np.maximum(peak[j:, j:], logt, out=peak[j:, j:])

    acc = np.zeros((N, N), dtype=complex)
    for j in range(N):
        logt, phase = term(j)
        ref = peak[j:, j:]
        keep = np.isfinite(logt) & (logt >= ref - LOG_DROP)
        with np.errstate(invalid="ignore", over="ignore"):
            acc[j:, j:] += np.where(keep, np.exp(np.where(keep, logt - ref, 0.0)) * phase, 0)
    with np.errstate(over="ignore", invalid="ignore"):
        scale = np.where(np.isfinite(peak), np.exp(np.where(np.isfinite(peak), peak, 0.0)), 0.0)
        return P.u0 * acc * scale


def _laguerre_table(N, y):
    """L_k^(alpha)(y) for k + alpha < N as (values, log_scales), L = values * exp(log_scales).

    Forward three-term recurrence in k, all alpha at once, renormalized each step.
    """
    alpha = np.arange(N, dtype=float)
    vals = np.zeros((N, N), dtype=complex)
    logs = np.zeros((N, N))
    prev = np.zeros(N, dtype=complex)
    cur = np.ones(N, dtype=complex)
    acc = np.zeros(N)
    vals[0] = 1
    for k in range(N - 1):
        nxt = ((2 * k + 1 + alpha - y) * cur - (k + alpha) * prev) / (k + 1)
        size = np.maximum(np.abs(nxt), 1e-300)
        prev, cur = cur / size, nxt / size
        acc = acc + np.log(size)
        vals[k + 1] = cur
        logs[k + 1] = acc
    return vals, logs


def _entries_laguerre(P, N):
    """Closed form of the j-sum, valid when a, b, c are all nonzero:

        T[n, m] = u0 sqrt(n!/m!) a^n b^(m-n) L_n^(m-n)(-bc/a)    (n <= m)
        T[n, m] = u0 sqrt(m!/n!) a^m c^(n-m) L_m^(n-m)(-bc/a)    (n > m)
    """
    vals, logs = _laguerre_table(N, -P.b * P.c / P.a)
    la, pa = _log_phase(P.a)
    lb, pb = _log_phase(P.b)
    lc, pc = _log_phase(P.c)
    lf = gammaln(np.arange(N) + 1)
    n = np.arange(N)[:, None]
    m = np.arange(N)[None, :]
    k = np.minimum(n, m)
    gap = np.abs(m - n)
    upper = n <= m
    logp = 0.5 * (lf[k] - lf[np.maximum(n, m)]) + k * la + gap * np.where(upper, lb, lc)
    phase = pa**k * np.where(upper, pb, pc) ** gap
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        return P.u0 * np.exp(logp + logs[k, gap]) * phase * vals[k, gap]


def build_matrix(P: OperatorParams, N: int, method: str = "auto") -> MatrixRep:
    """Truncated matrix T[n, m] = <W e_m, e_n>, n, m < N.

    ``method="auto"`` evaluates the j-sum through its Laguerre closed form when
    a, b, c are all nonzero (the plain sum cancels catastrophically there, e.g.
    for translations with |b| >= 1) and as a single log-domain term otherwise.
    ``method="direct"`` always sums the terms.
    """
    if N < 1:
        raise ValueError("truncation dimension N must be >= 1")
    if P.p != 2:
        raise ValueError("matrix representations exist only for p = 2")
    bounded = np.isfinite(bound_constant(P))
    if not bounded:
        warnings.warn(f"{P} does not induce a bounded operator; truncations will not converge", stacklevel=2)
    if method == "direct" or (method == "auto" and 0 in (P.a, P.b, P.c)):
        entries = _entries_direct(P, N)
    elif method in ("auto", "laguerre"):
        entries = _entries_laguerre(P, N)
    else:
        raise ValueError(f"unknown method {method!r}")
    entries.setflags(write=False)
    return MatrixRep(N, entries, P, bounded=bool(bounded))


def _as_array(M):
    A = np.asarray(M.entries if isinstance(M, MatrixRep) else M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    return A


def _tridiag_top(diag, off, vector=False):
    """Top eigenpair of a real symmetric tridiagonal matrix."""
    if len(diag) == 1:
        return (diag[0], np.ones(1)) if vector else (diag[0], None)
    if not vector:
        k = len(diag)
        # bisection for the k-th (largest) eigenvalue only
        return lapack.dstebz(diag, off, 3, 0.0, 0.0, k, k, 0.0, "E")[1][0], None
    out = lapack.dstev(diag, off, compute_v=1)
    return out[0][-1], out[1][:, -1]


_TINY = np.finfo(float).tiny
#: steps between Ritz-value convergence checks
CHECK_EVERY = 4


def _power_psd(apply_gram, n, tol, maxiter, start):
    """Largest eigenvalue of a Hermitian PSD operator, Krylov-accelerated power iteration.

    Lanczos with full reorthogonalization from ``start``; the Krylov space holds
    every power iterate, so the top Ritz value is never worse than the plain
    power estimate after the same number of products. The Ritz value is
    checked every CHECK_EVERY steps; iteration stops when it moves less than
    tol (relative) across 3 consecutive checks. Returns (estimate, vector,
    residual, exhausted), where ``exhausted`` flags an invariant subspace
    found before dimension n.
    """
    steps = min(n, maxiter)
    Q = np.zeros((steps + 1, n), dtype=complex)
    Qc = np.zeros((steps + 1, n), dtype=complex)
    Q[0] = start / np.linalg.norm(start)
    Qc[0] = Q[0].conj()
    alphas = np.zeros(steps)
    betas = np.zeros(steps)
    theta_old = -np.inf
    quiet = 0
    exhausted = False
    beta = 0.0
    k = 0
    for k in range(steps):
        w = apply_gram(Q[k])
        alphas[k] = (Qc[k] @ w).real
        w = w - (Qc[: k + 1] @ w) @ Q[: k + 1]
        w = w - (Qc[: k + 1] @ w) @ Q[: k + 1]
        beta = float(np.sqrt((w.real @ w.real) + (w.imag @ w.imag)))
        last = k + 1 == steps
        if beta <= 1e-14 * max(abs(alphas[: k + 1]).max(), _TINY):
            exhausted = k + 1 < n
            break
        if k % CHECK_EVERY == 0 or last:
            theta = _tridiag_top(alphas[: k + 1], betas[:k])[0]
            quiet = quiet + 1 if theta - theta_old <= tol * max(abs(theta), _TINY) else 0
            if quiet >= 3:
                break
            theta_old = theta
        betas[k] = beta
        Q[k + 1] = w / beta
        Qc[k + 1] = Q[k + 1].conj()
    else:
        if steps < n:
            theta, s = _tridiag_top(alphas, betas[: steps - 1], vector=True)
            raise ConvergenceError(
                f"power iteration did not converge in {maxiter} steps",
                s @ Q[:steps], theta, beta * abs(s[-1]),
            )
    theta, s = _tridiag_top(alphas[: k + 1], betas[:k], vector=True)
    return theta, s @ Q[: k + 1], beta * abs(s[-1]), exhausted


def _starts(n):
    ones = np.ones(n, dtype=complex)
    alt = np.where(np.arange(n) % 2 == 0, 1.0, -1.0).astype(complex)
    return ones, alt


def _largest_sv(apply_gram, n, tol, maxiter):
    """Top eigenvalue of a Gram operator; a second fixed start vector is tried
    when the first spans only an invariant subspace."""
    ones, alt = _starts(n)
    mu, x, res, exhausted = _power_psd(apply_gram, n, tol, maxiter, ones)
    if exhausted:
        mu2, x2, res2, _ = _power_psd(apply_gram, n, tol, maxiter, alt)
        if mu2 > mu:
            mu, x, res = mu2, x2, res2
    return mu, x, res


def op_norm(M, tol=1e-9, maxiter=10000) -> float:
    """Largest singular value by power iteration on the Gram matrix A^H A."""
    A = _as_array(M)
    if not np.any(A):
        return 0.0
    G = A.conj().T @ A
    mu, _, _ = _largest_sv(lambda v: G @ v, A.shape[0], tol, maxiter)
    return float(np.sqrt(max(mu, 0.0)))


def _is_upper_triangular(A):
    return not np.any(np.tril(A, -1))


def resolvent_norm(M, lam, tol=1e-9, maxiter=10000) -> float:
    """||(lam I - M)^{-1}|| = 1 / sigma_min(lam I - M), by inverse iteration.

    An upper-triangular M (e.g. a Schur factor) is its own LU factor and skips
    the factorization.
    """
    A = _as_array(M)
    n = A.shape[0]
    B = lam * np.eye(n) - A
    scale = np.max(np.abs(B))
    threshold = n * np.finfo(float).eps * max(scale, 1.0)
    if _is_upper_triangular(A):
        if np.abs(np.diag(B)).min() <= threshold:
            raise SpectrumHitError(f"lambda={lam} in spectrum of truncation")
        Bf = np.asfortranarray(B)

        def apply_inv_gram(v):
            return blas.ztrsv(Bf, blas.ztrsv(Bf, v, trans=2))
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(B, check_finite=False)
        if np.abs(np.diag(lu)).min() <= threshold:
            raise SpectrumHitError(f"lambda={lam} in spectrum of truncation")

        def apply_inv_gram(v):
            y = lapack.zgetrs(lu, piv, v, trans=2)[0]
            return lapack.zgetrs(lu, piv, y)[0]

    mu, _, _ = _largest_sv(apply_inv_gram, n, tol, maxiter)
    return float(np.sqrt(mu))


def mat_power(M, n: int) -> np.ndarray:
    """M^n by repeated squaring."""
    A = _as_array(M)
    if n < 0:
        raise ValueError("n must be >= 0")
    result = np.eye(A.shape[0], dtype=complex)
    base = A.copy()
    while n:
        if n & 1:
            result = result @ base
        n >>= 1
        if n:
            base = base @ base
    return result


def mat_power_diff(M, n: int, tol=1e-9):
    """(||M^n||, ||M^(n+1) - M^n||)."""
    A = _as_array(M)
    Mn = mat_power(A, n)
    return op_norm(Mn, tol), op_norm(Mn @ A - Mn, tol)


def format_complex(z) -> str:
    z = complex(z)
    re, im = z.real + 0.0, z.imag + 0.0
    return f"{re:.17g}{im:+.17g}j"


def matrix_to_csv(M) -> str:
    A = _as_array(M)
    buf = io.StringIO()
    for row in A:
        buf.write(",".join(format_complex(x) for x in row))
        buf.write("\n")
    return buf.getvalue()

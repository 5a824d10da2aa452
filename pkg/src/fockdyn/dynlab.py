"""Numerical experiments that cross-check the closed-form verdicts.

Resolvent scans work on the complex Schur form of the truncation, which is
unitarily similar to it, so every lambda costs triangular solves only.
"""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from . import classify as cl
from .linalg import SpectrumHitError, build_matrix, op_norm, resolvent_norm
from .rng import SplitMix64
from .symbolcore import (
    ExpPoly,
    OperatorParams,
    apply,
    expoly_coeffs_scaled,
    fixed_point,
    is_close,
    truncation_for,
    weight_at_fixed_point,
)

__all__ = [
    "ScanGrid",
    "ScanResult",
    "ProbeResult",
    "NZPoint",
    "UncondEstimate",
    "InequalityReport",
    "default_ritt_grid",
    "default_kreiss_grid",
    "ritt_functional_scan",
    "kreiss_functional_scan",
    "power_norms",
    "nagy_zemanek_sequence",
    "unconditional_ritt_profile",
    "unconditional_ritt_estimate",
    "projective_distance",
    "random_expoly",
    "supercyclic_probe",
    "isometry_check",
    "inequality_suite",
    "in_stolz_domain",
    "scan_to_csv",
    "probe_to_csv",
]

#: relative change in the grid supremum between N/2 and N still called stable
STABILITY_TOL = 0.10
#: supremum growth factor, when the approach distance is halved, called divergent
APPROACH_GROWTH = 1.5
APPROACH_RHO = 1e-4
MIN_MODULUS = 1 + 1e-9


def _threads():
    try:
        return max(0, int(os.environ.get("FOCKDYN_THREADS", "0")))
    except ValueError:
        return 0


def _map(fn, items):
    """Order-preserving map; concurrent when FOCKDYN_THREADS > 0."""
    k = _threads()
    if k == 0 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ScanGrid:
    """rho offsets and angles; Ritt scans use lambda = 1 + rho e^{i theta},
    Kreiss scans lambda = (1 + rho) e^{i theta}. Only |lambda| > 1 + 1e-9 is kept."""

    rho_values: tuple
    theta_values: tuple

    def __post_init__(self):
        object.__setattr__(self, "rho_values", tuple(float(r) for r in self.rho_values))
        object.__setattr__(self, "theta_values", tuple(float(t) for t in self.theta_values))
        if not self.rho_values or not self.theta_values:
            raise ValueError("rho and theta values must be nonempty")
        if any(not r > 0 for r in self.rho_values):
            raise ValueError("rho values must be positive")
        if any(not -math.pi < t <= math.pi for t in self.theta_values):
            raise ValueError("angles must lie in (-pi, pi]")

    def lambdas(self, kind="ritt"):
        if kind == "ritt":
            pts = [1 + r * complex(math.cos(t), math.sin(t)) for r in self.rho_values for t in self.theta_values]
        elif kind == "kreiss":
            pts = [(1 + r) * complex(math.cos(t), math.sin(t)) for r in self.rho_values for t in self.theta_values]
        else:
            raise ValueError(f"unknown scan kind {kind!r}")
        pts = [z for z in pts if abs(z) > MIN_MODULUS]
        if not pts:
            raise ValueError("scan grid is empty after removing points with |lambda| <= 1")
        return pts


def _theta_grid(k=64):
    return tuple(-math.pi + 2 * math.pi * (j + 1) / k for j in range(k))


def default_ritt_grid():
    return ScanGrid(tuple(np.logspace(-4, math.log10(2), 25)), _theta_grid())


def default_kreiss_grid():
    return default_ritt_grid()


@dataclass
class ScanResult:
    kind: str
    points: list
    supremum: float
    argmax: complex
    n_dim: int
    points_half: list = field(default_factory=list)
    supremum_half: float = math.nan
    skipped: list = field(default_factory=list)
    stable: bool = True
    approach: dict | None = None
    verdict_hint: str = "Bounded"

    def to_dict(self):
        d = {
            "kind": self.kind,
            "n_dim": self.n_dim,
            "supremum": self.supremum,
            "argmax": [self.argmax.real, self.argmax.imag],
            "supremum_half": self.supremum_half,
            "relative_change": _rel_change(self.supremum, self.supremum_half),
            "stable": self.stable,
            "n_points": len(self.points),
            "skipped": [[z.real, z.imag] for z in self.skipped],
            "verdict_hint": self.verdict_hint,
        }
        if self.approach is not None:
            d["approach"] = self.approach
        return d


def _rel_change(new, old):
    if not (math.isfinite(new) and math.isfinite(old)) or new == 0:
        return math.inf if new != old else 0.0
    return abs(new - old) / abs(new)


class _Resolvent:
    """||R(lambda, T)|| through the complex Schur factor of T."""

    def __init__(self, T):
        self.S = scipy.linalg.schur(np.asarray(T, dtype=complex), output="complex")[0]

    @property
    def eigenvalues(self):
        return np.diag(self.S)

    def __call__(self, lam):
        return resolvent_norm(self.S, lam)


def _functional(kind, lam, rnorm):
    return (abs(lam - 1) if kind == "ritt" else abs(lam) - 1) * rnorm


def _evaluate(res, lams, kind):
    def one(lam):
        try:
            return lam, _functional(kind, lam, res(lam))
        except SpectrumHitError:
            return lam, None

    out = _map(one, list(lams))
    pts = [(lam, v) for lam, v in out if v is not None]
    skipped = [lam for lam, v in out if v is None]
    return pts, skipped


def _sup(pts):
    if not pts:
        return math.nan, complex("nan")
    lam, v = max(pts, key=lambda t: t[1])
    return v, lam


def _approach_points(P, res, rho):
    """Points at distance ~rho outside the unit circle (or outside spectrum points
    beyond it), aimed at every grid angle and at every spectrum point of W or of
    its truncation with modulus >= 1 other than 1."""
    targets = [complex(math.cos(t), math.sin(t)) for t in _theta_grid()]
    try:
        targets += cl.spectrum_closed_form(P).peripheral_points()
    except cl.UnboundedOperatorError:
        pass
    targets += [mu for mu in res.eigenvalues if abs(mu) >= 1 - 1e-9 and abs(mu - 1) > 1e-9]
    pts = []
    for mu in targets:
        r = max(abs(mu), 1.0)
        pts.append(mu / abs(mu) * r * (1 + rho))
    return pts


def _scan(P, N, grid, kind, with_half=True, approach=False):
    grid = grid or (default_ritt_grid() if kind == "ritt" else default_kreiss_grid())
    lams = grid.lambdas(kind)
    res = _Resolvent(build_matrix(P, N).entries)
    pts, skipped = _evaluate(res, lams, kind)
    sup, arg = _sup(pts)
    result = ScanResult(kind, pts, sup, arg, N, skipped=skipped)
    if with_half and N >= 2:
        half = _Resolvent(build_matrix(P, N // 2).entries)
        pts_h, skipped_h = _evaluate(half, lams, kind)
        result.points_half = pts_h
        result.supremum_half = _sup(pts_h)[0]
        result.skipped += skipped_h
        result.stable = _rel_change(sup, result.supremum_half) < STABILITY_TOL
    growth = 1.0
    if approach:
        near, _ = _evaluate(res, _approach_points(P, res, APPROACH_RHO), kind)
        nearer, _ = _evaluate(res, _approach_points(P, res, APPROACH_RHO / 2), kind)
        s1, s2 = _sup(near)[0], _sup(nearer)[0]
        growth = s2 / s1 if s1 > 0 else 1.0
        result.approach = {"rho": APPROACH_RHO, "supremum": s1, "supremum_half_rho": s2, "growth": growth}
    diverging = not result.stable or growth >= APPROACH_GROWTH
    result.verdict_hint = "Diverging" if diverging else "Bounded"
    return result


def ritt_functional_scan(P: OperatorParams, N: int, grid: ScanGrid | None = None, approach=True) -> ScanResult:
    """sup |lambda - 1| ||R(lambda, T_N)|| over the grid, at N and N/2.

    With ``approach`` the functional is also evaluated at distance 1e-4 and
    5e-5 outside the unit circle (and outside spectrum points beyond it); a
    growth factor >= 1.5 or an N/2-to-N change >= 10% reads as Diverging.
    """
    return _scan(P, N, grid, "ritt", approach=approach)


def kreiss_functional_scan(P: OperatorParams, N: int, grid: ScanGrid | None = None) -> ScanResult:
    """sup (|lambda| - 1) ||R(lambda, T_N)|| over the grid, at N and N/2."""
    return _scan(P, N, grid, "kreiss")


def power_norms(T, n_max: int):
    """[||T^n|| for n = 0..n_max]."""
    T = np.asarray(T, dtype=complex)
    out = [1.0]
    Tn = np.eye(T.shape[0], dtype=complex)
    for _ in range(n_max):
        Tn = Tn @ T
        out.append(op_norm(Tn))
    return out


@dataclass(frozen=True)
class NZPoint:
    n: int
    value: float
    lower_bound: float | None


def nagy_zemanek_sequence(P: OperatorParams, N: int, n_max: int):
    """[(n, n ||T^(n+1) - T^n||, closed-form lower bound n |u(z0)|^n |u(z0) - 1|)] for n = 1..n_max.

    The lower bound is None when a = 1.
    """
    T = build_matrix(P, N).entries
    uz0 = None if P.a_is_one else weight_at_fixed_point(P)
    out = []
    Tn = T.copy()
    for n in range(1, n_max + 1):
        nxt = Tn @ T
        value = n * op_norm(nxt - Tn)
        lb = None if uz0 is None else n * abs(uz0) ** n * abs(uz0 - 1)
        out.append(NZPoint(n, value, lb))
        Tn = nxt
    return out


@dataclass(frozen=True)
class UncondEstimate:
    estimate: float
    diff_norm_sum: float
    prefix_max: tuple
    trials: int


def unconditional_ritt_profile(P: OperatorParams, N: int, n_terms: int, trials: int, seed: int) -> UncondEstimate:
    """Lower estimate of the unconditional Ritt constant.

    Trial 0 picks each sign greedily to maximize ||sum_n a_n (T^n - T^(n-1))||;
    the other trials use random signs from SplitMix64 streams that depend on
    (seed, trial) only. Every prefix of every trial counts as a test sequence,
    so the estimate is nondecreasing in n_terms.
    """
    T = build_matrix(P, N).entries
    diffs = []
    prev = np.eye(N, dtype=complex)
    for _ in range(n_terms):
        cur = prev @ T
        diffs.append(cur - prev)
        prev = cur
    diff_sum = sum(op_norm(D) for D in diffs)

    root = SplitMix64(seed)
    best = np.zeros(n_terms)
    for t in range(max(trials, 1)):
        S = np.zeros((N, N), dtype=complex)
        stream = root.spawn(t)
        for k, D in enumerate(diffs):
            if t == 0:
                plus, minus = S + D, S - D
                np_, nm = op_norm(plus), op_norm(minus)
                S, val = (plus, np_) if np_ >= nm else (minus, nm)
            else:
                S = S + stream.sign() * D
                val = op_norm(S)
            best[k] = max(best[k], val)
    prefix = tuple(np.maximum.accumulate(best)) if n_terms else ()
    return UncondEstimate(prefix[-1] if prefix else 0.0, diff_sum, prefix, max(trials, 1))


def unconditional_ritt_estimate(P: OperatorParams, N: int, n_terms: int, trials: int, seed: int) -> float:
    return unconditional_ritt_profile(P, N, n_terms, trials, seed).estimate


def projective_distance(x, y):
    """Sine of the angle between span(x) and span(y)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("projective distance needs nonzero vectors")
    xh, yh = x / nx, y / ny
    # |x - <x, y> y| for unit x, y: equals sqrt(1 - |<x, y>|^2) without the cancellation
    return min(1.0, float(np.linalg.norm(xh - np.vdot(yh, xh) * yh)))


def random_expoly(rng: SplitMix64, max_degree=3, alpha_radius=1.0, zero_free=False):
    """Random e^{alpha z} * polynomial with complex Gaussian coefficients."""
    alpha = rng.in_disc(alpha_radius)
    if zero_free:
        return ExpPoly(alpha, (rng.complex_normal(),))
    deg = rng.integer(0, max_degree)
    return ExpPoly(alpha, tuple(rng.complex_normal() for _ in range(deg + 1)))


@dataclass
class ProbeResult:
    min_projective_distance: float
    ratio_max: float | None
    ratio_bound_C: float | None
    n_max: int
    targets_tested: int
    per_target: list = field(default_factory=list)
    ratio_skipped: str | None = None
    n_dim_used: int = 0

    @property
    def violations(self):
        v = []
        if self.min_projective_distance < 0.01:
            v.append(f"min projective distance {self.min_projective_distance:.3g} < 0.01")
        if self.ratio_max is not None and self.ratio_max > self.ratio_bound_C * (1 + 1e-9):
            v.append(f"ratio {self.ratio_max:.6g} exceeds bound C = {self.ratio_bound_C:.6g}")
        return v

    def to_dict(self):
        return {
            "min_projective_distance": self.min_projective_distance,
            "ratio_max": self.ratio_max,
            "ratio_bound_C": self.ratio_bound_C,
            "n_max": self.n_max,
            "targets_tested": self.targets_tested,
            "per_target": self.per_target,
            "ratio_skipped": self.ratio_skipped,
            "n_dim_used": self.n_dim_used,
            "violations": self.violations,
            "note": "evidence only: a finite orbit segment cannot prove non-supercyclicity",
        }


def _renormalized(f: ExpPoly):
    peak = max(abs(q) for q in f.coeffs)
    return f.scale(1 / peak) if peak > 0 else f


def supercyclic_probe(P: OperatorParams, f: ExpPoly, targets, n_max: int, N: int) -> ProbeResult:
    """Distance from the projective orbit {t W^n f} to each target, plus the
    ratio u(z) f(psi^n z) / (u(psi^n z) f(psi^(n+1) z)) against its bound C on
    the disc of radius 1 about the fixed point.

    The orbit is exact (ExpPoly); inner products use basis coefficients at
    truncation max(N, tail-bound truncation of each orbit element).
    """
    orbit = [_renormalized(f)]
    for _ in range(n_max):
        orbit.append(_renormalized(apply(P, orbit[-1])))
    n_use = max([N] + [truncation_for(g) for g in orbit] + [truncation_for(g) for g in targets])
    orbit_vecs = [expoly_coeffs_scaled(g, n_use)[0] for g in orbit]
    per_target = []
    overall = 1.0
    for i, g in enumerate(targets):
        gv = expoly_coeffs_scaled(g, n_use)[0]
        dists = [projective_distance(v, gv) for v in orbit_vecs]
        k = int(np.argmin(dists))
        per_target.append({"target": i, "min_distance": dists[k], "at_n": k})
        overall = min(overall, dists[k])

    ratio_max = bound = None
    skipped = None
    if P.a_is_one:
        skipped = "a = 1: psi has no finite fixed point; ratio part not applicable"
    elif not f.zero_free:
        skipped = "f has zeros; ratio part needs a zero-free f"
    else:
        z0 = fixed_point(P)
        ring = z0 + np.exp(2j * np.pi * np.arange(4096) / 4096)
        au, af = np.abs(P.u(ring)), np.abs(f(ring))
        bound = float(au.max() * af.max() / (au.min() * af.min()))
        z = z0 + 1  # ring sample 0
        zn = z
        ratio_max = 0.0
        for _ in range(1, n_max + 1):
            zn = P.psi(zn)
            r = P.u(z) * f(zn) / (P.u(zn) * f(P.psi(zn)))
            ratio_max = max(ratio_max, float(abs(r)))
    return ProbeResult(overall, ratio_max, bound, n_max, len(targets), per_target, skipped, n_use)


def isometry_check(P: OperatorParams, N: int, K: int) -> float:
    """||(T_N^* T_N - I) restricted to the leading K x K block|| for W(k_{-b}, z + b)."""
    expected_c = -P.b.conjugate()
    if not (P.a_is_one and is_close(P.c, expected_c) and is_close(P.u0, math.exp(-abs(P.b) ** 2 / 2))):
        raise ValueError("not the normalized-translation family: need a = 1, c = -conj(b), u0 = exp(-|b|^2/2)")
    if not 0 < K < N:
        raise ValueError("need 0 < K < N")
    cols = build_matrix(P, N).entries[:, :K]
    block = cols.conj().T @ cols - np.eye(K)
    return op_norm(block)


def in_stolz_domain(x, radius, tol=1e-9):
    """Is x in the convex hull of {1} and the closed disc |z| <= radius (< 1)?"""
    x = complex(x)
    if abs(x) <= radius + tol or abs(x - 1) <= tol:
        return True
    # x = t + (1 - t) y with |y| <= radius  <=>  |x - t| <= radius (1 - t); convex in t
    g = lambda t: abs(x - t) - radius * (1 - t)
    best = minimize_scalar(g, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    return min(best.fun, g(0.0), g(1.0)) <= tol


@dataclass
class InequalityReport:
    samples: int
    point_violations: list
    derivative_violations: list
    stolz: dict | None = None

    @property
    def passed(self):
        return not self.point_violations and not self.derivative_violations

    def to_dict(self):
        return {
            "samples": self.samples,
            "point_estimate_violations": self.point_violations,
            "derivative_bound_violations": self.derivative_violations,
            "stolz": self.stolz,
            "passed": self.passed,
        }


def _poly_norm(coeffs):
    # hypot rescales, so tiny coefficients do not underflow when squared
    return math.hypot(*(abs(q) * math.sqrt(math.factorial(k)) for k, q in enumerate(coeffs)))


DERIVATIVE_CONST = math.sqrt(2 * math.pi) + 1


def inequality_suite(P: OperatorParams, sample_count: int, seed: int, ritt_supremum: float | None = None) -> InequalityReport:
    """Seeded checks of |f(z)| <= e^{|z|^2/2} ||f|| and
    |f'(w)| <= (sqrt(2 pi) + 1)(1 + |w|) e^{|w|^2/2} ||f|| on random polynomials
    of degree <= 8 with |z|, |w| <= 3; and, when the Ritt verdict is Yes and a
    scan supremum M is given, Stolz-domain containment of the spectrum with
    radius sin(arccos(1/M)). M is a grid lower bound, so that last test is
    conservative and only reported.
    """
    rng = SplitMix64(seed)
    pv, dv = [], []
    for i in range(sample_count):
        deg = rng.integer(0, 8)
        coeffs = np.array([rng.complex_normal() for _ in range(deg + 1)])
        z, w = rng.in_disc(3.0), rng.in_disc(3.0)
        norm = _poly_norm(coeffs)
        poly = np.polynomial.polynomial.Polynomial(coeffs)
        fz = abs(poly(z))
        bound_z = math.exp(abs(z) ** 2 / 2) * norm
        if fz > bound_z * (1 + 1e-12):
            pv.append({"sample": i, "z": [z.real, z.imag], "value": fz, "bound": bound_z})
        dfw = abs(poly.deriv()(w)) if deg > 0 else 0.0
        bound_w = DERIVATIVE_CONST * (1 + abs(w)) * math.exp(abs(w) ** 2 / 2) * norm
        if dfw > bound_w * (1 + 1e-12):
            dv.append({"sample": i, "w": [w.real, w.imag], "value": dfw, "bound": bound_w})

    stolz = None
    try:
        ritt = cl.ritt_verdict(P)
    except cl.UnboundedOperatorError:
        ritt = None
    if ritt is not None and ritt.value == cl.YES and ritt_supremum is not None:
        m_hat = max(ritt_supremum, 1.0)
        radius = math.sqrt(max(0.0, 1 - 1 / m_hat**2))
        pts = cl.spectrum_closed_form(P).sample(64)
        outside = [[z.real, z.imag] for z in pts if not in_stolz_domain(z, radius)]
        stolz = {"m_hat": m_hat, "radius": radius, "points_checked": len(pts), "outside": outside, "conservative": True}
    return InequalityReport(sample_count, pv, dv, stolz)


def scan_to_csv(result: ScanResult) -> str:
    buf = io.StringIO()
    buf.write("lambda_re,lambda_im,functional,n_dim\n")
    half = result.n_dim // 2
    for pts, n in ((result.points, result.n_dim), (result.points_half, half)):
        for lam, v in pts:
            buf.write(f"{lam.real + 0.0:.17g},{lam.imag + 0.0:.17g},{v:.17g},{n}\n")
    return buf.getvalue()


def probe_to_csv(result: ProbeResult) -> str:
    def fmt(x):
        return "" if x is None else f"{x:.17g}"

    buf = io.StringIO()
    buf.write("min_projective_distance,ratio_max,ratio_bound_C,n_max,targets_tested\n")
    buf.write(
        f"{fmt(result.min_projective_distance)},{fmt(result.ratio_max)},{fmt(result.ratio_bound_C)},"
        f"{result.n_max},{result.targets_tested}\n"
    )
    return buf.getvalue()

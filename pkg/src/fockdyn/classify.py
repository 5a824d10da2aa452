"""Closed-form classification of W(u, psi): boundedness, compactness, power
boundedness, supercyclicity, Ritt and unconditional Ritt conditions, spectrum.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import count, islice

from .symbolcore import ATOL, OperatorParams, bound_constant, is_close, weight_at_fixed_point

__all__ = [
    "YES",
    "NO",
    "OPEN",
    "Verdict",
    "SpectrumDescriptor",
    "ClassificationReport",
    "UnboundedOperatorError",
    "classify",
    "spectrum_closed_form",
    "ritt_verdict",
    "unconditional_ritt_verdict",
    "root_of_unity_order",
    "spectral_modulus",
]

YES, NO, OPEN = "Yes", "No", "OpenConjecture"

#: largest root-of-unity order searched for |a| = 1
MAX_ROOT_ORDER = 1024


class UnboundedOperatorError(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    value: str
    reason: str
    margin: float | None = None

    def to_dict(self):
        return {"value": self.value, "reason": self.reason, "margin": self.margin}


@dataclass(frozen=True)
class SpectrumDescriptor:
    """Closed-form spectrum.

    kind is one of GeometricWithZero ({0} and base * ratio**m, m >= 0),
    FinitePoints, FullCircle (|z| = radius) or Singleton (base).
    """

    kind: str
    base: complex = 0j
    ratio: complex = 0j
    radius: float = 0.0
    points: tuple = field(default=())

    def iter_points(self):
        """Enumerate the spectrum (lazily for GeometricWithZero). FullCircle has no point list."""
        if self.kind == "GeometricWithZero":
            yield 0j
            for m in count():
                yield self.base * self.ratio**m
        elif self.kind == "FinitePoints":
            yield from self.points
        elif self.kind == "Singleton":
            yield self.base
        else:
            raise ValueError("a FullCircle spectrum is not enumerable")

    def sample(self, k=64):
        """Finitely many spectrum points: the first k (or k evenly spaced on a circle)."""
        if self.kind == "FullCircle":
            return [self.radius * cmath.exp(2j * math.pi * t / k) for t in range(k)]
        return list(islice(self.iter_points(), k))

    @property
    def max_modulus(self):
        if self.kind == "GeometricWithZero":
            return max(abs(self.base), 0.0) if abs(self.ratio) <= 1 else math.inf
        if self.kind == "FullCircle":
            return self.radius
        if self.kind == "Singleton":
            return abs(self.base)
        return max(abs(z) for z in self.points)

    def peripheral_points(self, tol=ATOL):
        """Spectrum points with |z| >= 1 - tol, other than 1 itself (FullCircle: sampled)."""
        pts = self.sample(64)
        if self.kind == "GeometricWithZero":
            # |ratio| < 1: only the first few terms can reach the unit circle
            pts = [z for z in pts if abs(z) >= 1 - tol]
        return [z for z in pts if abs(z) >= 1 - tol and not is_close(z, 1, tol)]

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("GeometricWithZero", "Singleton"):
            d["base"] = [self.base.real, self.base.imag]
        if self.kind == "GeometricWithZero":
            d["ratio"] = [self.ratio.real, self.ratio.imag]
        if self.kind == "FullCircle":
            d["radius"] = self.radius
        if self.kind == "FinitePoints":
            d["points"] = [[z.real, z.imag] for z in self.points]
        return d


@dataclass(frozen=True)
class ClassificationReport:
    params: OperatorParams
    bounded: bool
    compact: bool
    power_bounded: bool
    supercyclic: bool
    ritt: Verdict
    unconditional_ritt: Verdict
    spectrum: SpectrumDescriptor | None
    m_constant: float
    norm_upper: float
    bounded_reason: str = ""
    spectral_modulus: float | None = None

    def to_dict(self):
        return {
            "bounded": self.bounded,
            "bounded_reason": self.bounded_reason,
            "compact": self.compact,
            "power_bounded": self.power_bounded,
            "supercyclic": self.supercyclic,
            "ritt": self.ritt.to_dict(),
            "unconditional_ritt": self.unconditional_ritt.to_dict(),
            "spectrum": self.spectrum.to_dict() if self.spectrum else "undefined (unbounded)",
            "m_constant": _finite_or_str(self.m_constant),
            "norm_upper": _finite_or_str(self.norm_upper),
            "spectral_modulus": _finite_or_str(self.spectral_modulus),
        }


def _finite_or_str(x):
    if x is None:
        return None
    return x if math.isfinite(x) else "inf"


def _bounded(P):
    abs_a = abs(P.a)
    if abs_a > 1 + ATOL:
        return False, f"|a| = {abs_a:.17g} > 1: psi does not induce a bounded operator"
    if abs_a < 1 - ATOL:
        return True, "|a| < 1 and u in F_2: M(u, psi) < infinity"
    if is_close(P.c, -P.a * P.b.conjugate()):
        return True, "|a| = 1 and u = u(0) K_{-conj(a) b}, the only weight allowed by M(u, psi) < infinity"
    return False, "|a| = 1 forces u(z) = u(0) exp(-a conj(b) z); here c != -a conj(b), so M(u, psi) = infinity"


def _require_bounded(P):
    ok, why = _bounded(P)
    if not ok:
        raise UnboundedOperatorError(f"spectrum undefined: {why}")


def _unimodular(P):
    return abs(abs(P.a) - 1) <= ATOL


def spectral_modulus(P: OperatorParams) -> float:
    """Growth rate of ||W^n||^(1/n): |u(z0)| for a != 1, |u0| e^{|b|^2/2} for a = 1.

    For |a| = 1 the form |u0| e^{|b|^2/2} is used (it equals |u(z0)| when a != 1).
    """
    if _unimodular(P):
        return abs(P.u0) * math.exp(abs(P.b) ** 2 / 2)
    return abs(weight_at_fixed_point(P))


def root_of_unity_order(a, qmax=MAX_ROOT_ORDER, tol=ATOL):
    """Smallest q <= qmax with |a^q - 1| < tol, else None."""
    theta = cmath.phase(a)
    for q in range(1, qmax + 1):
        if 2 * abs(math.sin(q * theta / 2)) < tol:
            return q
    return None


def spectrum_closed_form(P: OperatorParams) -> SpectrumDescriptor:
    _require_bounded(P)
    if not _unimodular(P):
        return SpectrumDescriptor("GeometricWithZero", base=weight_at_fixed_point(P), ratio=P.a)
    if P.a_is_one:
        if is_close(P.b, 0):
            return SpectrumDescriptor("Singleton", base=P.u0)
        return SpectrumDescriptor("FullCircle", radius=spectral_modulus(P))
    base = weight_at_fixed_point(P)
    q = root_of_unity_order(P.a)
    if q is not None:
        pts = tuple(base * P.a**m for m in range(q))
        return SpectrumDescriptor("FinitePoints", base=base, ratio=P.a, points=pts)
    return SpectrumDescriptor("FullCircle", base=base, ratio=P.a, radius=spectral_modulus(P))


def _on_circle(r):
    return abs(r - 1) <= ATOL


def ritt_verdict(P: OperatorParams) -> Verdict:
    _require_bounded(P)
    r = spectral_modulus(P)
    margin = 1 - r
    if _unimodular(P):
        if P.a_is_one and is_close(P.b, 0):
            if is_close(P.u0, 1):
                return Verdict(YES, "a = 1, b = 0, u(0) = 1: W is the identity (unimodular a)", margin)
            if r < 1 and not _on_circle(r):
                return Verdict(YES, "a = 1, b = 0, |u(0)| < 1: W = u(0) I (unimodular a)", margin)
            return Verdict(NO, "a = 1, b = 0 needs |u(0)| < 1 or u(0) = 1 (unimodular a)", margin)
        which = "a = 1, b != 0" if P.a_is_one else "|a| = 1, a != 1"
        if r < 1 and not _on_circle(r):
            return Verdict(YES, f"{which} and |u(0)| < exp(-|b|^2/2) (unimodular a)", margin)
        return Verdict(NO, f"{which} needs |u(0)| < exp(-|b|^2/2) (unimodular a)", margin)

    uz0 = weight_at_fixed_point(P)
    if is_close(uz0, 1):
        if P.is_composition:
            return Verdict(YES, "u = 1 and |a| < 1: C_psi is a compact Ritt operator", margin)
        if is_close(P.a, 0):
            return Verdict(YES, "a = 0 and u(b) = 1: W is a rank-one idempotent", margin)
        return Verdict(OPEN, "|a| < 1, u(z0) = 1, u non-constant: conjectured Yes, not proved", margin)
    if _on_circle(r):
        return Verdict(
            NO,
            f"|u(z0)| = 1 but u(z0) = {uz0:.6g} != 1: the spectrum {{0, u(z0) a^m}} meets the unit circle "
            "off 1, violating the Stolz-domain containment of Ritt operators",
            margin,
        )
    if r < 1:
        return Verdict(YES, "|a| < 1 and |u(z0)| < 1 (compact case)", margin)
    return Verdict(NO, "|u(z0)| > 1: W is not power bounded (compact case)", margin)


def unconditional_ritt_verdict(P: OperatorParams, ritt: Verdict | None = None) -> Verdict:
    ritt = ritt or ritt_verdict(P)
    if ritt.value == NO:
        return Verdict(NO, "the Ritt condition fails and unconditional Ritt implies Ritt (Kalton-Portal)", ritt.margin)
    if P.is_composition:
        return Verdict(ritt.value, "u = 1: unconditional Ritt is equivalent to Ritt for composition operators", ritt.margin)
    if ritt.value == OPEN:
        return Verdict(OPEN, "equivalence with Ritt is known only for C_psi, and the Ritt question itself is open here", ritt.margin)
    r = spectral_modulus(P)
    if r < 1:
        return Verdict(
            YES,
            "extension: ||W^n|| ~ r^n with r < 1, so sum ||W^n - W^(n-1)|| < infinity "
            "(same summability argument as the geometric decay bound for C_psi)",
            ritt.margin,
        )
    # remaining Ritt-Yes case: a = 0, u(b) = 1, so W^n = W for n >= 1
    return Verdict(
        YES,
        "extension: a = 0 and u(b) = 1 make W^n = W for n >= 1, so only the first difference is nonzero",
        ritt.margin,
    )


def classify(P: OperatorParams) -> ClassificationReport:
    bounded, why = _bounded(P)
    m_const = bound_constant(P)
    if not bounded:
        und = Verdict(NO, f"undefined: operator is unbounded ({why})")
        return ClassificationReport(
            P, False, False, False, False, und, und, None, m_const, math.inf, bounded_reason=why,
        )
    compact = abs(P.a) < 1 - ATOL
    r = spectral_modulus(P)
    power_bounded = r < 1 or _on_circle(r)
    ritt = ritt_verdict(P)
    abs_a = abs(P.a)
    try:
        norm_upper = abs_a ** (-2 / P.p) * m_const if abs_a > 0 else math.inf
    except OverflowError:
        norm_upper = math.inf
    return ClassificationReport(
        params=P,
        bounded=True,
        compact=compact,
        power_bounded=power_bounded,
        supercyclic=False,
        ritt=ritt,
        unconditional_ritt=unconditional_ritt_verdict(P, ritt),
        spectrum=spectrum_closed_form(P),
        m_constant=m_const,
        norm_upper=norm_upper,
        bounded_reason=why,
        spectral_modulus=r,
    )

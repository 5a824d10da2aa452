"""Weighted composition operators W(u, psi) f = u * (f o psi) on the Fock space,
with psi(z) = a z + b and u(z) = u0 e^{cz}: closed-form classification and
truncated-matrix numerics that cross-check it."""
from .classify import ClassificationReport, SpectrumDescriptor, Verdict, ritt_verdict, spectrum_closed_form
from .dynlab import ScanGrid, ScanResult, ProbeResult
from .linalg import MatrixRep, build_matrix, op_norm, resolvent_norm
from .rng import SplitMix64
from .symbolcore import ExpPoly, OperatorParams, bound_constant, compose, iterate_params

__version__ = "0.1.0"

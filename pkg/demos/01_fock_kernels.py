"""
Fock-space functions and one operator step
==========================================

Functions of the form p(z) e^{alpha z} are exact objects here (ExpPoly).
A weighted composition operator maps them to functions of the same form.
"""
import numpy as np

from fockdyn.symbolcore import OperatorParams, apply, expoly_coeffs, fock_norm, kernel, normalized_kernel

# %%
# The reproducing kernel K_w(z) = e^{conj(w) z} has norm e^{|w|^2/2};
# the normalized kernel k_w has norm 1.
w = 0.7 - 0.4j
print("||K_w||      ", fock_norm(kernel(w)), "expected", np.exp(abs(w) ** 2 / 2))
print("||k_w||      ", fock_norm(normalized_kernel(w)))

# %%
# Coefficients in the orthonormal basis e_m = z^m / sqrt(m!).
print("K_1 coeffs   ", np.round(expoly_coeffs(kernel(1), 6), 4))

# %%
# W f(z) = u(z) f(psi(z)) with psi(z) = a z + b and u(z) = u0 e^{c z}.
# With a = 1, c = -conj(b), u0 = e^{-|b|^2/2} the operator is a unitary translation.
b = 1 + 0.5j
P = OperatorParams(1, b, -b.conjugate(), np.exp(-abs(b) ** 2 / 2))
f = kernel(0.3)
g = apply(P, f)
print("W K_0.3      ", g)
print("norm kept    ", fock_norm(f), fock_norm(g))

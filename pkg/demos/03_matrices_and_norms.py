"""
Truncated matrices, operator norms and the bound constant
=========================================================

T_N is the leading N x N block in the basis e_m. Its norm increases with N
toward the operator norm, which for compact operators sits near the bound
constant M.
"""
import numpy as np

from fockdyn.linalg import build_matrix, op_norm, resolvent_norm
from fockdyn.symbolcore import OperatorParams, bound_constant

P = OperatorParams(0.5j, 0.3, 0.2j, 1.2)

# %%
for N in (8, 16, 32, 64, 128):
    print(N, op_norm(build_matrix(P, N).entries))
print("M =", bound_constant(P))

# %%
# With c = 0 the matrix is upper triangular and the diagonal is u0 a^m.
T = build_matrix(OperatorParams(0.5, 1, 0, 2), 6).entries
print(np.round(T, 3))

# %%
# The resolvent norm blows up near the spectrum point u0 = 2.
for eps in (1e-1, 1e-2, 1e-3):
    print(eps, resolvent_norm(T, 2 + eps))

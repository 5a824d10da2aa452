"""
Orbit probes, isometries and pointwise inequalities
===================================================

A finite orbit cannot prove non-supercyclicity, but its projective distance
to random targets is a useful sanity check.
"""
import math

from fockdyn import dynlab as dl
from fockdyn.rng import SplitMix64
from fockdyn.symbolcore import OperatorParams, kernel

P = OperatorParams(0.5, 1)
rng = SplitMix64(7)
targets = [dl.random_expoly(rng.spawn(i)) for i in range(3)]

# %%
res = dl.supercyclic_probe(P, kernel(1), targets, 30, 64)
print("min distance", res.min_projective_distance, "ratio", res.ratio_max, "<= C", res.ratio_bound_C)
print("violations  ", res.violations)

# %%
# The normalized translation is an isometry; check its leading block.
T = OperatorParams(1, 2j, 2j, math.exp(-2))
print("||T*T - I|| on 16 x 16:", dl.isometry_check(T, 96, 16))

# %%
rep = dl.inequality_suite(P, 200, 1)
print("inequality suite passed:", rep.passed)

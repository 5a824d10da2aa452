"""
Symbolic classification of a few operators
==========================================

Boundedness, compactness, power boundedness and the Ritt verdict follow from
the parameters alone. Each verdict carries the reason it was reached.
"""
import numpy as np

from fockdyn.classify import classify
from fockdyn.symbolcore import OperatorParams

cases = {
    "identity": OperatorParams(1),
    "contracted translation": OperatorParams(1, 1, -1, 0.5 * np.exp(-0.5)),
    "unitary translation": OperatorParams(1, 1, -1, np.exp(-0.5)),
    "compact composition": OperatorParams(0.5, 1),
    "rank one flip": OperatorParams(0, 0, 0, -1),
    "open case": OperatorParams(0.5, 0, 1, 1),
}

# %%
for name, P in cases.items():
    r = classify(P)
    print(f"{name:24s} compact={r.compact!s:5s} power_bounded={r.power_bounded!s:5s} ritt={r.ritt.value}")
    print(f"{'':24s} {r.ritt.reason}")

# %%
# The spectrum has a closed form; for compact operators it is {u(z0) a^m} plus 0.
print(classify(cases["compact composition"]).spectrum.to_dict())

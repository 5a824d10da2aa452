"""
Resolvent scans for the Ritt and Kreiss functionals
===================================================

The Ritt functional |lambda - 1| ||R(lambda)|| stays bounded outside the unit
disc exactly for Ritt operators. Scans run at N and N/2 and also approach
the peripheral spectrum to flag divergence.
"""
from fockdyn import dynlab as dl
from fockdyn.linalg import build_matrix
from fockdyn.symbolcore import OperatorParams

yes = OperatorParams(0.5, 0, 0, 0.9)
no = OperatorParams(0, 0, 0, -1)

# %%
for name, P in (("weighted contraction", yes), ("rank one flip", no)):
    r = dl.ritt_functional_scan(P, 48)
    print(f"{name:22s} sup={r.supremum:9.3f} half={r.supremum_half:9.3f} "
          f"stable={r.stable} approach={r.approach} -> {r.verdict_hint}")

# %%
# Kreiss: sup (|lambda| - 1) ||R(lambda)|| never exceeds sup_n ||T^n||.
k = dl.kreiss_functional_scan(yes, 48)
print("Kreiss sup", k.supremum, "power sup", max(dl.power_norms(build_matrix(yes, 48).entries, 64)))

# %%
# The differences n ||T^(n+1) - T^n|| and their closed-form lower bound.
for x in dl.nagy_zemanek_sequence(yes, 48, 10)[::3]:
    print(x.n, round(x.value, 5), round(x.lower_bound, 5))

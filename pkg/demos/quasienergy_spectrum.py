"""Quasienergies along a lambda sweep and where the phase boundaries cut it."""
import numpy as np

from twospin_floquet import ModelParams, quasienergies, classify, find_boundary
from twospin_floquet.floquet_numeric import two_spin_system, extract_floquet

f = 0.5
print(f"f = {f}")
print("  lam      eps1      eps2      eps3      eps4   phase")
for lam in np.linspace(0.2, 2.0, 10):
    eps = quasienergies(ModelParams(lam=lam, f=f))
    print(f"{lam:5.2f}  " + "  ".join(f"{e:8.4f}" for e in eps) + f"   {classify(lam, f)}")

# the closed form against direct integration of one period
params = ModelParams(lam=0.8, f=f)
num = extract_floquet(two_spin_system(params), tol=1e-12).relabel(quasienergies(params))
print("\nnumeric - analytic at lam=0.8:", np.max(np.abs(num.quasienergies - quasienergies(params))))

# boundaries crossed on the way
for name, bracket in [("b0", (0.5, 1.0)), ("b1", (1.0, 1.5))]:
    lam_star = find_boundary(f, name, bracket)
    print(f"{name} at lam = {lam_star:.12f}")

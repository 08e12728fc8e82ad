"""Work done on the spins over one driving period."""
import numpy as np

from twospin_floquet import ModelParams, work_distribution, jarzynski_moment
from twospin_floquet.work import mean_work_closed_form, mean_work_asymptote

params = ModelParams(lam=1.3, f=0.9, beta_init=2.0)
dist = work_distribution(params)
values, probs = dist.support()
for w, p in zip(values, probs):
    print(f"W = {w:+.4f}   P = {p:.6f}")
print("<W>            :", dist.mean())
print("closed form    :", mean_work_closed_form(params))
print("<exp(-beta W)> :", jarzynski_moment(dist))

# on the diagonal lam = f the mean work settles onto a simple envelope at low temperature
print("\n   f      <W>   asymptote")
for f in np.linspace(2.0, 3.0, 6):
    w = mean_work_closed_form(ModelParams(lam=f, f=f, beta_init=20.0))
    print(f"{f:4.2f}  {w:8.5f}  {mean_work_asymptote(f):8.5f}")

"""The numeric pipeline on a driven three-level ladder, no closed form needed."""
import numpy as np

from twospin_floquet import DrivenSystem, extract_floquet, fourier_components, transition_rates, solve_ness

levels = np.diag([0.0, 0.7, 1.6])
ladder = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
system = DrivenSystem(lambda t: levels + 0.4 * np.cos(t) * ladder, period=2 * np.pi, dimension=3)

floquet = extract_floquet(system, grid_size=128, tol=1e-11)
print("quasienergies:", floquet.quasienergies)
print("unitarity defect:", floquet.unitarity_defect)

# bath couples through the ladder operator
comps = fourier_components(floquet, ladder, floor=1e-10)
print("Fourier orders present:", sorted(comps))

rates = transition_rates(floquet.quasienergies, comps, beta_bath=2.0, lmax=6)
ness = solve_ness(rates)
print("steady state:", ness.p, " residual", ness.residual)
print("truncation defect beyond |l| = 6:", rates.truncation_defect)

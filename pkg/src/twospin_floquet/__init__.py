"""Floquet dynamics, work statistics and golden-rule steady states of the
two-spin Rabi model, with a general numerical Floquet pipeline."""

from .model import ModelParams, static_hamiltonian, driven_hamiltonian, static_spectrum
from .floquet_analytic import floquet_decomposition, quasienergies, mixing_matrix, propagator
from .floquet_numeric import DrivenSystem, two_spin_system, integrate_propagator, extract_floquet, fourier_components
from .work import work_distribution, mean_work, jarzynski_moment, excitation_probability
from .dissipation import transition_rates, solve_ness, two_spin_rates, two_spin_ness
from .phases import boundary_values, classify, find_boundary, ness_scan, boundary_behavior, phase_diagram

__version__ = "0.1.0"

"""Closed-form Floquet normal form of the two-spin Rabi model.

The propagator factorizes as ``Psi(t) = P(t) A D(t) A^T`` where

* ``P(t) = diag(e^{-it}, 1, 1, e^{it})`` is the 2*pi periodic part,
* ``A`` is a real orthogonal matrix whose columns are the Floquet
  eigenvectors at ``t = 0``,
* ``D(t) = diag(exp(-i eps_n t))`` carries the quasienergies.

Quasienergy representatives are kept in the strictly increasing branch

    eps1 = -(2r + lam)/4,  eps2 = (lam - 2f)/4,
    eps3 = (2r - lam)/4,   eps4 = (lam + 2f)/4,     r = sqrt(f^2 + lam^2),

which is the branch the phase-boundary functions are written against.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams


def quasienergies(params: ModelParams) -> np.ndarray:
    lam, f = params.lam, params.f
    r = params.rabi_norm
    return np.array([
        -(2 * r + lam) / 4,
        (lam - 2 * f) / 4,
        (2 * r - lam) / 4,
        (lam + 2 * f) / 4,
    ])


def _alpha(params: ModelParams) -> float:
    r = params.rabi_norm
    if r == 0.0:
        raise ValueError("mixing matrix undefined at lam = f = 0")
    return params.lam / r


def mixing_matrix(params: ModelParams) -> np.ndarray:
    """Real orthogonal matrix A of Floquet eigenvectors (columns)."""
    alpha = _alpha(params)
    p = np.sqrt(1 + alpha)
    m = np.sqrt(1 - alpha)
    return 0.5 * np.array([
        [-m, 1.0, p, 1.0],
        [-p, -1.0, -m, 1.0],
        [p, -1.0, m, 1.0],
        [m, 1.0, -p, 1.0],
    ])


def periodic_part(t: float) -> np.ndarray:
    return np.diag([np.exp(-1j * t), 1.0, 1.0, np.exp(1j * t)])


@dataclass(frozen=True)
class FloquetDecomposition:
    """Analytic Floquet data for one parameter point."""

    quasienergies: np.ndarray
    mixing: np.ndarray
    alpha: float

    def propagator(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.quasienergies * t)
        a = self.mixing
        return periodic_part(t) @ (a * phases) @ a.T

    def floquet_function(self, n: int, t: float) -> np.ndarray:
        if not 1 <= n <= 4:
            raise IndexError(f"Floquet index must be in 1..4, got {n}")
        return periodic_part(t) @ self.mixing[:, n - 1].astype(complex)

    def floquet_functions(self, t: float) -> np.ndarray:
        """All four Floquet functions at ``t`` as the columns of a matrix."""
        return periodic_part(t) @ self.mixing.astype(complex)


def floquet_decomposition(params: ModelParams) -> FloquetDecomposition:
    """Build the decomposition, checking the quasienergy ordering.

    For ``lam, f > 0`` the representatives are strictly increasing; the
    phase machinery relies on that, so a violation is treated as an error.
    At ``f = 0`` three quasienergies coincide and no ordering is asserted.
    """
    eps = quasienergies(params)
    alpha = _alpha(params)
    if params.f > 0 and not np.all(np.diff(eps) > 0):
        raise ArithmeticError(f"quasienergies not strictly increasing: {eps}")
    return FloquetDecomposition(quasienergies=eps, mixing=mixing_matrix(params), alpha=alpha)


def propagator(params: ModelParams, t: float) -> np.ndarray:
    """Exact propagator Psi(t) with Psi(0) = identity."""
    return floquet_decomposition(params).propagator(t)


def monodromy(params: ModelParams) -> np.ndarray:
    return propagator(params, 2 * np.pi)


def floquet_function(params: ModelParams, n: int, t: float) -> np.ndarray:
    """n-th Floquet function ``u_n(t) = P(t) A_n`` (n = 1..4)."""
    return floquet_decomposition(params).floquet_function(n, t)

"""Numerical Floquet analysis for periodically driven N-level systems.

The one-period propagator (monodromy) is obtained by integrating
``dU/dt = -i H(t) U`` with an adaptive embedded Runge-Kutta scheme.  Its
eigenphases give the quasienergies, and Floquet functions are tabulated on a
uniform time grid so that matrix elements of an observable can be Fourier
analysed.

This module knows nothing about the closed-form solution and is used as the
independent check of :mod:`twospin_floquet.floquet_analytic`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import polar
from scipy.optimize import linear_sum_assignment

from .model import ModelParams, driven_hamiltonian, PERIOD

DEGENERACY_GAP = 1e-10


class IntegrationError(RuntimeError):
    """The adaptive integrator gave up before reaching the final time."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t = {t_reached!r})")
        self.t_reached = t_reached


class DegeneracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DrivenSystem:
    """A T-periodic Hamiltonian ``t -> H(t)`` on an N-dimensional space.

    Periodicity is spot-checked on 8 pseudo-random times when the system is
    constructed.
    """

    hamiltonian: Callable[[float], np.ndarray]
    period: float
    dimension: int
    periodicity_tol: float = 1e-12

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        if not self.period > 0:
            raise ValueError("period must be positive")
        rng = np.random.default_rng(20240501)
        for t in rng.uniform(-self.period, self.period, 8):
            h0 = np.asarray(self.hamiltonian(t))
            if h0.shape != (self.dimension, self.dimension):
                raise ValueError(f"hamiltonian returned shape {h0.shape}")
            if not np.all(np.isfinite(h0)):
                raise ValueError(f"hamiltonian is not finite at t={t}")
            h1 = np.asarray(self.hamiltonian(t + self.period))
            if np.max(np.abs(h1 - h0)) > self.periodicity_tol:
                raise ValueError(f"hamiltonian is not {self.period}-periodic at t={t}")

    @property
    def frequency(self) -> float:
        return 2 * np.pi / self.period


def two_spin_system(params: ModelParams) -> DrivenSystem:
    return DrivenSystem(
        hamiltonian=lambda t: driven_hamiltonian(params, t),
        period=PERIOD,
        dimension=4,
    )


@dataclass(frozen=True)
class PropagatorTrajectory:
    """Propagator samples ``U(t_k, t0)``; iterating yields ``(t, U)`` pairs."""

    times: np.ndarray
    propagators: np.ndarray  # shape (K, N, N)
    unitarity_defect: float
    nfev: int

    def __iter__(self) -> Iterator[tuple[float, np.ndarray]]:
        return iter(zip(self.times, self.propagators))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.propagators[-1]


def _unitarity_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def integrate_propagator(
    system: DrivenSystem,
    t_end: float,
    tol: float = 1e-10,
    t_eval=None,
    t0: float = 0.0,
    renormalize: bool = False,
) -> PropagatorTrajectory:
    """Solve ``dU/dt = -i H(t) U`` with ``U(t0) = 1`` up to ``t0 + t_end``.

    Uses the Dormand-Prince 8(5,3) pair with ``rtol = atol = tol``.  Output
    times are ``t_eval`` (absolute times) or just the end point.  The
    reported unitarity defect is that of the final propagator before any
    optional polar re-projection.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = system.dimension
    t1 = t0 + t_end
    if t_eval is None:
        t_eval = np.array([t1])
    t_eval = np.asarray(t_eval, dtype=float)

    reached = [t0]

    def rhs(t, y):
        u = y.reshape(n, n)
        dy = (-1j * (np.asarray(system.hamiltonian(t)) @ u)).ravel()
        if t > reached[0] and np.all(np.isfinite(dy)):
            reached[0] = t
        return dy

    sol = solve_ivp(
        rhs,
        (t0, t1),
        np.eye(n, dtype=complex).ravel(),
        method="DOP853",
        rtol=tol,
        atol=tol,
        t_eval=t_eval,
    )
    if sol.status != 0:
        raise IntegrationError(sol.message, float(reached[0]))
    us = sol.y.T.reshape(-1, n, n)
    defect = _unitarity_defect(us[-1])
    if renormalize:
        us = np.array([polar(u)[0] for u in us])
    return PropagatorTrajectory(times=sol.t, propagators=us, unitarity_defect=defect, nfev=sol.nfev)


def _fold(eps: np.ndarray, omega: float) -> np.ndarray:
    """Map quasienergies into (-omega/2, omega/2]."""
    eps = np.mod(eps + omega / 2, omega) - omega / 2
    eps[np.isclose(eps, -omega / 2, rtol=0, atol=1e-15)] = omega / 2
    return eps


def _fix_gauge(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    ref = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(ref) / ref)


@dataclass(frozen=True)
class NumericFloquet:
    """Floquet data extracted from the monodromy.

    ``floquet_functions[k, :, n]`` is ``u_n(t_k)``, so ``floquet_functions[k]``
    holds the Floquet functions at ``t_k`` as columns.
    """

    monodromy: np.ndarray
    quasienergies: np.ndarray
    eigenvectors: np.ndarray
    grid: np.ndarray
    floquet_functions: np.ndarray
    period: float
    t0: float = 0.0
    degenerate: bool = False
    unitarity_defect: float = 0.0
    propagators: np.ndarray = field(default=None, repr=False)

    @property
    def frequency(self) -> float:
        return 2 * np.pi / self.period

    def relabel(self, targets) -> NumericFloquet:
        """Reorder and shift quasienergies to match given representatives.

        Each numeric quasienergy is paired with the target closest modulo the
        driving frequency, moved onto that branch, and its Floquet function
        multiplied by the compensating ``exp(i k omega (t - t0))``.
        """
        targets = np.asarray(targets, dtype=float)
        omega = self.frequency
        diff = targets[:, None] - self.quasienergies[None, :]
        circ = np.abs(diff - omega * np.round(diff / omega))
        rows, cols = linear_sum_assignment(circ)
        order = cols[np.argsort(rows)]
        shifts = np.round(diff[np.arange(len(targets)), order] / omega)
        eps = self.quasienergies[order] + shifts * omega
        phase = np.exp(1j * omega * np.outer(self.grid - self.t0, shifts))
        u = self.floquet_functions[:, :, order] * phase[:, None, :]
        return replace(
            self,
            quasienergies=eps,
            eigenvectors=self.eigenvectors[:, order],
            floquet_functions=u,
        )


def extract_floquet(
    system: DrivenSystem,
    grid_size: int = 256,
    tol: float = 1e-10,
    t0: float = 0.0,
) -> NumericFloquet:
    """Integrate one period and extract quasienergies and Floquet functions.

    The monodromy is ``U(t0 + T, t0)``.  Quasienergies are
    ``-arg(mu_n)/T`` folded into ``(-omega/2, omega/2]`` and sorted.  Near
    degenerate eigenvalues (gap < 1e-10) trigger a :class:`DegeneracyWarning`
    and set ``degenerate``; the eigenvectors are then basis dependent.
    """
    if grid_size < 4 or grid_size & (grid_size - 1):
        raise ValueError("grid_size must be a power of two >= 4")
    period = system.period
    grid = t0 + period * np.arange(grid_size) / grid_size
    t_eval = np.append(grid, t0 + period)
    traj = integrate_propagator(system, period, tol=tol, t_eval=t_eval, t0=t0)
    mono = traj.final

    mu, vecs = np.linalg.eig(mono)
    omega = system.frequency
    eps = _fold(-np.angle(mu) / period, omega)
    order = np.argsort(eps, kind="stable")
    eps, mu, vecs = eps[order], mu[order], vecs[:, order]
    vecs = _fix_gauge(vecs / np.linalg.norm(vecs, axis=0))

    gaps = np.abs(mu[:, None] - mu[None, :]) + np.eye(len(mu))
    degenerate = bool(np.min(gaps) < DEGENERACY_GAP)
    if degenerate:
        warnings.warn(
            f"monodromy has near-degenerate eigenvalues (gap {np.min(gaps):.2e}); "
            "Floquet eigenvectors are basis dependent",
            DegeneracyWarning,
            stacklevel=2,
        )

    props = traj.propagators[:-1]
    phase = np.exp(1j * np.outer(grid - t0, eps))
    u = np.einsum("kij,jn->kin", props, vecs) * phase[:, None, :]
    return NumericFloquet(
        monodromy=mono,
        quasienergies=eps,
        eigenvectors=vecs,
        grid=grid,
        floquet_functions=u,
        period=period,
        t0=t0,
        degenerate=degenerate,
        unitarity_defect=traj.unitarity_defect,
        propagators=props,
    )


def fourier_components(
    floquet: NumericFloquet,
    observable: np.ndarray,
    floor: float = 1e-12,
) -> dict[int, np.ndarray]:
    """Fourier coefficients of ``<u_n(t)|V|u_m(t)>`` over one period.

    Returns ``{l: V_l}`` with ``V_l[n, m]`` the coefficient of
    ``exp(i l omega (t - t0))``, for ``|l| <= K/2 - 1``.  Entries below
    ``floor`` in magnitude are set to exactly zero and orders with no
    surviving entry are dropped.
    """
    observable = np.asarray(observable)
    u = floquet.floquet_functions
    k, n, _ = u.shape
    if observable.shape != (n, n):
        raise ValueError(f"observable shape {observable.shape} does not match dimension {n}")
    vt = np.einsum("kin,ij,kjm->knm", u.conj(), observable, u)
    coeffs = np.fft.fft(vt, axis=0) / k
    out = {}
    for ell in range(-(k // 2 - 1), k // 2):
        c = coeffs[ell % k].copy()
        c[np.abs(c) < floor] = 0.0
        if np.any(c != 0):
            out[ell] = c
    return out

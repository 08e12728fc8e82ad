"""Golden-rule rates between Floquet states and the Pauli-master-equation NESS.

A weakly coupled oscillator bath induces transitions i -> f with total rate

    Gamma[f, i] = sum_l 2 pi |V_l[f, i]|^2 N(eps_f - eps_i + l omega) J(|.|),

where ``V_l`` are Fourier components of the coupling operator in the Floquet
basis and ``N`` is the thermal phonon occupation.  The stationary occupation
``p`` solves ``Gt p = 0`` with ``Gt = Gamma - diag(column sums)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import floquet_analytic
from .model import ModelParams

BOUNDARY_TOL = 1e-9


class OnBoundaryError(ValueError):
    """A sideband frequency vanishes: the point lies on a phase boundary."""

    def __init__(self, message: str, omega: float, triple: tuple[int, int, int] | None = None):
        super().__init__(message)
        self.omega = omega
        self.triple = triple


class ReducibleRatesError(ValueError):
    pass


class NessSolveError(ArithmeticError):
    pass


def bath_occupation(omega: float, beta_bath: float, eps_b: float = BOUNDARY_TOL) -> float:
    """Thermal phonon occupation 1/(e^{beta w} - 1), or 1/(1 - e^{beta w}) for w < 0."""
    if abs(omega) < eps_b:
        raise OnBoundaryError(f"|omega| = {abs(omega):.3e} below boundary tolerance {eps_b:g}", omega)
    x = math.expm1(beta_bath * omega)
    return 1.0 / x if omega > 0 else -1.0 / x


@dataclass(frozen=True)
class RateMatrix:
    """Total rates ``gamma[f, i]`` for i -> f.

    Diagonal entries are kept for completeness but play no role in the
    stationary state.
    """

    gamma: np.ndarray
    lmax: int
    truncation_defect: float = 0.0

    @property
    def size(self) -> int:
        return self.gamma.shape[0]

    def scaled(self, c: float) -> RateMatrix:
        return RateMatrix(self.gamma * c, self.lmax, self.truncation_defect * c)


@dataclass(frozen=True)
class NessSolution:
    p: np.ndarray
    residual: float
    irreducible: bool = True


def coupling_fourier_analytic(params: ModelParams) -> dict[int, np.ndarray]:
    """Closed-form Fourier components of ``1 x s_x`` in the Floquet basis.

    Only the orders +1 and -1 are present.  Entries (2,4) and (4,2) vanish
    identically, so the pair of Floquet states 2 and 4 is never connected
    directly by the bath.
    """
    lam, f = params.lam, params.f
    if lam <= 0 or f <= 0:
        raise ValueError("analytic coupling components need lam > 0 and f > 0")
    u = 1.0 / params.rabi_norm
    v = math.sqrt(1 + lam * u)
    w = math.sqrt(max(1 - lam * u, 0.0))
    plus = np.array([
        [2 * f * u, v + w, -2 * lam * u, v - w],
        [-v - w, -2, v - w, 0],
        [-2 * lam * u, w - v, -2 * f * u, v + w],
        [w - v, 0, -v - w, 2],
    ]) / 8
    minus = np.array([
        [2 * f * u, -v - w, -2 * lam * u, w - v],
        [v + w, -2, w - v, 0],
        [-2 * lam * u, v - w, -2 * f * u, -v - w],
        [v - w, 0, v + w, 2],
    ]) / 8
    return {1: plus.astype(complex), -1: minus.astype(complex)}


def transition_rates(
    quasienergies,
    fourier: Mapping[int, np.ndarray],
    beta_bath: float,
    j0: float = 1.0,
    lmax: int = 8,
    spectral_density: Callable[[float], float] | None = None,
    omega_drive: float = 1.0,
    eps_b: float = BOUNDARY_TOL,
) -> RateMatrix:
    """Sum partial golden-rule rates over Fourier orders ``|l| <= lmax``.

    ``spectral_density`` maps ``|omega|`` to a nonnegative density; the
    default is the constant ``j0``.  Partial rates with zero Fourier weight
    are skipped, so a vanishing frequency only raises when the bath actually
    couples through it.  Pure dephasing terms (f = i, l = 0) carry zero
    frequency and are left out of the diagonal.  The largest partial rate
    among available orders beyond ``lmax`` is reported as the truncation
    defect.
    """
    eps = np.asarray(quasienergies, dtype=float)
    n = len(eps)
    density = spectral_density if spectral_density is not None else (lambda _w: j0)
    gamma = np.zeros((n, n))
    defect = 0.0
    for ell, vl in fourier.items():
        weight = np.abs(np.asarray(vl)) ** 2
        kept = abs(ell) <= lmax
        for fi in range(n):
            for ii in range(n):
                if weight[fi, ii] == 0.0 or (fi == ii and ell == 0):
                    continue
                omega = eps[fi] - eps[ii] + ell * omega_drive
                if not kept:
                    if abs(omega) >= eps_b:
                        partial = 2 * np.pi * weight[fi, ii] * bath_occupation(omega, beta_bath, eps_b)
                        defect = max(defect, partial * density(abs(omega)))
                    continue
                try:
                    occ = bath_occupation(omega, beta_bath, eps_b)
                except OnBoundaryError as exc:
                    raise OnBoundaryError(
                        f"vanishing sideband frequency for (f, i, l) = ({fi + 1}, {ii + 1}, {ell}): {exc}",
                        omega,
                        (fi + 1, ii + 1, ell),
                    ) from None
                gamma[fi, ii] += 2 * np.pi * weight[fi, ii] * occ * density(abs(omega))
    return RateMatrix(gamma=gamma, lmax=lmax, truncation_defect=defect)


def effective_generator(rates) -> np.ndarray:
    """Gt[m, n] = Gamma[m, n] - delta_mn sum_k Gamma[k, n].

    The diagonal is rebuilt from the off-diagonal column sums with
    compensated summation so that columns of the result sum to zero.
    """
    g = np.array(rates.gamma if isinstance(rates, RateMatrix) else rates, dtype=float)
    np.fill_diagonal(g, 0.0)
    for col in range(g.shape[1]):
        g[col, col] = -math.fsum(g[:, col])
    return g


def check_irreducible(rates, threshold: float = 1e-14) -> bool:
    """Strong connectivity of the graph with edges n -> m where Gamma[m, n] > threshold."""
    g = np.asarray(rates.gamma if isinstance(rates, RateMatrix) else rates)
    adj = g > threshold
    np.fill_diagonal(adj, False)

    def reach(a):
        seen = {0}
        stack = [0]
        while stack:
            node = stack.pop()
            for nxt in np.flatnonzero(a[:, node]):
                if nxt not in seen:
                    seen.add(int(nxt))
                    stack.append(int(nxt))
        return len(seen)

    n = adj.shape[0]
    return reach(adj) == n and reach(adj.T) == n


def _gth_stationary(gamma: np.ndarray) -> np.ndarray:
    """Grassmann-Taksar-Heyman elimination on the off-diagonal rates.

    Works only with sums and products of nonnegative numbers, so the result
    has high relative accuracy even when the chain is nearly decomposable.
    """
    # a[i, j] = rate i -> j
    a = np.array(gamma, dtype=float).T
    n = a.shape[0]
    for k in range(n - 1, 0, -1):
        a[:k, k] /= math.fsum(a[k, :k])
        a[:k, :k] += np.outer(a[:k, k], a[k, :k])
    x = np.zeros(n)
    x[0] = 1.0
    for j in range(1, n):
        x[j] = math.fsum(x[:j] * a[:j, j])
    return x


def _dense_stationary(gt: np.ndarray) -> np.ndarray:
    """One row of the generator replaced by the normalization constraint."""
    n = gt.shape[0]
    a = gt.copy()
    a[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return np.linalg.solve(a, rhs)


def solve_ness(rates: RateMatrix, rtol: float = 1e-10, method: str = "gth") -> NessSolution:
    """Unique positive stationary vector of the Pauli master equation.

    The default ``method="gth"`` is subtraction free and keeps ``p``
    invariant under rescaling of the rates to rounding level.
    ``method="dense"`` solves the generator with one row replaced by the
    normalization; it agrees to about ``cond * eps`` and serves as a
    cross-check.
    """
    if not check_irreducible(rates):
        raise ReducibleRatesError("rate matrix is reducible; stationary state not unique")
    g = rates.gamma if isinstance(rates, RateMatrix) else np.asarray(rates, dtype=float)
    gt = effective_generator(g)
    if method == "gth":
        off = g.copy()
        np.fill_diagonal(off, 0.0)
        p = _gth_stationary(off)
    elif method == "dense":
        p = _dense_stationary(gt)
    else:
        raise ValueError(f"unknown method {method!r}")
    p = p / math.fsum(p)
    residual = float(np.max(np.abs(gt @ p)))
    scale = float(np.max(np.sum(np.abs(g), axis=1)))
    if residual >= rtol * scale:
        raise NessSolveError(f"residual {residual:.3e} exceeds {rtol:g} * |Gamma|_inf = {rtol * scale:.3e}")
    if np.any(p <= 0):
        raise NessSolveError(f"non-positive stationary component: {p}")
    return NessSolution(p=p, residual=residual, irreducible=True)


def two_spin_rates(params: ModelParams, lmax: int = 1) -> RateMatrix:
    """Rates for the two-spin model from the closed-form Fourier components."""
    eps = floquet_analytic.quasienergies(params)
    return transition_rates(eps, coupling_fourier_analytic(params), params.beta_bath, params.j0, lmax=lmax)


def two_spin_ness(params: ModelParams) -> NessSolution:
    return solve_ness(two_spin_rates(params))

"""Two-spin Rabi model: parameters, Hamiltonians and the static spectrum.

Two s=1/2 spins with isotropic Heisenberg coupling ``lam`` in a static field,
the first spin additionally driven by a circularly polarized field of
amplitude ``f``.  Driving frequency and Larmor frequency are both fixed to 1,
so the period is 2*pi.

All matrices use the product basis ``(uu, ud, du, dd)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PERIOD = 2.0 * np.pi

_SX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
_SY = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
_ID = np.eye(2, dtype=complex)

# single-spin operators embedded in the 4-dim product space
S1 = tuple(np.kron(s, _ID) for s in (_SX, _SY, _SZ))
S2 = tuple(np.kron(_ID, s) for s in (_SX, _SY, _SZ))

#: bath coupling operator acting on the second spin only
BATH_COUPLING = S2[0]


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the two-spin Rabi model.

    Attributes:
        lam: Heisenberg coupling, > 0.
        f: driving amplitude, >= 0.  ``f = 0`` is the static limit.
        beta_init: inverse temperature of the initial Gibbs state used by the
            work protocol, >= 0.
        beta_bath: inverse temperature of the heat bath, > 0.
        j0: constant bath spectral density, > 0.
    """

    lam: float
    f: float = 0.0
    beta_init: float = 1.0
    beta_bath: float = 1.0
    j0: float = 1.0

    def __post_init__(self):
        for name in ("lam", "f", "beta_init", "beta_bath", "j0"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.f < 0:
            raise ValueError(f"f must be >= 0, got {self.f}")
        if self.beta_init < 0:
            raise ValueError(f"beta_init must be >= 0, got {self.beta_init}")
        if self.beta_bath <= 0:
            raise ValueError(f"beta_bath must be > 0, got {self.beta_bath}")
        if self.j0 <= 0:
            raise ValueError(f"j0 must be > 0, got {self.j0}")

    @property
    def rabi_norm(self) -> float:
        """sqrt(f**2 + lam**2), the combination that recurs everywhere."""
        return float(np.hypot(self.f, self.lam))


@dataclass(frozen=True)
class StaticSpectrum:
    """Energies ``E1..E4`` of the static Hamiltonian with their projectors.

    ``projectors[n]`` is the projector belonging to ``energies[n]``; P1 and
    P2 project on uu and dd, P3 on the singlet and P4 on the triplet-zero
    state.
    """

    energies: np.ndarray
    projectors: np.ndarray  # shape (4, 4, 4)

    def reconstruct(self) -> np.ndarray:
        return np.einsum("n,nij->ij", self.energies, self.projectors)


def static_hamiltonian(params: ModelParams) -> np.ndarray:
    """H0 = s3 x 1 + 1 x s3 + lam s.s as a 4x4 complex matrix."""
    heis = sum(a @ b for a, b in zip(S1, S2))
    return S1[2] + S2[2] + params.lam * heis


def driven_hamiltonian(params: ModelParams, t: float) -> np.ndarray:
    """H(t) = H0 + f (cos t s1_x + sin t s1_y), 2*pi periodic in t."""
    e = np.exp(-1j * t)
    h = static_hamiltonian(params)
    drive = 0.5 * params.f
    # s1_x cos t + s1_y sin t = 1/2 [[0, e^{-it}], [e^{it}, 0]] on spin 1
    h[0, 2] += drive * e
    h[1, 3] += drive * e
    h[2, 0] += drive * np.conj(e)
    h[3, 1] += drive * np.conj(e)
    return h


def static_spectrum(params: ModelParams) -> StaticSpectrum:
    lam = params.lam
    energies = np.array([lam / 4 + 1, lam / 4 - 1, -3 * lam / 4, lam / 4])
    p = np.zeros((4, 4, 4))
    p[0, 0, 0] = 1.0
    p[1, 3, 3] = 1.0
    p[2, 1:3, 1:3] = 0.5 * np.array([[1, -1], [-1, 1]])
    p[3, 1:3, 1:3] = 0.5 * np.array([[1, 1], [1, 1]])
    return StaticSpectrum(energies=energies, projectors=p)


def eigenvector(spectrum: StaticSpectrum, n: int) -> np.ndarray:
    """Unit vector spanning the rank-one projector ``P_n`` (n = 1..4).

    The overall phase is fixed so the first nonzero entry is positive.
    """
    if not 1 <= n <= 4:
        raise IndexError(f"state index must be in 1..4, got {n}")
    proj = spectrum.projectors[n - 1]
    col = int(np.argmax(np.diag(proj)))
    v = proj[:, col] / np.sqrt(proj[col, col])
    return v.astype(complex)

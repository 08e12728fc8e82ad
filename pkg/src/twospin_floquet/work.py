"""Two-point-measurement work statistics over one driving period.

The system starts in the Gibbs state of H0 at ``beta_init``, the energy is
measured (outcome i), the system is driven for one period and the energy is
measured again (outcome j).  All quantities here are exact finite sums over
the 4x4 joint outcome matrix.

Outcome labels follow the projector order of :func:`model.static_spectrum`
(E1 = lam/4 + 1 on uu, E2 = lam/4 - 1 on dd, E3 singlet, E4 triplet-zero).
The closed forms below use a different labelling of the same outcomes;
:func:`closed_form_label_permutation` recovers it by matching, and
:func:`to_closed_form_labels` converts matrices and vectors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from . import floquet_analytic
from .model import ModelParams, PERIOD, eigenvector, static_spectrum

TIE_TOL = 1e-12


@dataclass(frozen=True)
class WorkDistribution:
    joint: np.ndarray
    energies: np.ndarray
    beta_init: float

    @property
    def marginals(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def conditional(self) -> np.ndarray:
        """pi[i, j] = p(j | i), the transition probability i -> j."""
        return self.joint / self.marginals[:, None]

    @property
    def work_matrix(self) -> np.ndarray:
        """w[i, j] = E_j - E_i."""
        return self.energies[None, :] - self.energies[:, None]

    def mean(self) -> float:
        return float(np.sum(self.work_matrix * self.joint))

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct work values and their aggregated probabilities."""
        w = self.work_matrix.ravel()
        p = self.joint.ravel()
        order = np.argsort(w, kind="stable")
        values, probs = [], []
        for wi, pi in zip(w[order], p[order]):
            if values and abs(wi - values[-1]) < TIE_TOL:
                probs[-1] += pi
            else:
                values.append(wi)
                probs.append(pi)
        return np.array(values), np.array(probs)


def gibbs_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    x = -beta * (energies - energies.min())
    w = np.exp(x)
    return w / w.sum()


def work_distribution(params: ModelParams) -> WorkDistribution:
    spectrum = static_spectrum(params)
    u = floquet_analytic.propagator(params, PERIOD)
    weights = gibbs_weights(spectrum.energies, params.beta_init)
    # Tr(P_j U P_i U^dag) for rank-one projectors = |<j|U|i>|^2
    vecs = np.array([eigenvector(spectrum, n) for n in range(1, 5)]).T
    trans = np.abs(vecs.conj().T @ u @ vecs) ** 2  # trans[j, i]
    joint = weights[:, None] * trans.T
    return WorkDistribution(joint=joint, energies=spectrum.energies, beta_init=params.beta_init)


def mean_work(params: ModelParams) -> float:
    return work_distribution(params).mean()


def jarzynski_moment(dist: WorkDistribution) -> float:
    """<exp(-beta w)> over the joint distribution; equals 1 for this model."""
    return float(np.sum(np.exp(-dist.beta_init * dist.work_matrix) * dist.joint))


# -- closed forms, in their own outcome labelling -----------------------------

def conditional_closed_form(params: ModelParams, convention: str = "closed_form") -> np.ndarray:
    """Symmetric doubly stochastic matrix of conditional probabilities.

    Built from the diagonal and (1,2), (1,4), (2,2), (2,3) entries of the
    closed form, the rest completed by symmetry and unit row sums.  With
    ``convention="projector"`` the result is permuted into this module's
    outcome labelling.
    """
    lam, f = params.lam, params.f
    r2 = f * f + lam * lam
    if r2 == 0.0:
        raise ValueError("closed form undefined at lam = f = 0")
    r = np.sqrt(r2)
    pi_ = np.pi
    a = ((f * f * np.cos(2 * pi_ * r) + 2 * f * f + 3 * lam * lam) / r2 + np.cos(2 * pi_ * f)) / 8
    b = 0.5 * np.cos(pi_ * f) * (
        lam * np.sin(pi_ * lam) * np.sin(pi_ * r) / r + np.cos(pi_ * lam) * np.cos(pi_ * r)
    )
    x = f * f * np.sin(pi_ * r) ** 2 / (2 * r2)
    m = np.empty((4, 4))
    m[0, 0] = m[3, 3] = a + b
    m[0, 3] = m[3, 0] = a - b
    m[0, 1] = m[1, 0] = m[1, 3] = m[3, 1] = x
    m[1, 1] = (f * f * np.cos(2 * pi_ * r) + f * f + 2 * lam * lam) / (2 * r2)
    m[1, 2] = m[2, 1] = 0.0
    m[0, 2] = m[2, 0] = 1 - 2 * a - x
    m[2, 3] = m[3, 2] = 1 - 2 * a - x
    m[2, 2] = 4 * a + 2 * x - 1
    if convention == "closed_form":
        return m
    if convention == "projector":
        return from_closed_form_labels(m)
    raise ValueError(f"unknown convention {convention!r}")


def marginals_closed_form(params: ModelParams) -> np.ndarray:
    """Initial outcome probabilities in the closed-form labelling."""
    b, lam = params.beta_init, params.lam
    # scaled by exp(-2 beta) against overflow; ratios unchanged
    w = np.array([1.0, np.exp(b * (lam - 1)), np.exp(-b), np.exp(-2 * b)])
    return w / w.sum()


def mean_work_closed_form(params: ModelParams, dps: int | None = None) -> float:
    """Mean work from the closed-form expression.

    With ``dps`` set, the expression is evaluated in mpmath at that many
    decimal digits and the result returned as an ``mpmath.mpf``; this is
    needed to resolve the exponentially small deviations from the large-f
    asymptote at low temperature.
    """
    if dps is None:
        m = np
        lam, f, b = params.lam, params.f, params.beta_init
        e2, el, eb = np.exp(2 * b), np.exp(b * lam + b), np.exp(b)
        pi_ = np.pi
    else:
        m = mpmath
        mpmath.mp.dps = dps
        lam, f, b = (mpmath.mpf(v) for v in (params.lam, params.f, params.beta_init))
        e2, el, eb = mpmath.exp(2 * b), mpmath.exp(b * lam + b), mpmath.exp(b)
        pi_ = mpmath.pi
    r2 = f * f + lam * lam
    r = m.sqrt(r2)
    z = eb * (m.exp(b * lam) + eb + 1) + 1
    w1 = 4 * (e2 - 1) * lam**2 - f * f * (e2 * (lam - 4) - 2 * lam * el + lam + 4)
    w2 = (
        f * f * lam * (-2 * el + e2 + 1) * m.cos(2 * pi_ * r)
        - 8 * eb * m.sinh(b) * r2 * m.cos(pi_ * f) * m.cos(pi_ * lam) * m.cos(pi_ * r)
    )
    w3 = -4 * (e2 - 1) * lam * r * m.cos(pi_ * f) * m.sin(pi_ * lam) * m.sin(pi_ * r)
    out = (w1 + w2 + w3) / (4 * r2 * z)
    return float(out) if dps is None else out


def mean_work_asymptote(f):
    """Large-f form of the mean work on the line lam = f; accepts mpmath numbers."""
    if isinstance(f, mpmath.mpf):
        return f * mpmath.sin(mpmath.sqrt(2) * mpmath.pi * f) ** 2 / 2
    return 0.5 * f * np.sin(np.sqrt(2) * np.pi * f) ** 2


# -- label convention ----------------------------------------------------------

_MATCH_GRID = [(0.3, 0.4), (0.7, 1.9), (1.3, 0.7), (2.2, 2.6), (2.9, 0.2)]
_MATCH_BETAS = (0.5, 2.0)


@lru_cache(maxsize=1)
def closed_form_label_permutation() -> tuple[int, ...]:
    """Map closed-form outcome label k (0-based) to projector index ``perm[k]``.

    Determined by testing all 24 relabellings against both the closed-form
    conditionals and marginals on a fixed parameter grid; exactly one must
    survive.
    """
    hits = []
    for perm in itertools.permutations(range(4)):
        idx = np.array(perm)
        ok = True
        for lam, f in _MATCH_GRID:
            for beta in _MATCH_BETAS:
                params = ModelParams(lam=lam, f=f, beta_init=beta)
                dist = work_distribution(params)
                cond = dist.conditional[np.ix_(idx, idx)]
                marg = dist.marginals[idx]
                if (
                    np.max(np.abs(cond - conditional_closed_form(params))) > 1e-9
                    or np.max(np.abs(marg - marginals_closed_form(params))) > 1e-9
                ):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            hits.append(perm)
    if len(hits) != 1:
        raise RuntimeError(f"label permutation not unique: {hits}")
    return hits[0]


def to_closed_form_labels(x: np.ndarray) -> np.ndarray:
    """Reorder a projector-labelled vector or square matrix to closed-form labels."""
    idx = np.array(closed_form_label_permutation())
    x = np.asarray(x)
    return x[np.ix_(idx, idx)] if x.ndim == 2 else x[idx]


def from_closed_form_labels(x: np.ndarray) -> np.ndarray:
    inv = np.argsort(closed_form_label_permutation())
    x = np.asarray(x)
    return x[np.ix_(inv, inv)] if x.ndim == 2 else x[inv]


# -- Rabi-like excitation ------------------------------------------------------

def excitation_probability(params: ModelParams, t: float) -> float:
    """Probability of the transition E3 -> E2 after driving for time ``t``.

    E3 is the singlet and E2 the dd state.  They coincide in energy at
    ``lam = 1``, where the transition is not well defined and a
    ``ValueError`` is raised.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    spectrum = static_spectrum(params)
    if abs(spectrum.energies[1] - spectrum.energies[2]) < 1e-9:
        raise ValueError("E2 and E3 are degenerate (lam = 1); transition ill-defined")
    u = floquet_analytic.propagator(params, t)
    phi2 = eigenvector(spectrum, 2)
    phi3 = eigenvector(spectrum, 3)
    return float(abs(phi2.conj() @ u @ phi3) ** 2)

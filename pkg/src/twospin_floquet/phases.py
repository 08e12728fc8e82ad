"""Phase diagram of the two-spin model and NESS behaviour at phase boundaries.

A phase boundary is a curve where some bath-coupled sideband frequency
``eps_f - eps_i - 1`` vanishes.  With the quasienergy representatives of
:mod:`floquet_analytic` five such differences can vanish for ``lam, f > 0``:

    b0 = eps3 - eps1 - 1 = r - 1            (quarter circle)
    b1 = eps2 - eps1 - 1
    b2 = eps3 - eps2 - 1
    b3 = eps4 - eps1 - 1
    b4 = eps4 - eps2 - 1 = f - 1

The sign vector of ``(b0, ..., b4)`` labels the phase.  Letters are bound to
sign vectors through two scan lines: f = 1/2 crosses A, B, C, D with
increasing lam and f = 6/5 crosses E, F, G.  The one further sign class
realized in the quadrant is called H.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import floquet_analytic
from .dissipation import (
    NessSolveError,
    OnBoundaryError,
    ReducibleRatesError,
    two_spin_ness,
)
from .model import ModelParams

BOUNDARY_NAMES = ("b0", "b1", "b2", "b3", "b4")

#: 1-based Floquet pair (i, f) whose frequency eps_f - eps_i - 1 defines each boundary
BOUNDARY_PAIRS = {"b0": (1, 3), "b1": (1, 2), "b2": (2, 3), "b3": (1, 4), "b4": (2, 4)}

CLASSIFY_TOL = 1e-9

# scan lines binding letters to sign vectors: (f, crossings in lam, letters)
_SCAN_LINES = (
    (0.5, (2 / 3, math.sqrt(3) / 2, 6 / 5), "ABCD"),
    (6 / 5, (1 / 2, 11 / 8), "EFG"),
)


class BoundaryValues(NamedTuple):
    b0: float
    b1: float
    b2: float
    b3: float
    b4: float


def boundary_values(lam: float, f: float) -> BoundaryValues:
    e1, e2, e3, e4 = floquet_analytic.quasienergies(ModelParams(lam=lam, f=f))
    return BoundaryValues(e3 - e1 - 1, e2 - e1 - 1, e3 - e2 - 1, e4 - e1 - 1, e4 - e2 - 1)


def sixth_difference(lam: float, f: float) -> float:
    """eps4 - eps3 - 1 = (lam + f - r)/2 - 1.

    Negative throughout (0, 3]^2 but it does cross zero for large lam ~ f
    (e.g. lam = f ~ 3.42), beyond which the five-function classification
    is incomplete.
    """
    return 0.5 * (lam + f - math.hypot(lam, f)) - 1


def rational_boundary(name: str, lam):
    """The boundaries b1..b4 written as f(lam); b0 is the unit circle.

    These forms have poles at lam = 2 and are only used for overlays and
    cross-checks.
    """
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if name == "b0":
            return np.sqrt(np.clip(1 - lam**2, 0, None))
        if name == "b1":
            return 2 * (lam - 1) / (2 - lam)
        if name == "b2":
            return 2 * (lam + 1) / (2 + lam)
        if name == "b3":
            return 2 * (lam - 1) / (lam - 2)
        if name == "b4":
            return np.ones_like(lam)
    raise KeyError(name)


def _signs(values: Sequence[float]) -> tuple[int, ...]:
    return tuple(1 if v > 0 else -1 for v in values)


@lru_cache(maxsize=1)
def anchor_table() -> dict[tuple[int, ...], str]:
    """Sign vector -> letter, built from the two scan lines plus H."""
    table = {}
    for f, crossings, letters in _SCAN_LINES:
        edges = (0.0,) + crossings + (crossings[-1] + 0.4,)
        for letter, lo, hi in zip(letters, edges[:-1], edges[1:]):
            table[_signs(boundary_values(0.5 * (lo + hi), f))] = letter
    # the remaining class found on a grid over (0, 3]^2
    grid = np.linspace(0.03, 3.0, 100)
    rest = set()
    for lam in grid:
        for f in grid:
            s = _signs(boundary_values(lam, f))
            if s not in table:
                rest.add(s)
    if len(rest) != 1:
        raise RuntimeError(f"expected one unanchored sign class, found {sorted(rest)}")
    table[rest.pop()] = "H"
    return table


@dataclass(frozen=True)
class PhaseLabel:
    """Phase letter, or the boundary/boundaries the point sits on.

    ``kind`` is a letter "A".."H", "boundary", "ambiguous", or "unknown" for a
    sign vector outside the anchor table.
    """

    kind: str
    boundaries: tuple[str, ...] = ()

    @property
    def is_phase(self) -> bool:
        return len(self.kind) == 1

    def __str__(self) -> str:
        if self.kind == "boundary":
            return f"boundary:{self.boundaries[0]}"
        if self.kind == "ambiguous":
            return "ambiguous:" + "+".join(self.boundaries)
        return self.kind


def classify(lam: float, f: float, tol: float = CLASSIFY_TOL) -> PhaseLabel:
    values = boundary_values(lam, f)
    near = tuple(n for n, v in zip(BOUNDARY_NAMES, values) if abs(v) < tol)
    if len(near) == 1:
        return PhaseLabel("boundary", near)
    if len(near) > 1:
        return PhaseLabel("ambiguous", near)
    if sixth_difference(lam, f) > 0:
        warnings.warn(
            f"(lam, f) = ({lam}, {f}) lies beyond the eps4 - eps3 = 1 curve; "
            "the five-boundary classification does not resolve this region",
            stacklevel=2,
        )
    return PhaseLabel(anchor_table().get(_signs(values), "unknown"))


class BracketError(ValueError):
    pass


def find_boundary(f_fixed: float, which: str, bracket: tuple[float, float], tol: float = 1e-12) -> float:
    """Bisection in lam for the zero of boundary function ``which`` at fixed f."""
    idx = BOUNDARY_NAMES.index(which)

    def g(lam):
        return boundary_values(lam, f_fixed)[idx]

    lo, hi = bracket
    glo, ghi = g(lo), g(hi)
    if np.sign(glo) == np.sign(ghi) and glo != 0.0:
        raise BracketError(f"{which} does not change sign on [{lo}, {hi}] at f = {f_fixed}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    lam = lo if abs(glo) <= abs(g(hi)) else hi
    if abs(g(lam)) >= tol:
        raise BracketError(f"bisection stalled with |{which}| = {abs(g(lam)):.2e}")
    return lam


def locate_boundaries(f_fixed: float, which: str, lam_max: float = 6.0, samples: int = 2000) -> list[float]:
    """All zeros of ``which`` along the line f = f_fixed for 0 < lam <= lam_max."""
    lams = np.linspace(lam_max / samples, lam_max, samples)
    idx = BOUNDARY_NAMES.index(which)
    vals = np.array([boundary_values(lam, f_fixed)[idx] for lam in lams])
    # zero counts as nonnegative, so a sample landing on a root is found once
    nonneg = vals >= 0
    roots = []
    for k in np.flatnonzero(nonneg[:-1] != nonneg[1:]):
        roots.append(find_boundary(f_fixed, which, (lams[k], lams[k + 1])))
    return roots


# -- NESS scans ----------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    lam: float
    phase: PhaseLabel
    p: np.ndarray | None
    residual: float | None
    error: str | None = None


def _parallel_map(fn, items, threads: int | None):
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def ness_point(lam: float, f: float, beta_bath: float, j0: float = 1.0) -> ScanRow:
    phase = classify(lam, f)
    try:
        sol = two_spin_ness(ModelParams(lam=lam, f=f, beta_bath=beta_bath, j0=j0))
    except (OnBoundaryError, ReducibleRatesError, NessSolveError) as exc:
        return ScanRow(lam, phase, None, None, f"{type(exc).__name__}: {exc}")
    return ScanRow(lam, phase, sol.p, sol.residual)


def ness_scan(
    f_fixed: float,
    lambda_range: tuple[float, float],
    steps: int,
    beta_bath: float = 1.0,
    j0: float = 1.0,
    threads: int | None = None,
) -> list[ScanRow]:
    """NESS along lam at fixed f; failures are recorded per row, never raised."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    lams = np.linspace(lambda_range[0], lambda_range[1], steps)
    return _parallel_map(lambda lam: ness_point(float(lam), f_fixed, beta_bath, j0), lams, threads)


def segments(rows: Sequence[ScanRow]) -> list[tuple[str, float, float, int]]:
    """Runs of successfully solved rows sharing a phase letter.

    Returns ``(letter, first lam, last lam, count)`` per run; boundary rows
    and failed points separate runs but do not form runs themselves.
    """
    runs = []
    for row in rows:
        if row.p is None or not row.phase.is_phase:
            continue
        letter = row.phase.kind
        if runs and runs[-1][0] == letter:
            lt, lo, _, c = runs[-1]
            runs[-1] = (lt, lo, row.lam, c + 1)
        else:
            runs.append((letter, row.lam, row.lam, 1))
    return runs


# -- behaviour at a boundary ---------------------------------------------------

def one_sided_slopes(p_at: Callable[[float], np.ndarray], x0: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Left and right derivative estimates of ``p_at`` at ``x0``.

    Each side uses points at distances delta, 2 delta and 4 delta only, so the
    (possibly singular) point x0 itself is never evaluated.  Forward
    differences D(h) = (p(x0 + 2h) - p(x0 + h)) / h are combined as
    2 D(delta) - D(2 delta), removing the O(h) error.
    """
    out = []
    for side in (-1.0, 1.0):
        p1, p2, p4 = (np.asarray(p_at(x0 + side * k * delta)) for k in (1, 2, 4))
        d1 = (p2 - p1) / delta
        d2 = (p4 - p2) / (2 * delta)
        out.append(side * (2 * d1 - d2))
    return out[0], out[1]


@dataclass
class BoundaryReport:
    which: str
    f: float
    beta_bath: float
    lam_star: float
    designated_pair: tuple[int, int]
    offsets: list[float]
    p_minus: list[list[float]] = field(default_factory=list)
    p_plus: list[list[float]] = field(default_factory=list)
    pair_gap_minus: list[float] = field(default_factory=list)
    pair_gap_plus: list[float] = field(default_factory=list)
    continuity: list[float] = field(default_factory=list)
    slope_left: list[list[float]] = field(default_factory=list)
    slope_right: list[list[float]] = field(default_factory=list)
    slope_gap: list[float] = field(default_factory=list)
    identified_pair: tuple[int, int] | None = None
    all_coincide_minus: bool = False
    all_coincide_plus: bool = False
    exactly_two: bool = False
    phase_minus: str = ""
    phase_plus: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def kink_change(self) -> float:
        """Relative change of the slope gap between the two smallest offsets."""
        a, b = self.slope_gap[-2], self.slope_gap[-1]
        return abs(a - b) / abs(b)


def _closest_pair(p: np.ndarray) -> tuple[tuple[int, int], float, float]:
    n = len(p)
    gaps = sorted((abs(p[i] - p[j]), (i + 1, j + 1)) for i in range(n) for j in range(i + 1, n))
    return gaps[0][1], gaps[0][0], gaps[1][0]


def boundary_behavior(
    f_fixed: float,
    which: str,
    beta_bath: float = 1.0,
    offsets: Sequence[float] = (1e-2, 1e-3, 1e-4),
    bracket: tuple[float, float] | None = None,
    j0: float = 1.0,
    coincidence_tol: float = 1e-10,
) -> BoundaryReport:
    """Probe the NESS on both sides of a boundary at decreasing offsets.

    Without a bracket the line f = f_fixed is searched and the boundary must
    be unique on it.
    """
    offsets = [float(d) for d in offsets]
    if any(d <= 0 for d in offsets) or any(a <= b for a, b in zip(offsets, offsets[1:])):
        raise ValueError("offsets must be positive and strictly decreasing")
    if bracket is None:
        roots = locate_boundaries(f_fixed, which)
        if len(roots) != 1:
            raise BracketError(f"{which} has {len(roots)} zeros on f = {f_fixed}; pass a bracket")
        lam_star = roots[0]
    else:
        lam_star = find_boundary(f_fixed, which, bracket)

    def p_at(lam):
        return two_spin_ness(ModelParams(lam=lam, f=f_fixed, beta_bath=beta_bath, j0=j0)).p

    n_bar, m_bar = BOUNDARY_PAIRS[which]
    rep = BoundaryReport(
        which=which,
        f=f_fixed,
        beta_bath=beta_bath,
        lam_star=lam_star,
        designated_pair=(n_bar, m_bar),
        offsets=offsets,
        phase_minus=str(classify(lam_star - offsets[0], f_fixed)),
        phase_plus=str(classify(lam_star + offsets[0], f_fixed)),
    )
    for d in offsets:
        pm, pp = p_at(lam_star - d), p_at(lam_star + d)
        rep.p_minus.append(pm.tolist())
        rep.p_plus.append(pp.tolist())
        rep.pair_gap_minus.append(float(abs(pm[n_bar - 1] - pm[m_bar - 1])))
        rep.pair_gap_plus.append(float(abs(pp[n_bar - 1] - pp[m_bar - 1])))
        rep.continuity.append(float(np.max(np.abs(pp - pm))))
        left, right = one_sided_slopes(p_at, lam_star, d)
        rep.slope_left.append(left.tolist())
        rep.slope_right.append(right.tolist())
        rep.slope_gap.append(float(np.max(np.abs(right - left))))

    pm, pp = np.array(rep.p_minus[-1]), np.array(rep.p_plus[-1])
    rep.all_coincide_minus = bool(np.ptp(pm) < coincidence_tol)
    rep.all_coincide_plus = bool(np.ptp(pp) < coincidence_tol)
    if not (rep.all_coincide_minus or rep.all_coincide_plus):
        mid = 0.5 * (pm + pp)
        pair, gap, second = _closest_pair(mid)
        rep.identified_pair = pair
        rep.exactly_two = bool(gap * 100 <= second)
    return rep


def quasitemperature_spread(p, eps) -> tuple[np.ndarray, float]:
    """Pairwise inverse quasitemperatures log(p_n/p_m)/(eps_m - eps_n).

    A Boltzmann distribution in the quasienergies makes them all equal; the
    second return value is their relative spread (max - min) / max |.|.
    """
    p = np.asarray(p, dtype=float)
    eps = np.asarray(eps, dtype=float)
    vals = []
    for n in range(len(p)):
        for m in range(n + 1, len(p)):
            vals.append(math.log(p[n] / p[m]) / (eps[m] - eps[n]))
    vals = np.array(vals)
    scale = np.max(np.abs(vals))
    return vals, float(np.ptp(vals) / scale) if scale > 0 else 0.0


# -- phase diagram -------------------------------------------------------------

@dataclass(frozen=True)
class PhaseDiagram:
    lams: np.ndarray
    fs: np.ndarray
    labels: np.ndarray  # labels[i_f, i_lam], strings
    curves: dict

    def letters(self) -> set[str]:
        return {s for s in np.unique(self.labels) if len(s) == 1}


def _half_open_grid(lo: float, hi: float, n: int) -> np.ndarray:
    # points of (lo, hi], right cell edges
    return lo + (hi - lo) * np.arange(1, n + 1) / n


def boundary_curves(lambda_range, f_range, samples: int = 400) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Sample each boundary as a polyline (lam, f) clipped to the window."""
    lo_l, hi_l = lambda_range
    lo_f, hi_f = f_range
    out = {}
    theta = np.linspace(0, np.pi / 2, samples)
    lam_c, f_c = np.cos(theta), np.sin(theta)
    keep = (lam_c > lo_l) & (lam_c <= hi_l) & (f_c > lo_f) & (f_c <= hi_f)
    out["b0"] = (lam_c[keep], f_c[keep])
    lam = np.linspace(lo_l, hi_l, samples + 1)[1:]
    for name in BOUNDARY_NAMES[1:]:
        fv = rational_boundary(name, lam)
        keep = np.isfinite(fv) & (fv > lo_f) & (fv <= hi_f)
        idx = BOUNDARY_NAMES.index(name)
        # the rational forms can have spurious branches; keep true zeros only
        for k in np.flatnonzero(keep):
            keep[k] = abs(boundary_values(lam[k], fv[k])[idx]) < 1e-9
        out[name] = (lam[keep], fv[keep])
    return out


def phase_diagram(
    lambda_range=(0.0, 3.0),
    f_range=(0.0, 3.0),
    resolution: int | tuple[int, int] = 200,
    tol: float = CLASSIFY_TOL,
) -> PhaseDiagram:
    """Classify a grid over (lam_lo, lam_hi] x (f_lo, f_hi]."""
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    lams = _half_open_grid(*lambda_range, resolution[0])
    fs = _half_open_grid(*f_range, resolution[1])
    labels = np.empty((len(fs), len(lams)), dtype=object)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i, f in enumerate(fs):
            for j, lam in enumerate(lams):
                labels[i, j] = str(classify(lam, f, tol))
    return PhaseDiagram(lams, fs, labels.astype(str), boundary_curves(lambda_range, f_range))

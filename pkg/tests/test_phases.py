import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from twospin_floquet import phases
from twospin_floquet.dissipation import two_spin_ness
from twospin_floquet.floquet_analytic import quasienergies
from twospin_floquet.model import ModelParams

# sign vectors of (b0, ..., b4) per letter, fixed once by evaluating the five
# sideband differences inside each scan-line segment
EXPECTED_TABLE = {
    "A": (-1, -1, -1, -1, -1),
    "B": (-1, -1, -1, 1, -1),
    "C": (1, -1, -1, 1, -1),
    "D": (1, 1, -1, 1, -1),
    "E": (1, -1, 1, 1, 1),
    "F": (1, -1, -1, 1, 1),
    "G": (1, 1, -1, 1, 1),
    "H": (1, 1, 1, 1, 1),
}


def test_anchor_table():
    assert {v: k for k, v in phases.anchor_table().items()} == EXPECTED_TABLE


@given(st.floats(0.01, math.pi / 2 - 0.01))
def test_b0_vanishes_on_unit_circle(theta):
    b = phases.boundary_values(math.cos(theta), math.sin(theta))
    assert abs(b.b0) < 1e-14


def test_scan_line_zeros():
    assert abs(phases.boundary_values(2 / 3, 0.5).b3) < 1e-15
    assert abs(phases.boundary_values(11 / 8, 1.2).b1) < 1e-15


@given(st.floats(0.05, 1.95))
def test_rational_forms_are_true_zeros(lam):
    for name in ("b1", "b2", "b3"):
        f = float(phases.rational_boundary(name, lam))
        if 0 < f <= 3:
            idx = phases.BOUNDARY_NAMES.index(name)
            assert abs(phases.boundary_values(lam, f)[idx]) < 1e-12


@pytest.mark.parametrize("lam,f,letter", [(0.5, 0.5, "A"), (1.0, 0.5, "C"), (1.0, 1.2, "F")])
def test_classify_reference_points(lam, f, letter):
    assert str(phases.classify(lam, f)) == letter


def test_classify_on_and_between_boundaries():
    label = phases.classify(math.sqrt(3) / 2, 0.5)
    assert label.kind == "boundary" and label.boundaries == ("b0",) and not label.is_phase
    assert str(label) == "boundary:b0"
    # the b1 curve meets the line f = 1 at lam = 4/3
    label = phases.classify(4 / 3, 1.0)
    assert label.kind == "ambiguous" and label.boundaries == ("b1", "b4")
    assert str(label) == "ambiguous:b1+b4"
    # b1 meets b2 at lam = sqrt(2); locate it independently
    lam_x = brentq(lambda x: float(phases.rational_boundary("b1", x) - phases.rational_boundary("b2", x)), 1.2, 1.6)
    assert lam_x == pytest.approx(math.sqrt(2), abs=1e-12)
    label = phases.classify(lam_x, float(phases.rational_boundary("b2", lam_x)))
    assert label.boundaries == ("b1", "b2")


def test_classify_warns_beyond_sixth_difference_zero():
    assert phases.sixth_difference(3.0, 3.0) < 0
    assert phases.sixth_difference(3.6, 3.6) > 0
    with pytest.warns(UserWarning):
        phases.classify(3.6, 3.6)


@pytest.mark.parametrize("f,which,bracket,expected", [
    (0.5, "b0", (0.5, 1.5), math.sqrt(3) / 2),
    (0.5, "b1", (1.0, 1.5), 6 / 5),
    (1.2, "b2", (0.2, 1.0), 0.5),
    (0.5, "b3", (0.5, 0.8), 2 / 3),
    (1.2, "b1", (1.2, 1.5), 11 / 8),
])
def test_find_boundary(f, which, bracket, expected):
    assert phases.find_boundary(f, which, bracket) == pytest.approx(expected, abs=1e-9)


def test_find_boundary_without_sign_change():
    with pytest.raises(phases.BracketError):
        phases.find_boundary(0.5, "b0", (0.1, 0.2))


def test_locate_boundaries_on_scan_lines():
    found = {w: phases.locate_boundaries(0.5, w) for w in phases.BOUNDARY_NAMES}
    assert found["b2"] == [] and found["b4"] == []
    assert np.allclose(found["b3"] + found["b0"] + found["b1"], [2 / 3, math.sqrt(3) / 2, 6 / 5], atol=1e-9)


def test_scan_at_low_drive_has_four_segments():
    rows = phases.ness_scan(0.5, (0.1, 1.6), 151, threads=2)
    segs = phases.segments(rows)
    assert [s[0] for s in segs] == ["A", "B", "C", "D"]
    for row in rows:
        if row.phase.kind == "A":
            assert np.allclose(row.p, 0.25, atol=1e-12)
    # boundary rows are labelled and never raise
    assert all(r.error is None or r.p is None for r in rows)


def test_scan_at_strong_drive_has_three_segments():
    segs = phases.segments(phases.ness_scan(1.2, (0.1, 1.8), 120))
    assert [s[0] for s in segs] == ["E", "F", "G"]


def test_scan_records_failure_on_boundary_point():
    rows = phases.ness_scan(0.5, (1.1, 1.3), 3, threads=1)
    mid = rows[1]
    assert mid.p is None and "OnBoundaryError" in mid.error
    assert rows[0].p is not None and rows[2].p is not None


def test_hot_bath_equalizes():
    rows = phases.ness_scan(0.5, (0.1, 1.6), 31, beta_bath=1e-3)
    for row in rows:
        if row.p is not None:
            assert np.max(np.abs(row.p - 0.25)) < 1e-3


def test_scan_output_independent_of_threads():
    a = phases.ness_scan(0.5, (0.2, 1.5), 40, threads=1)
    b = phases.ness_scan(0.5, (0.2, 1.5), 40, threads=4)
    for ra, rb in zip(a, b):
        assert ra.lam == rb.lam and str(ra.phase) == str(rb.phase)
        assert (ra.p is None and rb.p is None) or np.array_equal(ra.p, rb.p)


def test_boundary_behavior_circle_crossing():
    rep = phases.boundary_behavior(0.5, "b0")
    assert rep.lam_star == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    assert (rep.phase_minus, rep.phase_plus) == ("B", "C")
    for gaps in (rep.pair_gap_minus, rep.pair_gap_plus, rep.continuity):
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert rep.continuity[-1] < 1e-4
    assert min(rep.slope_gap) > 1e-3
    assert rep.kink_change < 0.1
    assert rep.designated_pair == (1, 3)


def test_boundary_behavior_phase_a_edge():
    rep = phases.boundary_behavior(0.5, "b3")
    assert rep.phase_minus == "A"
    assert rep.all_coincide_minus and not rep.all_coincide_plus


def test_boundary_behavior_strong_drive_pair():
    rep = phases.boundary_behavior(1.2, "b2")
    assert rep.exactly_two
    assert rep.identified_pair == phases.BOUNDARY_PAIRS["b2"]


def test_boundary_behavior_needs_unique_root():
    with pytest.raises(phases.BracketError):
        phases.boundary_behavior(1.2, "b0")
    with pytest.raises(ValueError):
        phases.boundary_behavior(0.5, "b0", offsets=(1e-3, 1e-2))


def test_one_sided_slopes_smooth_negative_control():
    # Boltzmann occupations with smoothly varying energies: no kink
    def p_at(x):
        e = np.array([0.0, x, 2 * x + 0.3])
        w = np.exp(-e)
        return w / w.sum()

    for d in (1e-2, 1e-3):
        left, right = phases.one_sided_slopes(p_at, 0.7, d)
        assert np.max(np.abs(right - left)) < 1e-4


def test_one_sided_slopes_detect_kink():
    left, right = phases.one_sided_slopes(lambda x: np.array([abs(x), 2 * x]), 0.0, 1e-3)
    assert np.allclose(left, [-1, 2]) and np.allclose(right, [1, 2])


def test_quasitemperature_spread():
    eps = np.array([-0.3, 0.1, 0.25, 0.4])
    boltz = np.exp(-2 * eps) / np.exp(-2 * eps).sum()
    vals, spread = phases.quasitemperature_spread(boltz, eps)
    assert np.allclose(vals, 2.0) and spread < 1e-12
    p = two_spin_ness(ModelParams(lam=1.0, f=0.5)).p
    assert phases.quasitemperature_spread(p, quasienergies(ModelParams(lam=1.0, f=0.5)))[1] > 1e-3


def test_coarse_diagram_has_eight_letters():
    diag = phases.phase_diagram(resolution=50)
    assert diag.letters() == set("ABCDEFGH")
    assert diag.labels.shape == (50, 50)
    assert diag.lams[0] > 0 and diag.lams[-1] == 3.0


def test_diagram_small_parameters_are_phase_a():
    diag = phases.phase_diagram((0.0, 0.5), (0.0, 0.4), resolution=10)
    assert set(np.unique(diag.labels)) == {"A"}


def test_boundary_curves_are_zero_sets():
    curves = phases.boundary_curves((0.0, 3.0), (0.0, 3.0))
    lam, f = curves["b0"]
    assert np.allclose(lam**2 + f**2, 1.0)
    for name in phases.BOUNDARY_NAMES:
        idx = phases.BOUNDARY_NAMES.index(name)
        lam, f = curves[name]
        assert len(lam) > 10
        assert max(abs(phases.boundary_values(a, b)[idx]) for a, b in zip(lam, f)) < 1e-9


def test_boundary_cells_lie_next_to_curves():
    diag = phases.phase_diagram(resolution=60, tol=0.02)
    for i, f in enumerate(diag.fs):
        for j, lam in enumerate(diag.lams):
            label = diag.labels[i, j]
            if label.startswith("boundary:"):
                name = label.split(":")[1]
                idx = phases.BOUNDARY_NAMES.index(name)
                assert abs(phases.boundary_values(lam, f)[idx]) < 0.02

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twospin_floquet import work
from twospin_floquet.floquet_numeric import integrate_propagator, two_spin_system
from twospin_floquet.model import PERIOD, ModelParams, static_spectrum

pos = st.floats(0.05, 3.0)
betas = st.floats(0.0, 5.0)


def joint_oracle(params):
    """Joint outcome probabilities from integrated dynamics and projector traces."""
    u = integrate_propagator(two_spin_system(params), PERIOD, tol=1e-12).final
    spectrum = static_spectrum(params)
    w = np.exp(-params.beta_init * spectrum.energies)
    w /= w.sum()
    joint = np.empty((4, 4))
    for i, pi in enumerate(spectrum.projectors):
        for j, pj in enumerate(spectrum.projectors):
            joint[i, j] = w[i] * np.trace(pj @ u @ pi @ u.conj().T).real
    return joint


@pytest.mark.parametrize("lam,f,beta", [(1.0, 0.5, 1.0), (2.2, 1.7, 0.3), (0.4, 2.9, 3.0)])
def test_joint_matches_integrated_oracle(lam, f, beta):
    p = ModelParams(lam=lam, f=f, beta_init=beta)
    assert np.max(np.abs(work.work_distribution(p).joint - joint_oracle(p))) < 1e-9


def test_closed_form_label_permutation_is_unique():
    assert work.closed_form_label_permutation() == (1, 2, 3, 0)
    x = np.arange(16.0).reshape(4, 4)
    assert np.array_equal(work.from_closed_form_labels(work.to_closed_form_labels(x)), x)


def test_conditionals_match_closed_form_at_reference_point():
    p = ModelParams(lam=1.0, f=0.5, beta_init=1.0)
    cond = work.to_closed_form_labels(work.work_distribution(p).conditional)
    assert np.max(np.abs(cond - work.conditional_closed_form(p))) < 1e-10
    assert np.allclose(work.conditional_closed_form(p, "projector"), work.work_distribution(p).conditional,
                       atol=1e-10)
    with pytest.raises(ValueError):
        work.conditional_closed_form(p, "bogus")


@given(pos, pos)
def test_closed_form_conditionals_doubly_stochastic(lam, f):
    m = work.conditional_closed_form(ModelParams(lam=lam, f=f))
    assert m[1, 2] == 0.0 and m[2, 1] == 0.0
    assert np.max(np.abs(m - m.T)) < 1e-12
    assert np.max(np.abs(m.sum(axis=0) - 1)) < 1e-12
    assert np.max(np.abs(m.sum(axis=1) - 1)) < 1e-12
    assert m.min() > -1e-12


def test_weak_coupling_conditional_limit():
    m = work.conditional_closed_form(ModelParams(lam=1e-9, f=0.5))
    assert m[0, 1] == pytest.approx(0.5, abs=1e-8)


def test_marginals_closed_form():
    p = ModelParams(lam=0.7, f=1.1, beta_init=2.0)
    marg = work.to_closed_form_labels(work.work_distribution(p).marginals)
    assert np.allclose(marg, work.marginals_closed_form(p), atol=1e-14)


def test_no_drive_means_no_work():
    dist = work.work_distribution(ModelParams(lam=1.3, f=0.0, beta_init=0.8))
    values, probs = dist.support()
    nonzero = np.abs(values) > 1e-12
    assert probs[nonzero].sum() < 1e-12
    assert dist.mean() == pytest.approx(0.0, abs=1e-14)
    assert work.jarzynski_moment(dist) == pytest.approx(1.0, abs=1e-15)


def test_infinite_temperature():
    p = ModelParams(lam=0.9, f=1.4, beta_init=0.0)
    dist = work.work_distribution(p)
    assert np.allclose(dist.marginals, 0.25, atol=1e-15)
    assert abs(dist.mean()) < 1e-14
    assert abs(work.mean_work_closed_form(p)) < 1e-14


@given(pos, pos, betas)
def test_jarzynski_and_second_law(lam, f, beta):
    p = ModelParams(lam=lam, f=f, beta_init=beta)
    dist = work.work_distribution(p)
    assert abs(dist.joint.sum() - 1) < 1e-13
    assert abs(work.jarzynski_moment(dist) - 1) < 1e-10
    assert dist.mean() >= -1e-12


@pytest.mark.parametrize("lam,f,beta", [(1.0, 1.0, 1.0), (2.0, 0.5, 5.0)])
def test_jarzynski_reference_points(lam, f, beta):
    dist = work.work_distribution(ModelParams(lam=lam, f=f, beta_init=beta))
    assert work.jarzynski_moment(dist) == pytest.approx(1.0, abs=1e-10)


@given(pos, pos, betas)
def test_mean_work_closed_form(lam, f, beta):
    p = ModelParams(lam=lam, f=f, beta_init=beta)
    assert work.mean_work_closed_form(p) == pytest.approx(work.mean_work(p), abs=1e-10)


def test_high_precision_mean_work_agrees_with_double():
    p = ModelParams(lam=1.7, f=1.7, beta_init=3.0)
    assert float(work.mean_work_closed_form(p, dps=50)) == pytest.approx(work.mean_work(p), abs=1e-12)


def test_support_aggregates_ties():
    dist = work.work_distribution(ModelParams(lam=1.0, f=0.8))
    values, probs = dist.support()
    assert np.all(np.diff(values) > 1e-12)
    assert probs.sum() == pytest.approx(1.0, abs=1e-14)


def test_excitation_probability():
    p = ModelParams(lam=2.0, f=2.0)
    assert work.excitation_probability(p, 0.0) == pytest.approx(0.0, abs=1e-15)
    t_peak = np.pi * np.sqrt(2) / 4
    assert work.excitation_probability(p, t_peak) == pytest.approx(0.25, abs=1e-12)
    ts = np.linspace(0, PERIOD, 256)
    dev = max(abs(work.excitation_probability(p, t) - 0.25 * np.sin(2 * t / np.sqrt(2)) ** 2) for t in ts)
    assert dev < 1e-10


def test_excitation_probability_errors():
    with pytest.raises(ValueError):
        work.excitation_probability(ModelParams(lam=2.0, f=2.0), -1.0)
    with pytest.raises(ValueError):
        work.excitation_probability(ModelParams(lam=1.0, f=2.0), 1.0)


def test_asymptote_function():
    assert work.mean_work_asymptote(0.0) == 0.0
    f = 1 / (2 * np.sqrt(2))
    assert work.mean_work_asymptote(f) == pytest.approx(0.5 * f)


@given(pos, pos)
def test_conditionals_independent_of_initial_temperature(lam, f):
    a = work.work_distribution(ModelParams(lam=lam, f=f, beta_init=0.1)).conditional
    b = work.work_distribution(ModelParams(lam=lam, f=f, beta_init=5.0)).conditional
    assert np.max(np.abs(a - b)) < 1e-12

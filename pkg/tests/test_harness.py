import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from online_rkhs import (
    FitError,
    NoiseModel,
    ParameterError,
    Schedule,
    cons_oracle_curve,
    draw_sample,
    eval_feature_adjoint,
    fit_rate,
    geometric_checkpoints,
    make_bridge_problem,
    make_cons_problem,
    monte_carlo_error,
    noise_variance,
    refined_bound_s1,
    smoothness_norm,
    theorem1_bound,
    theorem1_constant,
    theorem1_constant_from_norms,
)
from online_rkhs.harness import WORKERS_ENV, finite_horizon_bound, refined_bound

from test_engine import single_atom


# problem construction ---------------------------------------------------------
@pytest.mark.parametrize("s", [0.5, 1.0])
def test_cons_problem_normalized(s):
    prob = make_cons_problem(2.0, 500, s)
    assert smoothness_norm(prob.eig, prob.target, s) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(prob.eig.lambdas, prob.weights)
    assert prob.weights.sum() == pytest.approx(1.0, abs=1e-14)


def test_cons_problem_rejects_slow_decay():
    with pytest.raises(ParameterError):
        make_cons_problem(1.0, 10, 1.0)


def test_bridge_problem():
    prob = make_bridge_problem(2000, 1.0)
    assert abs(prob.eig.lambdas[0] - np.pi ** -2) <= 0.01 * np.pi ** -2
    assert smoothness_norm(prob.eig, prob.target, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_bridge_vector_lambda():
    T = [[2.0, 1.0], [1.0, 2.0]]
    prob = make_bridge_problem(120, 1.0, d=2, T=T)
    assert prob.Lambda == pytest.approx(0.25 * 3.0, rel=1e-14)
    with pytest.raises(ParameterError):
        make_bridge_problem(120, 1.0, d=2, T=[[1.0, 2.0], [2.0, 1.0]])


def test_bridge_identity_reduces_to_scalar():
    scalar = make_bridge_problem(120, 1.0)
    vector = make_bridge_problem(120, 1.0, d=1, T=[[1.0]])
    np.testing.assert_allclose(vector.eig.lambdas, scalar.eig.lambdas, rtol=1e-14)
    for w in (0.1, 0.45, 0.8):
        assert vector.fmap.kernel(w, 0.3)[0, 0] == scalar.fmap.kernel(w, 0.3)[0, 0]


# sampling ---------------------------------------------------------------------
def test_noiseless_sample_is_exact():
    prob = make_cons_problem(2.0, 30, 1.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        w, y = draw_sample(prob, rng)
        assert y[0] == eval_feature_adjoint(prob.fmap, w, prob.target)[0]


def test_noiseless_bridge_sample_is_exact():
    prob = make_bridge_problem(150, 1.0, d=2, T=[[1.0, 0.2], [0.2, 0.7]])
    rng = np.random.default_rng(1)
    for _ in range(10):
        w, y = draw_sample(prob, rng)
        np.testing.assert_allclose(y, eval_feature_adjoint(prob.fmap, w, prob.target),
                                   atol=1e-14)


def test_index_frequencies():
    prob = make_cons_problem(2.0, 200, 1.0)
    n = 10 ** 5
    omegas = prob.draw_omegas(np.random.default_rng(2), n)
    freq = np.bincount(omegas, minlength=201)[1:] / n
    rho = prob.weights
    for i in range(10):
        assert abs(freq[i] - rho[i]) <= 3 * np.sqrt(rho[i] * (1 - rho[i]) / n)


@pytest.mark.parametrize("noise", [NoiseModel("gaussian", 0.7), NoiseModel("uniform", 1.3)])
def test_noise_mean_and_variance(noise):
    n = 10 ** 5
    eps = noise.sample(np.random.default_rng(3), n, 1)[:, 0]
    sd = np.sqrt(noise.variance)
    assert abs(eps.mean()) <= 3 * sd / np.sqrt(n)
    assert eps.var() == pytest.approx(noise.variance, rel=0.02)


def test_noise_variance_examples():
    assert noise_variance(make_cons_problem(2.0, 10, 1.0)) == 0.0
    assert noise_variance(make_cons_problem(2.0, 10, 1.0, sigma=0.5)) == 0.25
    prob = make_bridge_problem(100, 1.0, d=2, noise=NoiseModel("uniform", 1.0))
    assert noise_variance(prob) == pytest.approx(2 / 3, rel=1e-15)
    with pytest.raises(ParameterError):
        NoiseModel("laplace", 1.0)


# constants and bounds ---------------------------------------------------------
def test_theorem1_constant_example():
    assert theorem1_constant_from_norms(1.0, 1.0, 2.0, 1.0, 1.0, 0.25) == 20.25
    assert theorem1_constant_from_norms(0.0, 0.0, 0.0, 1.0, 1.0, 0.0) == 0.0


def test_theorem1_constant_from_problem():
    prob = make_cons_problem(2.0, 50, 1.0, sigma=0.5)
    u2 = float(np.sum(prob.target.coeffs ** 2))
    expected = 2 * u2 + 2 * u2 + 8 * 1.0 + 0.25
    assert theorem1_constant(prob, None, 1.0) == pytest.approx(expected, rel=1e-14)
    assert theorem1_constant(prob, prob.target.coeffs, 1.0) == pytest.approx(expected - 2 * u2,
                                                                             rel=1e-14)
    with pytest.raises(ParameterError):
        theorem1_constant(prob, None, 1.5)


pos = st.floats(0.0, 10.0)


@settings(max_examples=100, deadline=None)
@given(pos, pos, pos, pos, st.floats(0.0, 5.0), st.sampled_from([0, 1, 2, 3]))
def test_theorem1_constant_monotone(e0, u, us, sig, bump, which):
    args = [e0, u, us, sig]
    base = theorem1_constant_from_norms(args[0], args[1], args[2], 0.5, 0.7, args[3])
    args[which] += bump
    assert theorem1_constant_from_norms(args[0], args[1], args[2], 0.5, 0.7, args[3]) >= base


def test_theorem1_bound_examples():
    assert theorem1_bound(20.25, 1.0, 7) == pytest.approx(10.125, rel=1e-15)
    assert theorem1_bound(20.25, 1.0, 10 ** 15) < 1e-3
    with pytest.raises(ParameterError):
        theorem1_bound(1.0, 1.0, 0)


def test_refined_bound_termwise():
    e0, u, u1, lam, sig, m = 0.4, 0.3, 1.0, 1.0, 0.09, 99
    expected = e0 / 100 ** 2 + u / 100 + (2 * lam * u1 + sig / (2 * lam)) / 100 ** (1 / 3)
    assert refined_bound_s1(e0, u, u1, lam, sig, m) == pytest.approx(expected, rel=1e-14)
    assert refined_bound(e0, u, u1, lam, sig, 2 / 3, 0.5, m) == pytest.approx(expected,
                                                                               rel=1e-14)


def test_finite_horizon_bound_termwise():
    e0, u, u1, lam, sig, N = 0.4, 0.3, 1.0, 1.0, 0.09, 999
    mu = (2 * lam) ** -1 * (N + 1) ** (-2 / 3)
    expected = e0 / (N + 1) ** 2 + 2 * lam * sig * mu ** 2 * (N + 1) + (u + u1 / mu) / (N + 1)
    assert finite_horizon_bound(e0, u, u1, lam, sig, mu, N) == pytest.approx(expected,
                                                                              rel=1e-14)


# Monte Carlo ------------------------------------------------------------------
def test_stderr_zero_for_deterministic_dynamics():
    res = monte_carlo_error(single_atom(), Schedule(), 50, 2)
    assert all(se == 0.0 for _, _, se in res.records)


def test_monte_carlo_deterministic_and_worker_independent(monkeypatch):
    prob = make_cons_problem(2.0, 30, 1.0, sigma=0.5)
    a = monte_carlo_error(prob, Schedule(), 200, 9, base_seed=4)
    monkeypatch.setenv(WORKERS_ENV, "3")
    b = monte_carlo_error(prob, Schedule(), 200, 9, base_seed=4)
    assert a.records == b.records


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_monte_carlo_flags_nonfinite():
    prob = make_cons_problem(2.0, 20, 1.0, sigma=1e200)
    res = monte_carlo_error(prob, Schedule(), 50, 3)
    assert res.flagged == [0, 1, 2]
    assert all(np.isnan(mean) for _, mean, _ in res.records[1:])


def test_monte_carlo_needs_two_trials():
    with pytest.raises(ParameterError):
        monte_carlo_error(single_atom(), Schedule(), 5, 1)


def test_monte_carlo_matches_oracle_small():
    prob = make_cons_problem(2.0, 20, 1.0, sigma=0.5)
    cps = geometric_checkpoints(300)
    res = monte_carlo_error(prob, Schedule(), 300, 600, checkpoints=cps)
    oracle = dict(cons_oracle_curve(prob.cons_spec(), Schedule(), cps))
    for m, mean, se in res.records:
        assert abs(mean - oracle[m]) <= 4 * se + 1e-12


def test_stderr_halves_with_quadrupled_trials():
    prob = make_cons_problem(2.0, 20, 1.0, sigma=0.5)
    small = monte_carlo_error(prob, Schedule(), 200, 400, checkpoints=[200])
    big = monte_carlo_error(prob, Schedule(), 200, 1600, base_seed=400, checkpoints=[200])
    ratio = big.records[0][2] / small.records[0][2]
    assert abs(ratio - 0.5) <= 0.3 * 0.5


def test_stderr_scales_with_doubled_trials():
    prob = make_cons_problem(2.0, 20, 1.0, sigma=0.5)
    small = monte_carlo_error(prob, Schedule(), 200, 500, checkpoints=[200])
    big = monte_carlo_error(prob, Schedule(), 200, 1000, base_seed=500, checkpoints=[200])
    ratio = big.records[0][2] / small.records[0][2]
    assert abs(ratio - 2 ** -0.5) <= 0.3 * 2 ** -0.5


# rate fitting -----------------------------------------------------------------
def test_fit_rate_exact_power_law():
    recs = [(m, (m + 1.0) ** (-1 / 3)) for m in (10, 100, 1000, 10_000, 100_000)]
    assert abs(fit_rate(recs, (10, 100_000)).slope + 1 / 3) <= 1e-12


def test_fit_rate_constant():
    recs = [(m, 2.5) for m in range(1, 50)]
    assert abs(fit_rate(recs, (1, 49)).slope) <= 1e-12


def test_fit_rate_errors():
    with pytest.raises(FitError):
        fit_rate([(1, 1.0), (2, 0.0), (3, 1.0), (4, 1.0)], (1, 4))
    with pytest.raises(FitError):
        fit_rate([(1, 1.0), (2, 1.0), (3, 1.0)], (1, 3))
    with pytest.raises(FitError):
        fit_rate([(1, 1.0)], (3, 1))

import dataclasses
import math

import numpy as np
import pytest

from mu2opt import estimator as est
from mu2opt import problems, schedules
from mu2opt.errors import DiagnosticUnavailable, NumericError
from mu2opt.problems import stoch_grad

LINEAR = schedules.linear_weights()
INV_ALPHA = schedules.inverse_alpha_momentum()


def _recording(problem):
    """Problem whose drawn tokens are also appended to a list."""
    tokens = []
    inner = problem.draw_fn

    def draw(rng):
        z = inner(rng)
        tokens.append(z)
        return z

    return dataclasses.replace(problem, draw_fn=draw), tokens


def test_init_noiseless_gives_exact_gradient():
    prob = problems.make_additive_quadratic(3, np.zeros(3), sigma=0.0)
    x1 = np.array([1.0, -1.0, 2.0])
    state = est.mu2_init(prob, x1, np.random.default_rng(0))
    assert np.array_equal(state.d, prob.exact_grad(x1))
    assert state.t == 1
    assert np.array_equal(state.x, x1)


def test_init_additive_linear_form():
    prob = problems.make_additive_quadratic(2, np.array([1.0, 0.0]), sigma=1.0)
    rec, tokens = _recording(prob)
    x1 = np.array([0.5, 0.5])
    state = est.mu2_init(rec, x1, np.random.default_rng(4))
    np.testing.assert_array_equal(state.d, (x1 - prob.optimum_point) + tokens[0])


def test_init_deterministic():
    prob = problems.make_additive_quadratic(3, np.zeros(3), sigma=1.0)
    x1 = np.ones(3)
    a = est.mu2_init(prob, x1, np.random.default_rng(77))
    b = est.mu2_init(prob, x1, np.random.default_rng(77))
    assert np.array_equal(a.d, b.d) and a.t == b.t


def test_advance_query_average_arithmetic():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=0.0)
    x1 = np.array([1.0, 0.0])
    w2 = np.array([0.0, 1.0])
    state = est.mu2_init(prob, x1, np.random.default_rng(0))
    est.mu2_advance(state, w2, prob, np.random.default_rng(0))
    np.testing.assert_allclose(state.x, (2 * x1 + 3 * w2) / 5.0, atol=1e-15)


def test_full_reset_when_beta_is_one():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=1.0)
    rec, tokens = _recording(prob)
    rng = np.random.default_rng(5)
    state = est.mu2_init(rec, np.ones(2), rng, LINEAR, schedules.fixed_momentum(1.0))
    est.mu2_advance(state, np.array([0.5, 0.5]), rec, rng)
    np.testing.assert_array_equal(state.d, stoch_grad(prob, state.x, tokens[-1]))


def test_noiseless_momentum_tracks_exact_gradient():
    prob = problems.make_curvature_quadratic(3, np.zeros(3), c=0.0)
    rng = np.random.default_rng(1)
    state = est.mu2_init(prob, np.array([1.0, 2.0, -1.0]), rng)
    w = np.array([1.0, 2.0, -1.0])
    for t in range(1, 60):
        w = w - 0.01 * state.d
        est.mu2_advance(state, w, prob, rng)
        assert np.linalg.norm(state.d - prob.exact_grad(state.x)) <= 1e-12


def test_additive_noise_per_path_identity():
    # With linear weights and inverse-weight momentum, unrolling
    # alpha_t eps_t = M_t + alpha_{t-1} eps_{t-1} on the additive-noise bowl
    # gives alpha_t eps_t = alpha_1 z_1 + sum_{tau=2..t} z_tau exactly
    # (the first token carries its weight alpha_1 = 2).
    prob = problems.make_additive_quadratic(3, np.zeros(3), sigma=1.0)
    rec, tokens = _recording(prob)
    rng = np.random.default_rng(17)
    state = est.mu2_init(rec, np.ones(3), rng, LINEAR, INV_ALPHA)
    w = np.ones(3)
    for t in range(1, 300):
        w = w - 0.001 * schedules.alpha(LINEAR, t) * state.d
        est.mu2_advance(state, w, rec, rng)
        eps = state.d - prob.exact_grad(state.x)
        scaled = schedules.alpha(LINEAR, state.t) * eps
        expected = 2.0 * tokens[0] + np.sum(tokens[1:], axis=0)
        assert np.linalg.norm(scaled - expected) <= 1e-10


def test_error_second_moment_monte_carlo():
    # mean ||eps_t||^2 = (t+3) * sigma^2 / (t+1)^2 for the additive-noise
    # bowl (exact second moment of the weighted token sum above)
    prob = problems.make_additive_quadratic(4, np.zeros(4), sigma=1.0)
    t_target = 100
    acc = 0.0
    n_seeds = 200
    for seed in range(n_seeds):
        rng = np.random.default_rng(1000 + seed)
        state = est.mu2_init(prob, np.ones(4), rng)
        w = np.ones(4)
        while state.t < t_target:
            w = w - 0.0005 * schedules.alpha(LINEAR, state.t) * state.d
            est.mu2_advance(state, w, prob, rng)
        acc += est.epsilon_sq(state, prob)
    expected = (t_target + 3) / (t_target + 1) ** 2
    assert acc / n_seeds == pytest.approx(expected, rel=0.10)


def test_recursion_invariant_per_path():
    # alpha_t eps_t - alpha_{t-1} eps_{t-1} = alpha_{t-1} Z_t + (g_t - gbar_t)
    prob = problems.make_curvature_quadratic(3, np.zeros(3), c=0.9)
    rec, tokens = _recording(prob)
    rng = np.random.default_rng(23)
    state = est.mu2_init(rec, np.ones(3), rng, LINEAR, INV_ALPHA)
    w = np.ones(3)
    for _ in range(1, 200):
        x_prev = state.x.copy()
        eps_prev = state.d - prob.exact_grad(x_prev)
        a_prev = schedules.alpha(LINEAR, state.t)
        w = w - 0.002 * a_prev * state.d
        est.mu2_advance(state, w, rec, rng)
        z = tokens[-1]
        g = stoch_grad(prob, state.x, z)
        g_tilde = stoch_grad(prob, x_prev, z)
        noise_now = g - prob.exact_grad(state.x)
        noise_prev = g_tilde - prob.exact_grad(x_prev)
        lhs = schedules.alpha(LINEAR, state.t) * (state.d - prob.exact_grad(state.x)) \
            - a_prev * eps_prev
        rhs = a_prev * (noise_now - noise_prev) + noise_now
        assert np.linalg.norm(lhs - rhs) <= 1e-9


def test_query_point_stays_in_convex_hull():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=1.0)
    rng = np.random.default_rng(2)
    state = est.mu2_init(prob, np.array([1.0, 0.0]), rng)
    for _ in range(50):
        w = rng.uniform(-1, 1, size=2)
        w = w / max(1.0, np.linalg.norm(w))  # keep on the unit ball
        est.mu2_advance(state, w, prob, rng)
        assert np.linalg.norm(state.x) <= 1.0 + 1e-12


def test_batched_advance_token_counts():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=1.0)
    rec, tokens = _recording(prob)
    rng = np.random.default_rng(3)
    state = est.mu2_init(rec, np.ones(2), rng, batch=100)
    assert state.samples_used == 100
    before = len(tokens)
    est.mu2_advance_batched(state, np.zeros(2), rec, rng, T_total=100)
    assert len(tokens) - before == 50  # ceil(100 / 2)
    assert state.samples_used == 150


def test_batched_cumulative_sample_bound():
    T = 100
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=1.0)
    rng = np.random.default_rng(6)
    state = est.mu2_init(prob, np.ones(2), rng, batch=T)
    w = np.ones(2)
    for t in range(1, T):
        w = 0.99 * w
        est.mu2_advance_batched(state, w, prob, rng, T_total=T)
    assert state.samples_used <= T * (1 + math.log(T)) + T


def test_batched_batch_of_one_matches_plain():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=1.0)
    s1 = est.mu2_init(prob, np.ones(2), np.random.default_rng(9))
    s2 = est.mu2_init(prob, np.ones(2), np.random.default_rng(9))
    r1 = np.random.default_rng(10)
    r2 = np.random.default_rng(10)
    est.mu2_advance(s1, np.zeros(2), prob, r1)
    est.mu2_advance_batched(s2, np.zeros(2), prob, r2, T_total=s2.t + 1)
    assert np.array_equal(s1.d, s2.d) and np.array_equal(s1.x, s2.x)


def test_storm_beta_one_is_fresh_gradient():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=1.0)
    rec, tokens = _recording(prob)
    rng = np.random.default_rng(8)
    state = est.storm_init(rec, np.ones(2), rng, LINEAR, schedules.fixed_momentum(1.0))
    w2 = np.array([0.5, 0.0])
    est.storm_update(state, w2, rec, rng)
    np.testing.assert_array_equal(state.d, stoch_grad(prob, w2, tokens[-1]))


def test_storm_noiseless_exact():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=0.0)
    rng = np.random.default_rng(0)
    state = est.storm_init(prob, np.ones(2), rng)
    w = np.ones(2)
    for _ in range(40):
        w = w - 0.1 * state.d
        est.storm_update(state, w, prob, rng)
        assert np.linalg.norm(state.d - prob.exact_grad(state.w)) <= 1e-12


def test_storm_constant_iterates_variance_reduction():
    # holding w fixed, the corrected momentum averages gradients at w, so its
    # variance falls below a single stochastic gradient's
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=1.0)
    w = np.array([1.0, 0.0])
    g_bar = prob.exact_grad(w)
    T = 30
    var_d = 0.0
    var_single = 0.0
    n_seeds = 1000
    for seed in range(n_seeds):
        rng = np.random.default_rng(5000 + seed)
        state = est.storm_init(prob, w, rng, LINEAR, schedules.inverse_t_momentum())
        for _ in range(T - 1):
            est.storm_update(state, w, prob, rng)
        var_d += float(np.dot(state.d - g_bar, state.d - g_bar))
        g = stoch_grad(prob, w, prob.draw_fn(np.random.default_rng(9000 + seed)))
        var_single += float(np.dot(g - g_bar, g - g_bar))
    assert var_d / n_seeds < 0.5 * (var_single / n_seeds)


def test_epsilon_sq_requires_exact_gradient():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=0.0)
    state = est.mu2_init(prob, np.ones(2), np.random.default_rng(0))
    blind = dataclasses.replace(prob, exact_grad=None)
    with pytest.raises(DiagnosticUnavailable):
        est.epsilon_sq(state, blind)
    assert est.epsilon_sq(state, prob) <= 1e-20


def test_non_finite_iterate_rejected():
    prob = problems.make_additive_quadratic(2, np.zeros(2), sigma=0.0)
    rng = np.random.default_rng(0)
    state = est.mu2_init(prob, np.ones(2), rng)
    with pytest.raises(NumericError):
        est.mu2_advance(state, np.array([np.nan, 0.0]), prob, rng)

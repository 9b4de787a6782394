import numpy as np
import pytest
from helpers import cycle_env, delta, exact_q_v, forgetful_env, forward_occupancy, tiny_env

from cmfc.envmodel import EnvConstants, EnvironmentSpec, firms_env
from cmfc.meanfield import mf_values
from cmfc.policy import FixedActionPolicy, SoftmaxPolicy, UniformPolicy
from cmfc.rng import derive_rng
from cmfc.sampler import (MFPathCache, estimate_advantage, estimate_constraint_value,
                          sample_occupancy)
from cmfc.simplex import StateDistribution


def test_gamma_zero_stops_immediately():
    env = tiny_env()
    rng = derive_rng(0, "occ")
    mu0 = StateDistribution([0.6, 0.4])
    pol = UniformPolicy(2, 2)
    for _ in range(20):
        s = sample_occupancy(mu0, pol, env, gamma=0.0, rng=rng)
        assert s.t == 0
        assert np.array_equal(s.mu.probs, mu0.probs)


def test_stopping_time_geometric():
    env = tiny_env()
    rng = derive_rng(1, "occ")
    gamma = 0.7
    mu0 = StateDistribution([0.5, 0.5])
    pol = UniformPolicy(2, 2)
    cache = MFPathCache(mu0, pol, env)
    ts = np.array([sample_occupancy(mu0, pol, env, gamma, rng, cache=cache).t
                   for _ in range(100_000)])
    target = gamma / (1 - gamma)
    se = ts.std(ddof=1) / np.sqrt(ts.size)
    assert abs(ts.mean() - target) <= 3 * se


def test_single_state_action_frequency():
    env = EnvironmentSpec(
        n_states=1, n_actions=3,
        reward=lambda x, u, mu, nu: 0.0,
        cost=lambda x, u, mu, nu: 0.0,
        transition=lambda x, u, mu, nu: delta(0, 1),
        constants=EnvConstants(m_r=0.0, m_c=0.0, l_r=0.0, l_c=0.0, l_p=0.0))
    rng = derive_rng(2, "occ")
    phi = rng.normal(0, 1, size=(1, 3, 2))
    pol = SoftmaxPolicy(phi)
    mu0 = StateDistribution([1.0])
    target = pol.action_probs(0, mu0)
    counts = np.zeros(3)
    cache = MFPathCache(mu0, pol, env)
    for _ in range(100_000):
        counts[sample_occupancy(mu0, pol, env, 0.8, rng, cache=cache).u] += 1
    assert np.abs(counts / counts.sum() - target).sum() < 0.02


def test_cycle_return_probability():
    # Deterministic two-state cycle: x_T = x_0 exactly on even stopping
    # times, so P(x_T = x_0) = (1-gamma)/(1-gamma^2) = 2/3 at gamma = 1/2.
    env = cycle_env()
    rng = derive_rng(3, "occ")
    mu0 = delta(0, 2)
    pol = UniformPolicy(2, 2)
    cache = MFPathCache(mu0, pol, env)
    hits = sum(sample_occupancy(mu0, pol, env, 0.5, rng, cache=cache).x == 0
               for _ in range(100_000))
    p = hits / 100_000
    se = np.sqrt(p * (1 - p) / 100_000)
    assert abs(p - 2 / 3) <= 4 * se


def test_occupancy_matches_forward_recursion():
    # Two reachable population distributions; compare (x, u) frequencies to
    # the exact discounted occupancy.
    env = forgetful_env()
    rng = derive_rng(4, "occ")
    mu0 = StateDistribution([0.85, 0.15])
    pol = SoftmaxPolicy(derive_rng(5, "occ-pol").normal(0, 1.2, size=(2, 2, 3)))
    exact = forward_occupancy(env, pol, mu0, gamma=0.6)
    counts = np.zeros((2, 2))
    cache = MFPathCache(mu0, pol, env)
    n = 100_000
    for _ in range(n):
        s = sample_occupancy(mu0, pol, env, 0.6, rng, cache=cache)
        counts[s.x, s.u] += 1
    tv = 0.5 * np.abs(counts / n - exact).sum()
    assert tv < 0.02


def test_sample_mu_matches_deterministic_iterate():
    env = tiny_env()
    rng = derive_rng(6, "occ")
    mu0 = StateDistribution([0.3, 0.7])
    pol = SoftmaxPolicy(derive_rng(7, "occ-pol").normal(0, 1, size=(2, 2, 3)))
    cache = MFPathCache(mu0, pol, env)
    for _ in range(50):
        s = sample_occupancy(mu0, pol, env, 0.9, rng, cache=cache)
        assert np.array_equal(s.mu.probs, cache.mu(s.t).probs)


def test_advantage_zero_for_constant_reward():
    env = EnvironmentSpec(
        n_states=2, n_actions=2,
        reward=lambda x, u, mu, nu: 0.7,
        cost=lambda x, u, mu, nu: 0.7,
        transition=lambda x, u, mu, nu: delta(1 - x, 2),
        constants=EnvConstants(m_r=0.7, m_c=0.7, l_r=0.0, l_c=0.0, l_p=0.0))
    rng = derive_rng(8, "adv")
    mu0 = StateDistribution([0.5, 0.5])
    pol = UniformPolicy(2, 2)
    cache = MFPathCache(mu0, pol, env)
    n = 100_000
    vals = np.empty(n)
    for i in range(n):
        s = sample_occupancy(mu0, pol, env, 0.5, rng, cache=cache)
        vals[i] = estimate_advantage(s, pol, env, lam=0.0, gamma=0.5, rng=rng,
                                     cache=cache).a_hat_r
    se = vals.std(ddof=1) / np.sqrt(n)
    assert abs(vals.mean()) <= 3 * se


def test_lambda_zero_passthrough_and_lambda_combination():
    env = tiny_env()
    rng = derive_rng(9, "adv")
    mu0 = StateDistribution([0.5, 0.5])
    pol = UniformPolicy(2, 2)
    s = sample_occupancy(mu0, pol, env, 0.6, rng)
    est0 = estimate_advantage(s, pol, env, lam=0.0, gamma=0.6, rng=derive_rng(10, "a"))
    assert est0.a_hat_lambda == est0.a_hat_r
    est2 = estimate_advantage(s, pol, env, lam=2.0, gamma=0.6, rng=derive_rng(10, "a"))
    assert est2.a_hat_lambda == pytest.approx(est2.a_hat_r - 2.0 * est2.a_hat_c)


def test_advantage_unbiased_against_recursion_oracle():
    env = tiny_env()
    gamma = 0.5
    mu0 = StateDistribution([0.6, 0.4])
    pol = SoftmaxPolicy(derive_rng(11, "adv-pol").normal(0, 0.8, size=(2, 2, 3)))
    q_r, v_r, q_c, v_c = exact_q_v(env, pol, mu0, gamma)
    x_star, u_star = 0, 1
    exact_a_r = q_r[x_star, u_star] - v_r[x_star]
    exact_a_c = q_c[x_star, u_star] - v_c[x_star]
    rng = derive_rng(12, "adv")
    cache = MFPathCache(mu0, pol, env)
    cache.ensure(0)
    from cmfc.sampler import OccupancySample
    sample = OccupancySample(x=x_star, mu=mu0, u=u_star, t=0)
    n = 100_000
    rs = np.empty(n)
    cs = np.empty(n)
    for i in range(n):
        est = estimate_advantage(sample, pol, env, lam=0.0, gamma=gamma, rng=rng,
                                 cache=cache)
        rs[i], cs[i] = est.a_hat_r, est.a_hat_c
    for vals, target in ((rs, exact_a_r), (cs, exact_a_c)):
        se = vals.std(ddof=1) / np.sqrt(n)
        assert abs(vals.mean() - target) <= 3 * se, (vals.mean(), target, se)


def test_constraint_value_zero_cost():
    env = cycle_env()  # costs identically zero
    rng = derive_rng(13, "vc")
    assert estimate_constraint_value(delta(0, 2), UniformPolicy(2, 2), env, 0.9, rng) == 0.0


def test_constraint_value_firms_fixed_policies():
    env = firms_env()
    mu0 = StateDistribution(np.full(10, 0.1))
    rng = derive_rng(14, "vc")
    always = FixedActionPolicy(10, 2, 1)
    cache = MFPathCache(mu0, always, env)
    vals = np.array([estimate_constraint_value(mu0, always, env, 0.9, rng, cache=cache)
                     for _ in range(4000)])
    se = vals.std(ddof=1) / np.sqrt(vals.size)
    assert abs(vals.mean() - 10.0) <= 3 * se
    never = FixedActionPolicy(10, 2, 0)
    assert all(estimate_constraint_value(mu0, never, env, 0.9, rng) == 0.0
               for _ in range(10))


def test_constraint_value_matches_mf_values_random_policies():
    env = firms_env()
    mu0 = StateDistribution(np.full(10, 0.1))
    for k in range(5):
        pol = SoftmaxPolicy(derive_rng(k, "vc-pol").normal(0, 0.6, size=(10, 2, 11)))
        _, v_c, _ = mf_values(mu0, pol, env, 0.9)
        rng = derive_rng(k, "vc-est")
        cache = MFPathCache(mu0, pol, env)
        vals = np.array([estimate_constraint_value(mu0, pol, env, 0.9, rng, cache=cache)
                         for _ in range(4000)])
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - v_c) <= 3 * se, (k, vals.mean(), v_c, se)


def test_estimates_are_finite():
    env = tiny_env()
    rng = derive_rng(15, "fin")
    mu0 = StateDistribution([0.5, 0.5])
    pol = UniformPolicy(2, 2)
    cache = MFPathCache(mu0, pol, env)
    for _ in range(200):
        s = sample_occupancy(mu0, pol, env, 0.95, rng, cache=cache)
        est = estimate_advantage(s, pol, env, 0.5, 0.95, rng, cache=cache)
        assert np.isfinite([est.a_hat_r, est.a_hat_c, est.a_hat_lambda, est.v_hat_c]).all()

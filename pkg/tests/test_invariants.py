import numpy as np

from cmfc.bounds import BoundInputs, compute_bounds
from cmfc.envmodel import firms_env
from cmfc.invariants import (concentration_suite, random_softmax_policy,
                             sensitivity_suite)
from cmfc.meanfield import mf_values
from cmfc.nagent import estimate_values, sample_initial_joint_state
from cmfc.policy import SoftmaxPolicy, UniformPolicy
from cmfc.rng import derive_rng
from cmfc.simplex import StateDistribution


def test_sensitivity_ratios_within_bounds():
    env = firms_env()
    rng = derive_rng(0, "inv")
    policies = [UniformPolicy(10, 2)] + [random_softmax_policy(env, rng, 0.6)
                                         for _ in range(3)]
    checks = sensitivity_suite(env, policies, n_pairs=2000, rng=rng)
    assert {c.name for c in checks} == {"nu_mf", "p_mf", "r_mf", "c_mf"}
    for check in checks:
        assert check.ok, (check.name, check.max_ratio, check.bound)
        assert check.max_ratio > 0.0


def test_concentration_one_step_bounds():
    env = firms_env()
    rng = derive_rng(1, "inv")
    policy = random_softmax_policy(env, rng, 0.5)
    checks = concentration_suite(env, policy, n_values=(10, 100), n_steps=100, rng=rng)
    for check in checks:
        assert check.ok, (check.name, check.n_agents, check.mean_deviation, check.bound)


def test_concentration_shrinks_with_population():
    env = firms_env()
    rng = derive_rng(2, "inv")
    policy = random_softmax_policy(env, rng, 0.5)
    checks = concentration_suite(env, policy, n_values=(10, 1000), n_steps=60, rng=rng)
    by_name = {}
    for c in checks:
        by_name.setdefault(c.name, {})[c.n_agents] = c.mean_deviation
    for name, vals in by_name.items():
        assert vals[1000] < vals[10], name


def test_measured_value_gap_below_special_case_bound():
    # Contraction regime: small discount so gamma * s_p < 1 with the firms
    # transition constant; a policy without population-coupling keeps
    # l_q = 0.  The measured |V_N - V_inf| must sit under G_J0.
    env = firms_env()
    gamma = 0.05
    rng = derive_rng(3, "inv")
    phi = np.zeros((10, 2, 11))
    phi[:, :, 0] = rng.normal(0, 1.0, size=(10, 2))
    policy = SoftmaxPolicy(phi)
    assert policy.lipschitz_bound() == 0.0
    inputs = BoundInputs.from_env(env, gamma, 100, zeta0=-1.0, l_q=0.0)
    mu0 = StateDistribution(np.full(10, 0.1))
    v_r_inf, v_c_inf, _ = mf_values(mu0, policy, env, gamma)
    for n in (100, 1000):
        out = compute_bounds(BoundInputs(**{**inputs.__dict__, "n_agents": n}))
        assert out.contraction_ok
        for seed in range(25):
            cell = derive_rng(seed, "inv-gap", n)
            x0 = sample_initial_joint_state(mu0, n, cell)
            est = estimate_values(x0, policy, env, gamma, episodes=8, tol=1e-6, rng=cell)
            assert abs(est.v_r - v_r_inf) <= out.g_r0
            assert abs(est.v_c - v_c_inf) <= out.g_c0

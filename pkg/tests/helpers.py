"""Shared fixtures and independent oracles for the test suite.

The oracles here recompute quantities by direct recursion (never through
the samplers they are used to check): exact Q/V/advantage via backward
recursion along the deterministic population path, and exact occupancy by
forward propagation of the representative agent's law.
"""
import numpy as np

from cmfc.envmodel import EnvConstants, EnvironmentSpec
from cmfc.meanfield import nu_mf, p_mf
from cmfc.simplex import StateDistribution


def delta(i, n):
    p = np.zeros(n)
    p[i] = 1.0
    return StateDistribution(p)


def _tabular_env(rewards, costs, kernels, l_r=0.0, mu_reward_coeff=0.0):
    """Environment from constant (X, U) tables and (X, U, X) kernels, with an
    optional mu-mean term added to the reward."""
    rewards = np.asarray(rewards, dtype=np.float64)
    costs = np.asarray(costs, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    n_states, n_actions = rewards.shape

    def reward(x, u, mu, nu):
        return float(rewards[x, u] + mu_reward_coeff * mu.mean())

    def cost(x, u, mu, nu):
        return float(costs[x, u])

    def transition(x, u, mu, nu):
        return StateDistribution(kernels[x, u])

    def reward_grid(mu, nu):
        return rewards + mu_reward_coeff * mu.mean()

    def cost_grid(mu, nu):
        return costs.copy()

    def transition_grid(mu, nu):
        return kernels.copy()

    constants = EnvConstants(
        m_r=float(np.abs(rewards).max() + abs(mu_reward_coeff) * (n_states - 1)),
        m_c=float(np.abs(costs).max()),
        l_r=l_r, l_c=0.0, l_p=0.0)
    return EnvironmentSpec(n_states=n_states, n_actions=n_actions,
                           reward=reward, cost=cost, transition=transition,
                           constants=constants, reward_grid_fn=reward_grid,
                           cost_grid_fn=cost_grid, transition_grid_fn=transition_grid)


def tiny_env():
    """2-state 2-action environment with mu-dependent reward; kernels mix."""
    rewards = [[1.0, -0.5], [0.2, 0.8]]
    costs = [[0.0, 1.0], [0.5, 0.2]]
    kernels = [[[0.7, 0.3], [0.2, 0.8]],
               [[0.5, 0.5], [0.9, 0.1]]]
    # reward gains 0.3 * mean(mu); over two states the mean is 0.5-Lipschitz.
    return _tabular_env(rewards, costs, kernels, l_r=0.15, mu_reward_coeff=0.3)


def cycle_env():
    """Deterministic two-state cycle regardless of the action."""
    swap = [[[0.0, 1.0], [0.0, 1.0]],
            [[1.0, 0.0], [1.0, 0.0]]]
    return _tabular_env([[0.0, 0.0], [1.0, 1.0]], [[0.0, 0.0], [0.0, 0.0]], swap)


def forgetful_env():
    """Next state is uniform whatever happens: exactly two reachable
    population distributions from any non-uniform start."""
    unif = [[[0.5, 0.5], [0.5, 0.5]],
            [[0.5, 0.5], [0.5, 0.5]]]
    return _tabular_env([[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]], unif)


def mf_path(env, policy, mu0, horizon):
    """Population path (mus, pis, nus) for t = 0..horizon-1."""
    mus, pis, nus = [], [], []
    mu = mu0
    for _ in range(horizon):
        mus.append(mu)
        pis.append(policy.action_matrix(mu))
        nus.append(nu_mf(mu, policy))
        mu = p_mf(mu, policy, env)
    return mus, pis, nus


def exact_q_v(env, policy, mu0, gamma, tol=1e-10):
    """Backward-recursion oracle along the population path from mu0.

    Returns (q_r, v_r, q_c, v_c) at time 0: q_* have shape (X, U), v_* (X,).
    """
    scale = max(env.constants.m_r, env.constants.m_c) / (1 - gamma)
    horizon = max(1, int(np.ceil(np.log(tol / scale) / np.log(gamma))) if gamma > 0 else 1)
    mus, pis, nus = mf_path(env, policy, mu0, horizon)
    v_r = np.zeros(env.n_states)
    v_c = np.zeros(env.n_states)
    q_r = q_c = None
    for t in reversed(range(horizon)):
        kernel = env.transition_grid(mus[t], nus[t])
        q_r = env.reward_grid(mus[t], nus[t]) + gamma * kernel @ v_r
        q_c = env.cost_grid(mus[t], nus[t]) + gamma * kernel @ v_c
        v_r = (pis[t] * q_r).sum(axis=1)
        v_c = (pis[t] * q_c).sum(axis=1)
    return q_r, v_r, q_c, v_c


def forward_occupancy(env, policy, mu0, gamma, tol=1e-12):
    """Exact discounted occupancy over (x, u): propagate the agent's law
    q_t directly (q_0 = mu0; q_{t+1} from the kernel at the population path)
    and mix with weights (1 - gamma) gamma^t."""
    horizon = max(1, int(np.ceil(np.log(tol) / np.log(gamma))) if gamma > 0 else 1)
    mus, pis, nus = mf_path(env, policy, mu0, horizon)
    occ = np.zeros((env.n_states, env.n_actions))
    law = mu0.probs.copy()
    for t in range(horizon):
        joint = law[:, None] * pis[t]
        occ += (1 - gamma) * gamma ** t * joint
        kernel = env.transition_grid(mus[t], nus[t])
        law = np.einsum("xu,xuy->y", joint, kernel)
    return occ

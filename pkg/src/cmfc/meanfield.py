"""Deterministic infinite-population dynamics.

In the infinite-agent limit the population is summarized by the state
distribution mu_t, which evolves by an exact deterministic map: the action
distribution is the policy mixed over mu, and the next state distribution
aggregates the transition kernel over (state, action).  Value functions
are computed by forward recursion with an analytic truncation horizon.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import ceil, log

import numpy as np

from .envmodel import EnvironmentSpec
from .simplex import ActionDistribution, StateDistribution

MAX_HORIZON = 10_000_000


def nu_mf(mu: StateDistribution, policy) -> ActionDistribution:
    """Population action distribution: nu(u) = sum_x pi(x, mu)(u) mu(x)."""
    probs = policy.action_matrix(mu)
    return ActionDistribution._wrap(mu.probs @ probs)


def p_mf(mu: StateDistribution, policy, env: EnvironmentSpec) -> StateDistribution:
    """One-step state-distribution update under the mean-field dynamics."""
    nu = nu_mf(mu, policy)
    kernel = env.transition_grid(mu, nu)
    weights = policy.action_matrix(mu) * mu.probs[:, None]
    out = np.einsum("xuy,xu->y", kernel, weights)
    out = np.maximum(out, 0.0)
    return StateDistribution._wrap(out / out.sum())


def r_mf(mu: StateDistribution, policy, env: EnvironmentSpec) -> float:
    """Per-step population-average reward."""
    nu = nu_mf(mu, policy)
    weights = policy.action_matrix(mu) * mu.probs[:, None]
    return float((env.reward_grid(mu, nu) * weights).sum())


def c_mf(mu: StateDistribution, policy, env: EnvironmentSpec) -> float:
    """Per-step population-average constraint cost."""
    nu = nu_mf(mu, policy)
    weights = policy.action_matrix(mu) * mu.probs[:, None]
    return float((env.cost_grid(mu, nu) * weights).sum())


@dataclass(frozen=True)
class MFTrajectory:
    """Forward iterates for t = 0..horizon-1 under a stationary policy."""

    mus: np.ndarray       # (T, |X|)
    nus: np.ndarray       # (T, |U|)
    rewards: np.ndarray   # (T,)
    costs: np.ndarray     # (T,)
    gamma: float

    @property
    def horizon(self) -> int:
        return self.mus.shape[0]

    def mu(self, t: int) -> StateDistribution:
        return StateDistribution._wrap(self.mus[t])

    def nu(self, t: int) -> ActionDistribution:
        return ActionDistribution._wrap(self.nus[t])


def value_horizon(env: EnvironmentSpec, gamma: float, tol: float) -> int:
    """Smallest T with gamma^T * max(m_r, m_c) / (1 - gamma) < tol."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must be in [0, 1)")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    scale = max(env.constants.m_r, env.constants.m_c) / (1.0 - gamma)
    if scale <= tol or gamma == 0.0:
        return 1
    horizon = ceil(log(tol / scale) / log(gamma))
    if horizon > MAX_HORIZON:
        raise ValueError(f"horizon too long: {horizon} steps needed for tol={tol}")
    return max(horizon, 1)


def _step_stats(mu, policy, env):
    nu = nu_mf(mu, policy)
    weights = policy.action_matrix(mu) * mu.probs[:, None]
    reward = float((env.reward_grid(mu, nu) * weights).sum())
    cost = float((env.cost_grid(mu, nu) * weights).sum())
    kernel = env.transition_grid(mu, nu)
    nxt = np.einsum("xuy,xu->y", kernel, weights)
    nxt = np.maximum(nxt, 0.0)
    return nu, reward, cost, StateDistribution._wrap(nxt / nxt.sum())


def rollout(mu0: StateDistribution, policies, env: EnvironmentSpec, horizon: int,
            gamma: float) -> MFTrajectory:
    """Iterate the mean-field map for a per-step iterable of policies."""
    n_x, n_u = env.n_states, env.n_actions
    mus = np.empty((horizon, n_x))
    nus = np.empty((horizon, n_u))
    rewards = np.empty(horizon)
    costs = np.empty(horizon)
    mu = mu0
    it = iter(policies)
    for t in range(horizon):
        policy = next(it)
        mus[t] = mu.probs
        nu, rewards[t], costs[t], mu = _step_stats(mu, policy, env)
        nus[t] = nu.probs
    return MFTrajectory(mus, nus, rewards, costs, gamma)


def mf_values(mu0: StateDistribution, policy, env: EnvironmentSpec, gamma: float,
              tol: float = 1e-6):
    """Discounted reward and cost values of a stationary policy from mu0.

    Exact forward recursion truncated where the geometric tail drops below
    tol; returns (v_r, v_c, trajectory).
    """
    horizon = value_horizon(env, gamma, tol)
    traj = rollout(mu0, itertools.repeat(policy), env, horizon, gamma)
    discounts = gamma ** np.arange(horizon)
    return float(discounts @ traj.rewards), float(discounts @ traj.costs), traj

"""Finite-population constrained simulator.

Agents are exchangeable and interact only through the empirical state and
action distributions, so a step is simulated on per-state counts: for each
state the action tallies are drawn from that state's policy row, and for
each (state, action) group the next-state tallies from the transition row.
Randomness is consumed per distribution row (in fixed state order), never
per agent identity, which makes whole trajectories invariant to permuting
the initial joint state under a matched seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .envmodel import EnvironmentSpec
from .meanfield import value_horizon
from .simplex import ActionDistribution, StateDistribution, empirical_state_dist


@dataclass(frozen=True)
class JointState:
    """States of all N agents; the order of entries carries no meaning."""

    states: np.ndarray

    def __post_init__(self):
        states = np.ascontiguousarray(self.states, dtype=np.int64)
        if states.ndim != 1 or states.size == 0:
            raise ValueError("joint state must hold at least one agent")
        if np.any(states < 0):
            raise ValueError("invalid state")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def n_agents(self) -> int:
        return self.states.shape[0]

    def counts(self, n_states: int) -> np.ndarray:
        if np.any(self.states >= n_states):
            raise ValueError("invalid state")
        return np.bincount(self.states, minlength=n_states)

    def empirical(self, n_states: int) -> StateDistribution:
        return empirical_state_dist(self.states, n_states)


@dataclass(frozen=True)
class NAgentEstimate:
    """Monte Carlo estimate of the N-agent discounted reward/cost values."""

    v_r: float
    v_c: float
    std_err_r: float
    std_err_c: float
    episodes: int
    horizon: int


def sample_initial_joint_state(mu0: StateDistribution, n_agents: int,
                               rng: np.random.Generator) -> JointState:
    """N iid draws from mu0, one per agent in index order."""
    if n_agents < 1:
        raise ValueError("n_agents must be >= 1")
    cdf = backend.make_cdf(mu0.probs)
    return JointState(backend.categorical_indices(cdf, rng.random(n_agents)))


def _step_counts(counts: np.ndarray, policy, env: EnvironmentSpec,
                 rng: np.random.Generator):
    """One synchronous step on per-state agent counts.

    Returns (next_counts, avg_reward, avg_cost, action_counts, mu, nu).
    """
    n = int(counts.sum())
    mu = StateDistribution._wrap(counts / n)
    probs = policy.action_matrix(mu)
    action_counts = backend.grouped_counts(backend.make_cdf(probs), counts, rng.random(n))
    nu = ActionDistribution._wrap(action_counts.sum(axis=0) / n)

    avg_reward = float((env.reward_grid(mu, nu) * action_counts).sum() / n)
    avg_cost = float((env.cost_grid(mu, nu) * action_counts).sum() / n)

    kernel = env.transition_grid(mu, nu)
    n_x, n_u = kernel.shape[0], kernel.shape[1]
    flat_cdf = backend.make_cdf(kernel.reshape(n_x * n_u, n_x))
    next_by_group = backend.grouped_counts(flat_cdf, action_counts.reshape(-1), rng.random(n))
    next_counts = next_by_group.sum(axis=0)
    return next_counts, avg_reward, avg_cost, action_counts, mu, nu


def step(state: JointState, policy, env: EnvironmentSpec, rng: np.random.Generator):
    """Advance every agent one step under pi(x, mu^N).

    Actions are conditionally independent given the empirical distribution;
    rewards, costs, and transitions are evaluated at the realized empirical
    action distribution.  Returns (next_state, avg_reward, avg_cost, nu).
    The next joint state lists agents in canonical (sorted) order.
    """
    counts = state.counts(env.n_states)
    next_counts, avg_reward, avg_cost, _, _, nu = _step_counts(counts, policy, env, rng)
    next_states = np.repeat(np.arange(env.n_states, dtype=np.int64), next_counts)
    return JointState(next_states), avg_reward, avg_cost, nu


def estimate_values(x0: JointState, policy, env: EnvironmentSpec, gamma: float,
                    episodes: int, tol: float, rng: np.random.Generator) -> NAgentEstimate:
    """Average truncated discounted reward/cost sums over independent
    episodes restarted from the same initial joint state.

    The truncation horizon matches the mean-field rule so finite-N and
    mean-field values are compared on equal horizons.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    horizon = value_horizon(env, gamma, tol)
    counts0 = x0.counts(env.n_states)
    discounts = gamma ** np.arange(horizon)
    totals_r = np.empty(episodes)
    totals_c = np.empty(episodes)
    for e, child in enumerate(rng.spawn(episodes)):
        counts = counts0
        rewards = np.empty(horizon)
        costs = np.empty(horizon)
        for t in range(horizon):
            counts, rewards[t], costs[t], _, _, _ = _step_counts(counts, policy, env, child)
        totals_r[e] = discounts @ rewards
        totals_c[e] = discounts @ costs
    def stderr(a):
        return float(a.std(ddof=1) / np.sqrt(episodes)) if episodes > 1 else 0.0
    return NAgentEstimate(
        v_r=float(totals_r.mean()), v_c=float(totals_c.mean()),
        std_err_r=stderr(totals_r), std_err_c=stderr(totals_c),
        episodes=episodes, horizon=horizon,
    )

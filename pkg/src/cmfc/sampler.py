"""Geometric-horizon occupancy sampling and advantage estimation.

A representative agent is rolled out along the deterministic mean-field
path: its own state is random, but mu_t (and hence the per-state action
rows, reward/cost grids, and transition rows) is a fixed sequence given
the policy and mu0.  MFPathCache materializes that sequence lazily so
thousands of rollouts per policy share the same tables; its cdf rows are
stored as plain tuples so the per-step draws stay cheap.

Stopping is geometric: before each step the rollout halts with probability
1 - gamma, which makes plain (undiscounted) sums unbiased for discounted
values and makes the visited triple (x_T, mu_T, u_T) a draw from the
discounted occupancy measure.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .envmodel import EnvironmentSpec
from .simplex import ActionDistribution, StateDistribution


def _cdf_row(p: np.ndarray) -> tuple:
    c = np.cumsum(p)
    c[-1] = 1.0
    return tuple(c.tolist())


def _draw(cdf_row: tuple, rng: np.random.Generator) -> int:
    """Invert one uniform through a cdf row (first index with u < cdf[i])."""
    i = bisect_right(cdf_row, rng.random())
    last = len(cdf_row) - 1
    return i if i < last else last


class MFPathCache:
    """Lazily extended per-step tables along the mean-field path from mu0."""

    def __init__(self, mu0: StateDistribution, policy, env: EnvironmentSpec):
        self.env = env
        self.policy = policy
        self._mu_vecs: list[np.ndarray] = [np.asarray(mu0.probs, dtype=np.float64)]
        self._mu_dists: list[StateDistribution] = [mu0]
        self.mu0_cdf = _cdf_row(mu0.probs)
        self.nus: list[np.ndarray] = []
        self.action_rows: list[list[tuple]] = []      # [t][x] -> cdf tuple
        self.transition_rows: list[list[list[tuple]]] = []  # [t][x][u] -> cdf tuple
        self.rewards: list[tuple] = []                # [t][x][u] -> float
        self.costs: list[tuple] = []

    def ensure(self, t: int) -> None:
        while len(self.action_rows) <= t:
            s = len(self.action_rows)
            mu = self._mu_dists[s]
            probs = self.policy.action_matrix(mu)
            nu_vec = mu.probs @ probs
            nu = ActionDistribution._wrap(nu_vec)
            kernel = self.env.transition_grid(mu, nu)
            self.nus.append(nu_vec)
            self.action_rows.append([_cdf_row(row) for row in probs])
            self.transition_rows.append(
                [[_cdf_row(kernel[x, u]) for u in range(self.env.n_actions)]
                 for x in range(self.env.n_states)])
            self.rewards.append(tuple(map(tuple, self.env.reward_grid(mu, nu))))
            self.costs.append(tuple(map(tuple, self.env.cost_grid(mu, nu))))
            weights = probs * mu.probs[:, None]
            nxt = np.maximum(np.einsum("xuy,xu->y", kernel, weights), 0.0)
            nxt /= nxt.sum()
            self._mu_vecs.append(nxt)
            self._mu_dists.append(StateDistribution._wrap(nxt))

    def mu(self, t: int) -> StateDistribution:
        if t >= len(self._mu_dists):
            self.ensure(t)
        return self._mu_dists[t]

    def draw_action(self, t: int, x: int, rng: np.random.Generator) -> int:
        self.ensure(t)
        return _draw(self.action_rows[t][x], rng)

    def draw_next_state(self, t: int, x: int, u: int, rng: np.random.Generator) -> int:
        self.ensure(t)
        return _draw(self.transition_rows[t][x][u], rng)


@dataclass(frozen=True)
class OccupancySample:
    """State / mean-field / action triple at a geometric stopping time."""

    x: int
    mu: StateDistribution
    u: int
    t: int


@dataclass(frozen=True)
class AdvantageEstimate:
    a_hat_r: float
    a_hat_c: float
    a_hat_lambda: float
    v_hat_c: float


def sample_occupancy(mu0: StateDistribution, policy, env: EnvironmentSpec,
                     gamma: float, rng: np.random.Generator,
                     cache: MFPathCache | None = None) -> OccupancySample:
    """Draw (x_T, mu_T, u_T) with T geometric (stop probability 1 - gamma),
    so the triple is distributed as the discounted occupancy measure.

    A cache may be passed to share path tables across calls; it must be
    rooted at the same mu0.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must be in [0, 1)")
    if cache is None:
        cache = MFPathCache(mu0, policy, env)
    x = _draw(cache.mu0_cdf, rng)
    u = cache.draw_action(0, x, rng)
    t = 0
    while rng.random() >= (1.0 - gamma):
        x = cache.draw_next_state(t, x, u, rng)
        t += 1
        u = cache.draw_action(t, x, rng)
    return OccupancySample(x=x, mu=cache.mu(t), u=u, t=t)


def _rollout_sums(cache: MFPathCache, t: int, x: int, u: int, gamma: float,
                  rng: np.random.Generator) -> tuple[float, float]:
    """Accumulate undiscounted reward/cost from (t, x, u), stopping after
    each accrual with probability 1 - gamma.  The expectation equals the
    discounted sum from time t."""
    stop = 1.0 - gamma
    sum_r = sum_c = 0.0
    while True:
        cache.ensure(t)
        row_r, row_c = cache.rewards[t][x], cache.costs[t][x]
        sum_r += row_r[u]
        sum_c += row_c[u]
        if rng.random() < stop:
            return sum_r, sum_c
        x = cache.draw_next_state(t, x, u, rng)
        t += 1
        u = cache.draw_action(t, x, rng)


def estimate_advantage(sample: OccupancySample, policy, env: EnvironmentSpec,
                       lam: float, gamma: float, rng: np.random.Generator,
                       cache: MFPathCache | None = None) -> AdvantageEstimate:
    """Single-rollout unbiased advantage estimate at an occupancy sample.

    A fair coin picks the branch: the action-value branch starts the
    continuation with the sampled action u_T, the baseline branch resamples
    the first action fresh from the policy.  The estimate is then
    2 * (Q-branch sum) or -2 * (V-branch sum), whose expectation is
    Q(x, mu, u) - V(x, mu).  One shared rollout feeds both the reward and
    cost channels.
    """
    if cache is None:
        cache = MFPathCache(sample.mu, policy, env)
        t0 = 0
    else:
        t0 = sample.t
    q_branch = rng.random() < 0.5
    first_u = sample.u if q_branch else cache.draw_action(t0, sample.x, rng)
    sum_r, sum_c = _rollout_sums(cache, t0, sample.x, first_u, gamma, rng)
    sign = 2.0 if q_branch else -2.0
    a_r, a_c = sign * sum_r, sign * sum_c
    return AdvantageEstimate(a_hat_r=a_r, a_hat_c=a_c,
                             a_hat_lambda=a_r - lam * a_c, v_hat_c=sum_c)


def estimate_constraint_value(mu0: StateDistribution, policy, env: EnvironmentSpec,
                              gamma: float, rng: np.random.Generator,
                              cache: MFPathCache | None = None) -> float:
    """Unbiased single-rollout estimate of the discounted cost value from mu0."""
    if cache is None:
        cache = MFPathCache(mu0, policy, env)
    x = _draw(cache.mu0_cdf, rng)
    u = cache.draw_action(0, x, rng)
    _, sum_c = _rollout_sums(cache, 0, x, u, gamma, rng)
    return sum_c

"""Empirical suites for the contraction and concentration properties.

Two families of checks back the gap formulas:

* sensitivity: sampled difference ratios of the mean-field maps
  (action mixture, distribution update, average reward/cost) against the
  closed-form constants 1 + l_q, S_P, S_R, S_C;
* concentration: one-step deviations of a finite population from the
  mean-field maps against the 1/sqrt(N) envelopes
  sqrt(|U|/N), C_P (sqrt|X| + sqrt|U|)/sqrt(N), and
  (M_J + L_J sqrt|U|)/sqrt(N).

Both return structured reports; nothing raises on violation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import BoundInputs, compute_bounds
from .envmodel import EnvironmentSpec
from .meanfield import c_mf, nu_mf, p_mf, r_mf
from .nagent import _step_counts
from .policy import SoftmaxPolicy
from .simplex import StateDistribution, l1_distance


@dataclass(frozen=True)
class RatioCheck:
    name: str
    max_ratio: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.max_ratio <= self.bound


@dataclass(frozen=True)
class DeviationCheck:
    name: str
    n_agents: int
    mean_deviation: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.mean_deviation <= self.bound


def random_softmax_policy(env: EnvironmentSpec, rng: np.random.Generator,
                          scale: float = 1.0) -> SoftmaxPolicy:
    shape = (env.n_states, env.n_actions, 1 + env.n_states)
    return SoftmaxPolicy(rng.normal(0.0, scale, size=shape))


def sensitivity_suite(env: EnvironmentSpec, policies, n_pairs: int,
                      rng: np.random.Generator) -> list[RatioCheck]:
    """Max sampled ratios of the four mean-field maps over random
    (mu1, mu2, policy) triples, against the analytic constants."""
    alpha = np.ones(env.n_states)
    l_q = max(p.lipschitz_bound() for p in policies)
    c = env.constants
    out = compute_bounds(BoundInputs(
        m_r=c.m_r, m_c=c.m_c, l_r=c.l_r, l_c=c.l_c, l_p=c.l_p, l_q=l_q,
        gamma=0.0, n_agents=1, n_states=env.n_states, n_actions=env.n_actions,
        zeta0=-1.0))
    maxima = {"nu_mf": 0.0, "p_mf": 0.0, "r_mf": 0.0, "c_mf": 0.0}
    for i in range(n_pairs):
        policy = policies[i % len(policies)]
        mu1 = StateDistribution(rng.dirichlet(alpha))
        mu2 = StateDistribution(rng.dirichlet(alpha))
        gap = l1_distance(mu1, mu2)
        if gap < 1e-9:
            continue
        maxima["nu_mf"] = max(maxima["nu_mf"],
                              l1_distance(nu_mf(mu1, policy), nu_mf(mu2, policy)) / gap)
        maxima["p_mf"] = max(maxima["p_mf"],
                             l1_distance(p_mf(mu1, policy, env), p_mf(mu2, policy, env)) / gap)
        maxima["r_mf"] = max(maxima["r_mf"],
                             abs(r_mf(mu1, policy, env) - r_mf(mu2, policy, env)) / gap)
        maxima["c_mf"] = max(maxima["c_mf"],
                             abs(c_mf(mu1, policy, env) - c_mf(mu2, policy, env)) / gap)
    bounds = {"nu_mf": 1.0 + l_q, "p_mf": out.s_p, "r_mf": out.s_r, "c_mf": out.s_c}
    return [RatioCheck(name, maxima[name], bounds[name]) for name in maxima]


def concentration_suite(env: EnvironmentSpec, policy, n_values, n_steps: int,
                        rng: np.random.Generator) -> list[DeviationCheck]:
    """Average one-step deviations over independent populations with random
    initial distributions, per population size."""
    c = env.constants
    sqrt_x, sqrt_u = np.sqrt(env.n_states), np.sqrt(env.n_actions)
    alpha = np.ones(env.n_states)
    checks = []
    for n in n_values:
        devs = {"action_mixture": [], "state_update": [], "avg_reward": [], "avg_cost": []}
        for _ in range(n_steps):
            base = rng.dirichlet(alpha)
            counts = np.bincount(rng.choice(env.n_states, size=n, p=base),
                                 minlength=env.n_states)
            mu_n = StateDistribution._wrap(counts / n)
            next_counts, avg_r, avg_c, _, _, nu_emp = _step_counts(counts, policy, env, rng)
            mu_next = StateDistribution._wrap(next_counts / n)
            devs["action_mixture"].append(l1_distance(nu_emp, nu_mf(mu_n, policy)))
            devs["state_update"].append(l1_distance(mu_next, p_mf(mu_n, policy, env)))
            devs["avg_reward"].append(abs(avg_r - r_mf(mu_n, policy, env)))
            devs["avg_cost"].append(abs(avg_c - c_mf(mu_n, policy, env)))
        root_n = np.sqrt(n)
        bounds = {
            "action_mixture": sqrt_u / root_n,
            "state_update": (2.0 + c.l_p) * (sqrt_x + sqrt_u) / root_n,
            "avg_reward": (c.m_r + c.l_r * sqrt_u) / root_n,
            "avg_cost": (c.m_c + c.l_c * sqrt_u) / root_n,
        }
        for name in devs:
            checks.append(DeviationCheck(name, n, float(np.mean(devs[name])), bounds[name]))
    return checks

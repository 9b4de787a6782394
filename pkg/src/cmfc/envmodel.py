"""Environment abstraction and the firms product-quality benchmark.

An environment is a finite state/action system whose per-agent reward,
cost, and transition law additionally depend on the population's state
distribution mu and action distribution nu.  Authors declare bound and
Lipschitz constants for their functions; validate_lipschitz spot-checks
the declarations by sampling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .simplex import ActionDistribution, StateDistribution, l1_distance


@dataclass(frozen=True)
class EnvConstants:
    """Declared bounds: |reward| <= m_r, |cost| <= m_c, and Lipschitz
    constants of reward/cost/transition in (mu, nu) under L1 distance.
    l_q is the admissible-policy Lipschitz constant used by gap formulas."""

    m_r: float
    m_c: float
    l_r: float
    l_c: float
    l_p: float
    l_q: float = 0.0


@dataclass(frozen=True)
class EnvironmentSpec:
    """Finite-population environment model.

    reward/cost/transition take (x, u, mu, nu) with distribution objects;
    transition returns a StateDistribution.  The *_grid hooks, when given,
    provide vectorized whole-grid evaluation used by the hot loops; the
    defaults loop over the scalar functions.
    """

    n_states: int
    n_actions: int
    reward: Callable[[int, int, StateDistribution, ActionDistribution], float]
    cost: Callable[[int, int, StateDistribution, ActionDistribution], float]
    transition: Callable[[int, int, StateDistribution, ActionDistribution], StateDistribution]
    constants: EnvConstants
    reward_grid_fn: Optional[Callable] = field(default=None, repr=False)
    cost_grid_fn: Optional[Callable] = field(default=None, repr=False)
    transition_grid_fn: Optional[Callable] = field(default=None, repr=False)

    def reward_grid(self, mu, nu) -> np.ndarray:
        """(|X|, |U|) array of reward(x, u, mu, nu)."""
        if self.reward_grid_fn is not None:
            return self.reward_grid_fn(mu, nu)
        return np.array([[self.reward(x, u, mu, nu) for u in range(self.n_actions)]
                         for x in range(self.n_states)], dtype=np.float64)

    def cost_grid(self, mu, nu) -> np.ndarray:
        if self.cost_grid_fn is not None:
            return self.cost_grid_fn(mu, nu)
        return np.array([[self.cost(x, u, mu, nu) for u in range(self.n_actions)]
                         for x in range(self.n_states)], dtype=np.float64)

    def transition_grid(self, mu, nu) -> np.ndarray:
        """(|X|, |U|, |X|) array: row [x, u] is the next-state law."""
        if self.transition_grid_fn is not None:
            return self.transition_grid_fn(mu, nu)
        out = np.empty((self.n_states, self.n_actions, self.n_states), dtype=np.float64)
        for x in range(self.n_states):
            for u in range(self.n_actions):
                out[x, u] = self.transition(x, u, mu, nu).probs
        return out


@dataclass(frozen=True)
class FirmsEnvConfig:
    """Product-quality benchmark parameters (defaults match the reference
    experiment): Q quality levels, revenue slope alpha_r, population drag
    beta_r, investment price lambda_r, investment cost lambda_c."""

    q: int = 10
    alpha_r: float = 1.0
    beta_r: float = 0.5
    lambda_r: float = 0.5
    lambda_c: float = 1.0

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if min(self.alpha_r, self.beta_r, self.lambda_r, self.lambda_c) < 0:
            raise ValueError("coefficients must be >= 0")


def firms_improvement_scale(cfg: FirmsEnvConfig, x: int, mu_mean: float) -> float:
    """Headroom c(x, mu): an investing firm at quality x jumps by
    floor(chi * c) with chi uniform on [0, 1)."""
    return (1.0 - mu_mean / (cfg.q - 1)) * (cfg.q - 1 - x)


def firms_jump_law(scale: float, q: int, x: int) -> np.ndarray:
    """Exact law of x + floor(chi * scale) over {0..q-1}, chi ~ U[0, 1).

    P(jump = k) = min((k+1)/c, 1) - k/c for 0 <= k <= floor(c); the
    half-open convention puts zero mass on k = c when c is an integer.
    """
    p = np.zeros(q, dtype=np.float64)
    if scale <= 0.0:
        p[x] = 1.0
        return p
    k = np.arange(q - x, dtype=np.float64)
    hi = np.clip((k + 1.0) / scale, 0.0, 1.0)
    lo = np.clip(k / scale, 0.0, 1.0)
    p[x:] = hi - lo
    return p


def _firms_transition_matrix(cfg: FirmsEnvConfig, mu_mean: float) -> np.ndarray:
    """(Q, 2, Q) kernel: action 0 freezes the state, action 1 jumps."""
    q = cfg.q
    out = np.empty((q, 2, q), dtype=np.float64)
    eye = np.eye(q)
    out[:, 0, :] = eye
    scale = (1.0 - mu_mean / (q - 1)) * (q - 1 - np.arange(q, dtype=np.float64))
    k = np.arange(q, dtype=np.float64)[None, :] - np.arange(q, dtype=np.float64)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = np.clip((k + 1.0) / scale[:, None], 0.0, 1.0)
        lo = np.clip(k / scale[:, None], 0.0, 1.0)
    jump = hi - lo
    frozen = scale <= 0.0
    jump[frozen] = eye[frozen]
    out[:, 1, :] = jump
    return out


def firms_env(cfg: FirmsEnvConfig = FirmsEnvConfig()) -> EnvironmentSpec:
    """Firms benchmark: states are quality levels {0..Q-1}, actions are
    {0: unresponsive, 1: invest}.

    reward(x, u, mu) = alpha_r*x - beta_r*mean(mu) - lambda_r*u
    cost(x, u)       = lambda_c*u
    invest jumps to x + floor(chi * c(x, mean(mu))) via the exact law above.

    Declared constants (derived from the closed forms; see README):
      m_r = max(alpha_r, beta_r)*(Q-1) + (lambda_r if beta_r side binds)
      l_r = beta_r*(Q-1)/2   (the mean functional is (Q-1)/2-Lipschitz in L1)
      l_p = Q-1              (jump law is 2-Lipschitz in c; |dc| <= (Q-1)/2 |dmu|_1)
    """
    q = cfg.q

    def reward(x, u, mu, nu):
        return cfg.alpha_r * x - cfg.beta_r * mu.mean() - cfg.lambda_r * u

    def cost(x, u, mu, nu):
        return cfg.lambda_c * u

    def transition(x, u, mu, nu):
        if u == 0:
            p = np.zeros(q)
            p[x] = 1.0
            return StateDistribution._wrap(p)
        scale = firms_improvement_scale(cfg, x, mu.mean())
        return StateDistribution._wrap(firms_jump_law(scale, q, x))

    xs = np.arange(q, dtype=np.float64)

    def reward_grid(mu, nu):
        base = cfg.alpha_r * xs - cfg.beta_r * mu.mean()
        return np.stack([base, base - cfg.lambda_r], axis=1)

    cost_row = np.array([0.0, cfg.lambda_c])

    def cost_grid(mu, nu):
        return np.broadcast_to(cost_row, (q, 2)).copy()

    def transition_grid(mu, nu):
        return _firms_transition_matrix(cfg, mu.mean())

    constants = EnvConstants(
        m_r=max(cfg.alpha_r * (q - 1), cfg.beta_r * (q - 1) + cfg.lambda_r),
        m_c=cfg.lambda_c,
        l_r=cfg.beta_r * (q - 1) / 2.0,
        l_c=0.0,
        l_p=float(q - 1),
    )
    return EnvironmentSpec(
        n_states=q,
        n_actions=2,
        reward=reward,
        cost=cost,
        transition=transition,
        constants=constants,
        reward_grid_fn=reward_grid,
        cost_grid_fn=cost_grid,
        transition_grid_fn=transition_grid,
    )


@dataclass
class LipschitzReport:
    """Max sampled difference ratios against the declared constants."""

    trials: int
    max_ratio_reward: float
    max_ratio_cost: float
    max_ratio_transition: float
    declared: EnvConstants
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_lipschitz(env: EnvironmentSpec, trials: int, rng: np.random.Generator) -> LipschitzReport:
    """Sample random (x, u, mu1, mu2, nu1, nu2) tuples and report the max of
    |delta f| / (|mu1-mu2|_1 + |nu1-nu2|_1) for reward, cost, and transition.

    Violations of the declared constants are reported, never raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    alpha_x = np.ones(env.n_states)
    alpha_u = np.ones(env.n_actions)
    max_r = max_c = max_p = 0.0
    for _ in range(trials):
        x = int(rng.integers(env.n_states))
        u = int(rng.integers(env.n_actions))
        mu1 = StateDistribution(rng.dirichlet(alpha_x))
        mu2 = StateDistribution(rng.dirichlet(alpha_x))
        nu1 = ActionDistribution(rng.dirichlet(alpha_u))
        nu2 = ActionDistribution(rng.dirichlet(alpha_u))
        denom = l1_distance(mu1, mu2) + l1_distance(nu1, nu2)
        if denom < 1e-12:
            continue
        max_r = max(max_r, abs(env.reward(x, u, mu1, nu1) - env.reward(x, u, mu2, nu2)) / denom)
        max_c = max(max_c, abs(env.cost(x, u, mu1, nu1) - env.cost(x, u, mu2, nu2)) / denom)
        max_p = max(max_p, l1_distance(env.transition(x, u, mu1, nu1),
                                       env.transition(x, u, mu2, nu2)) / denom)
    c = env.constants
    violations = []
    for name, observed, declared in [("reward", max_r, c.l_r), ("cost", max_c, c.l_c),
                                     ("transition", max_p, c.l_p)]:
        if observed > declared:
            violations.append(f"{name}: sampled ratio {observed:.6g} exceeds declared {declared:.6g}")
    return LipschitzReport(trials, max_r, max_c, max_p, c, violations)

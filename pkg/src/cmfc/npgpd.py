"""Natural policy gradient primal-dual solver.

Outer loop over j: an inner SGD fits a direction w_j so that
w . score(x, mu, u) approximates the Lagrangian advantage at occupancy
samples (compatible function approximation); the policy moves by
eta1/(1-gamma) * w_j with parameter clipping; the dual variable ascends on
the estimated constraint gap and is projected onto [0, inf).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .envmodel import EnvironmentSpec
from .policy import SoftmaxPolicy
from .sampler import MFPathCache, estimate_advantage, estimate_constraint_value, sample_occupancy
from .simplex import StateDistribution


@dataclass(frozen=True)
class SolverConfig:
    eta1: float = 1e-3
    eta2: float = 1e-3
    alpha: float = 1e-3
    j_iters: int = 100
    l_iters: int = 100
    gamma: float = 0.9
    zeta: float = 5.0
    lambda0: float = 0.0
    norm_bound: float = 50.0
    inner_batch: int = 1
    dual_batch: int = 16

    def __post_init__(self):
        if min(self.eta1, self.eta2, self.alpha) < 0:
            raise ValueError("learning rates must be >= 0")
        if self.j_iters < 1 or self.l_iters < 1:
            raise ValueError("iteration counts must be >= 1")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if self.lambda0 < 0:
            raise ValueError("lambda0 must be >= 0")
        if self.inner_batch < 1 or self.dual_batch < 1:
            raise ValueError("batch sizes must be >= 1")


@dataclass
class IterationRecord:
    j: int
    lam: float
    w_l1: float
    v_c_hat: float
    wall_clock_s: float


@dataclass
class SolverTrace:
    """Per-iteration records plus the post-update policy iterates."""

    records: list[IterationRecord] = field(default_factory=list)
    policies: list[SoftmaxPolicy] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


def inner_sgd(policy: SoftmaxPolicy, lam: float, cfg: SolverConfig,
              env: EnvironmentSpec, mu0: StateDistribution, rng: np.random.Generator,
              w0: Optional[np.ndarray] = None,
              sample_fn: Optional[Callable] = None) -> np.ndarray:
    """L SGD steps on the squared compatible-approximation error.

    Each step draws a fresh occupancy sample with score g and advantage
    estimate a, then moves w along -(w.g - a) g.  Returns the running
    average of the post-update iterates.  sample_fn(rng) -> (g, a) can be
    injected to run on a frozen dataset (testing); by default samples come
    from the occupancy/advantage estimators.
    """
    dim = policy.dim
    w = np.zeros(dim) if w0 is None else np.asarray(w0, dtype=np.float64).copy()
    if w.shape != (dim,):
        raise ValueError("w0 has wrong dimension")

    if sample_fn is None:
        cache = MFPathCache(mu0, policy, env)

        def sample_fn(r):
            s = sample_occupancy(mu0, policy, env, cfg.gamma, r, cache=cache)
            est = estimate_advantage(s, policy, env, lam, cfg.gamma, r, cache=cache)
            g = np.zeros(dim).reshape(policy.phi.shape)
            g[s.x] = policy.score_block(s.x, cache.mu(s.t), s.u)
            return g.reshape(-1), est.a_hat_lambda

    acc = np.zeros(dim)
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is checked explicitly
        for l in range(cfg.l_iters):
            h = np.zeros(dim)
            for _ in range(cfg.inner_batch):
                g, a = sample_fn(rng)
                h += (w @ g - a) * g
            w = w - cfg.alpha * (h / cfg.inner_batch)
            if not np.all(np.isfinite(w)):
                raise RuntimeError(f"inner SGD diverged at step {l}")
            acc += w
    return acc / cfg.l_iters


def npg_step(policy: SoftmaxPolicy, w: np.ndarray, cfg: SolverConfig) -> SoftmaxPolicy:
    """phi <- clip(phi + eta1/(1-gamma) * w) entrywise to the norm bound."""
    step = (cfg.eta1 / (1.0 - cfg.gamma)) * np.asarray(w, dtype=np.float64)
    return policy.clipped(policy.phi + step.reshape(policy.phi.shape))


def dual_step(lam: float, v_hat_c: float, cfg: SolverConfig) -> float:
    """Projected ascent: max(0, lam + eta2 * (v_hat_c - zeta))."""
    return max(0.0, lam + cfg.eta2 * (v_hat_c - cfg.zeta))


def solve(cfg: SolverConfig, env: EnvironmentSpec, mu0: StateDistribution,
          rng: np.random.Generator, policy0: Optional[SoftmaxPolicy] = None,
          record_timing: bool = False) -> SolverTrace:
    """Run J primal-dual iterations; deterministic given the generator.

    The dual update averages dual_batch independent constraint-value
    rollouts of the pre-update policy.  Wall-clock is recorded only when
    record_timing is set, keeping artifacts reproducible by default.
    """
    policy = policy0 if policy0 is not None else SoftmaxPolicy.zeros(
        env.n_states, env.n_actions, cfg.norm_bound)
    lam = cfg.lambda0
    trace = SolverTrace()
    for j in range(cfg.j_iters):
        t0 = time.perf_counter()
        inner_rng, dual_rng = rng.spawn(2)
        w = inner_sgd(policy, lam, cfg, env, mu0, inner_rng)
        new_policy = npg_step(policy, w, cfg)
        cache = MFPathCache(mu0, policy, env)
        v_c_hat = float(np.mean([
            estimate_constraint_value(mu0, policy, env, cfg.gamma, dual_rng, cache=cache)
            for _ in range(cfg.dual_batch)
        ]))
        new_lam = dual_step(lam, v_c_hat, cfg)
        elapsed = time.perf_counter() - t0 if record_timing else 0.0
        trace.records.append(IterationRecord(
            j=j, lam=lam, w_l1=float(np.abs(w).sum()), v_c_hat=v_c_hat,
            wall_clock_s=elapsed))
        trace.policies.append(new_policy)
        policy, lam = new_policy, new_lam
    return trace

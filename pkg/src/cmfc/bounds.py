"""Closed-form approximation-gap constants and constraint tightening.

For a policy class that is l_q-Lipschitz in the state distribution and an
environment with declared constants, the finite-population value of any
policy differs from its mean-field value by at most G_J (J in {reward,
cost}), provided gamma * S_P < 1.  The action-independent special case
(reward, cost, transition free of nu) admits the tighter G_J0.  Tightening
the mean-field constraint by G_C (or 2 G_C for the solver route) makes the
mean-field policy feasible for the finite system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .envmodel import EnvConstants, EnvironmentSpec


@dataclass(frozen=True)
class BoundInputs:
    m_r: float
    m_c: float
    l_r: float
    l_c: float
    l_p: float
    l_q: float
    gamma: float
    n_agents: int
    n_states: int
    n_actions: int
    zeta0: float            # strict-feasibility margin; must be negative
    zeta1: Optional[float] = None  # mean-field-side margin, informational

    def __post_init__(self):
        if min(self.m_r, self.m_c, self.l_r, self.l_c, self.l_p, self.l_q) < 0:
            raise ValueError("constants must be >= 0")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if self.zeta0 >= 0:
            raise ValueError("zeta0 must be negative")
        if self.n_agents < 1 or self.n_states < 1 or self.n_actions < 1:
            raise ValueError("counts must be >= 1")

    @classmethod
    def from_env(cls, env: EnvironmentSpec, gamma: float, n_agents: int,
                 zeta0: float, l_q: Optional[float] = None) -> "BoundInputs":
        c: EnvConstants = env.constants
        return cls(m_r=c.m_r, m_c=c.m_c, l_r=c.l_r, l_c=c.l_c, l_p=c.l_p,
                   l_q=c.l_q if l_q is None else l_q, gamma=gamma,
                   n_agents=n_agents, n_states=env.n_states,
                   n_actions=env.n_actions, zeta0=zeta0)


@dataclass(frozen=True)
class BoundOutputs:
    s_r: float
    s_c: float
    s_p: float
    c_p: float
    contraction_ok: bool
    g_r: Optional[float] = None
    g_c: Optional[float] = None
    g_r0: Optional[float] = None
    g_c0: Optional[float] = None
    theorem1_gap: Optional[float] = None
    theorem2_gap: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "s_r": self.s_r, "s_c": self.s_c, "s_p": self.s_p, "c_p": self.c_p,
            "contraction_ok": self.contraction_ok,
            "g_r": self.g_r, "g_c": self.g_c, "g_r0": self.g_r0, "g_c0": self.g_c0,
            "theorem1_gap": self.theorem1_gap, "theorem2_gap": self.theorem2_gap,
        }


def geometric_gap_factor(s_p: float, gamma: float) -> float:
    """[1/(1 - gamma*s_p) - 1/(1 - gamma)] / (s_p - 1), extended by its
    limit gamma/(1-gamma)^2 at s_p = 1.  Defined for gamma*s_p < 1."""
    if s_p == 1.0:
        return gamma / (1.0 - gamma) ** 2
    return (1.0 / (1.0 - gamma * s_p) - 1.0 / (1.0 - gamma)) / (s_p - 1.0)


def compute_bounds(inp: BoundInputs) -> BoundOutputs:
    """Evaluate all gap constants; without contraction only the sensitivity
    constants are returned and contraction_ok is False."""
    s_r = (inp.m_r + 2.0 * inp.l_r) + inp.l_q * (inp.m_r + inp.l_r)
    s_c = (inp.m_c + 2.0 * inp.l_c) + inp.l_q * (inp.m_c + inp.l_c)
    s_p = 1.0 + 2.0 * inp.l_p + inp.l_q * (1.0 + inp.l_p)
    c_p = 2.0 + inp.l_p
    if inp.gamma * s_p >= 1.0:
        return BoundOutputs(s_r=s_r, s_c=s_c, s_p=s_p, c_p=c_p, contraction_ok=False)

    sqrt_n = math.sqrt(inp.n_agents)
    sqrt_x = math.sqrt(inp.n_states)
    sqrt_u = math.sqrt(inp.n_actions)
    horizon = 1.0 / (1.0 - inp.gamma)
    factor = geometric_gap_factor(s_p, inp.gamma)

    def g_full(m_j, l_j, s_j):
        return horizon * (m_j + l_j * sqrt_u) / sqrt_n \
            + ((sqrt_x + sqrt_u) / sqrt_n) * s_j * c_p * factor

    def g_special(m_j, s_j):
        return horizon * m_j / sqrt_n + (sqrt_x / sqrt_n) * 2.0 * s_j * factor

    g_r = g_full(inp.m_r, inp.l_r, s_r)
    g_c = g_full(inp.m_c, inp.l_c, s_c)
    g_r0 = g_special(inp.m_r, s_r)
    g_c0 = g_special(inp.m_c, s_c)
    # The optimality-gap width uses |zeta0|: the inequality bounds an
    # absolute difference, so the width is reported as a nonnegative number.
    width = (4.0 / abs(inp.zeta0)) * (inp.m_r * horizon)
    return BoundOutputs(
        s_r=s_r, s_c=s_c, s_p=s_p, c_p=c_p, contraction_ok=True,
        g_r=g_r, g_c=g_c, g_r0=g_r0, g_c0=g_c0,
        theorem1_gap=g_r + g_c * width,
        theorem2_gap=g_r0 + g_c0 * width,
    )


def tightened_zeta(inp: BoundInputs, mode: str, zeta_raw: float = 0.0) -> float:
    """Constraint level to hand the mean-field solver so the resulting
    policy stays feasible for the N-agent problem.

    mode "theorem1_mfc" tightens by G_C; mode "theorem3_solver" by 2 G_C.
    """
    out = compute_bounds(inp)
    if not out.contraction_ok:
        raise ValueError("contraction gamma * s_p < 1 fails; no finite tightening")
    if mode == "theorem1_mfc":
        return zeta_raw - out.g_c
    if mode == "theorem3_solver":
        return zeta_raw - 2.0 * out.g_c
    raise ValueError(f"unknown mode {mode!r}")

"""Stochastic policies pi(x, mu) over a finite action set.

The trainable class is softmax-linear: per (state, action) weights on the
feature vector [1, mu(0), ..., mu(|X|-1)].  It depends smoothly on the
population distribution, has a closed-form score function, and admits an
analytic Lipschitz-in-mu bound, which the gap formulas require of every
admissible policy.  Parameters are clipped to a max-norm bound so that
Lipschitz constant stays finite during training.
"""
from __future__ import annotations

import numpy as np

from .simplex import ActionDistribution, StateDistribution

DEFAULT_NORM_BOUND = 50.0


class SoftmaxPolicy:
    """Softmax over logits phi[x, u] . [1, mu].

    phi has shape (|X|, |U|, 1+|X|); the flat layout is x-major, then u,
    then feature index (C order), which is also the checkpoint format.
    """

    def __init__(self, phi: np.ndarray, norm_bound: float = DEFAULT_NORM_BOUND):
        phi = np.asarray(phi, dtype=np.float64)
        if phi.ndim != 3 or phi.shape[2] != phi.shape[0] + 1:
            raise ValueError("phi must have shape (n_states, n_actions, 1 + n_states)")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi must be finite")
        if np.max(np.abs(phi), initial=0.0) > norm_bound:
            raise ValueError(f"phi max-norm exceeds bound {norm_bound}")
        self.phi = phi
        self.norm_bound = float(norm_bound)
        self.n_states, self.n_actions, self._n_features = phi.shape

    @classmethod
    def zeros(cls, n_states: int, n_actions: int, norm_bound: float = DEFAULT_NORM_BOUND):
        return cls(np.zeros((n_states, n_actions, 1 + n_states)), norm_bound)

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_states: int, n_actions: int,
                  norm_bound: float = DEFAULT_NORM_BOUND):
        flat = np.asarray(flat, dtype=np.float64)
        shape = (n_states, n_actions, 1 + n_states)
        if flat.size != np.prod(shape):
            raise ValueError(f"expected {np.prod(shape)} parameters, got {flat.size}")
        return cls(flat.reshape(shape), norm_bound)

    @property
    def flat(self) -> np.ndarray:
        return self.phi.reshape(-1)

    @property
    def dim(self) -> int:
        return self.phi.size

    def _features(self, mu: StateDistribution) -> np.ndarray:
        return np.concatenate(([1.0], mu.probs))

    def action_matrix(self, mu: StateDistribution) -> np.ndarray:
        """(|X|, |U|) matrix of pi(x, mu); rows are strict-interior simplex points."""
        logits = self.phi @ self._features(mu)
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)

    def action_probs(self, x: int, mu: StateDistribution) -> np.ndarray:
        logits = self.phi[x] @ self._features(mu)
        logits -= logits.max()
        e = np.exp(logits)
        return e / e.sum()

    def action_dist(self, x: int, mu: StateDistribution) -> ActionDistribution:
        return ActionDistribution._wrap(self.action_probs(x, mu))

    def log_prob_grad(self, x: int, mu: StateDistribution, u: int) -> np.ndarray:
        """Score function d/dphi log pi(x, mu)(u), flat vector of length dim.

        Only the block for state x is nonzero:
        (indicator(u'=u) - pi(u')) * [1, mu] per action u'.  Its L1 norm is
        2 * (1 + |mu|_1) * (1 - pi(u)) <= 4.
        """
        grad = np.zeros_like(self.phi)
        grad[x] = self.score_block(x, mu, u)
        return grad.reshape(-1)

    def score_block(self, x: int, mu: StateDistribution, u: int) -> np.ndarray:
        """(|U|, 1+|X|) nonzero block of the score function at state x."""
        feat = self._features(mu)
        coeff = -self.action_probs(x, mu)
        coeff[u] += 1.0
        return coeff[:, None] * feat[None, :]

    def lipschitz_bound(self) -> float:
        """Upper bound on sup |pi(x,mu1)-pi(x,mu2)|_1 / |mu1-mu2|_1.

        The softmax Jacobian maps a logit perturbation v to an L1 change of
        at most (max v - min v)/2 (mean absolute deviation under pi is at
        most half the range), and along mu the logit of action u moves by
        a[x,u] . dmu with a the mu-block weights, so the range is at most
        max_{u,u'} |a[x,u] - a[x,u']|_inf * |dmu|_1.
        """
        mu_block = self.phi[:, :, 1:]
        spread = np.abs(mu_block[:, :, None, :] - mu_block[:, None, :, :]).max(axis=3)
        return float(spread.max() / 2.0)

    def clipped(self, phi: np.ndarray) -> "SoftmaxPolicy":
        """New policy with entries clipped to the max-norm bound."""
        return SoftmaxPolicy(np.clip(phi, -self.norm_bound, self.norm_bound), self.norm_bound)

    def save(self, path) -> None:
        np.save(path, self.flat)

    @classmethod
    def load(cls, path, n_states: int, n_actions: int,
             norm_bound: float = DEFAULT_NORM_BOUND) -> "SoftmaxPolicy":
        return cls.from_flat(np.load(path), n_states, n_actions, norm_bound)


class UniformPolicy:
    """Equal probability on every action, independent of (x, mu)."""

    def __init__(self, n_states: int, n_actions: int):
        self.n_states, self.n_actions = n_states, n_actions
        self._row = np.full(n_actions, 1.0 / n_actions)

    def action_matrix(self, mu):
        return np.broadcast_to(self._row, (self.n_states, self.n_actions)).copy()

    def action_probs(self, x, mu):
        return self._row.copy()

    def lipschitz_bound(self) -> float:
        return 0.0


class FixedActionPolicy:
    """Always plays one action (e.g. never-invest / always-invest)."""

    def __init__(self, n_states: int, n_actions: int, action: int):
        if not 0 <= action < n_actions:
            raise ValueError("action out of range")
        self.n_states, self.n_actions, self.action = n_states, n_actions, action

    def action_matrix(self, mu):
        m = np.zeros((self.n_states, self.n_actions))
        m[:, self.action] = 1.0
        return m

    def action_probs(self, x, mu):
        p = np.zeros(self.n_actions)
        p[self.action] = 1.0
        return p

    def lipschitz_bound(self) -> float:
        return 0.0


class TabularPolicy:
    """Fixed per-state action distributions, independent of mu."""

    def __init__(self, table: np.ndarray):
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != 2 or np.any(table < 0) or not np.allclose(table.sum(axis=1), 1.0):
            raise ValueError("table rows must be probability distributions")
        self.table = table / table.sum(axis=1, keepdims=True)
        self.n_states, self.n_actions = table.shape

    def action_matrix(self, mu):
        return self.table.copy()

    def action_probs(self, x, mu):
        return self.table[x].copy()

    def lipschitz_bound(self) -> float:
        return 0.0

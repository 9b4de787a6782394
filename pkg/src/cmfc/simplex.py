"""Probability-simplex vectors over finite state/action sets.

Dense float64 vectors; construction validates nonnegativity and absorbs
float drift up to 1e-9 in the total mass by renormalizing.  Instances are
immutable and safe to share across workers.
"""
from __future__ import annotations

import numpy as np

from . import backend

_SUM_TOL = 1e-9


class _Simplex:
    __slots__ = ("probs",)

    def __init__(self, probs):
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("distribution must be a nonempty 1-d vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("distribution entries must be finite and >= 0")
        total = p.sum()
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"distribution mass {total!r} deviates from 1 by more than {_SUM_TOL}")
        if total != 1.0:
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def _wrap(cls, p: np.ndarray):
        """Trusted constructor for internally-built exact simplex vectors."""
        self = object.__new__(cls)
        p = np.asarray(p, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        return self

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __len__(self):
        return self.probs.shape[0]

    def __eq__(self, other):
        return type(self) is type(other) and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"{type(self).__name__}({self.probs.tolist()})"

    def mean(self) -> float:
        """First moment treating index i as the value i."""
        return float(np.arange(len(self)) @ self.probs)


class StateDistribution(_Simplex):
    """Point on the simplex over state ids {0..|X|-1}."""


class ActionDistribution(_Simplex):
    """Point on the simplex over action ids {0..|U|-1}."""


def _empirical(ids, size: int, cls):
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("empty population")
    if np.any(ids < 0) or np.any(ids >= size):
        raise ValueError(f"invalid {'state' if cls is StateDistribution else 'action'}")
    counts = np.bincount(ids, minlength=size)
    return cls._wrap(counts / ids.size)


def empirical_state_dist(states, n_states: int) -> StateDistribution:
    """Empirical distribution of a population of state ids; exact counts / N."""
    return _empirical(states, n_states, StateDistribution)


def empirical_action_dist(actions, n_actions: int) -> ActionDistribution:
    return _empirical(actions, n_actions, ActionDistribution)


def l1_distance(a, b) -> float:
    pa, pb = a.probs, b.probs
    if pa.shape != pb.shape:
        raise ValueError(f"dimension mismatch: {pa.shape} vs {pb.shape}")
    return float(np.abs(pa - pb).sum())


def sample(dist, rng: np.random.Generator) -> int:
    """One index drawn with probability dist.probs[i]; consumes one uniform."""
    cdf = backend.make_cdf(dist.probs)
    return int(backend.categorical_indices(cdf, rng.random(1))[0])

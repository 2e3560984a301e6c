"""Edge-message dynamics of SI spreading and their linearisation.

``v[e]`` for ``e = i -> j`` is the probability that ``i`` has not yet passed
the rumour to ``j``; ``u = 1 - v`` is its complement.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, SourceIndicator, apply_R

ROUNDOFF = 1e-12
FULL_HISTORY_LIMIT = 1000


class InvariantViolation(ArithmeticError):
    """A computed probability left [0, 1] by more than round-off."""


@dataclass(frozen=True)
class MessageState:
    v: np.ndarray
    t: int

    @property
    def u(self) -> np.ndarray:
        return 1.0 - self.v


def _check_params(p, T):
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")


def _indicator(g, n):
    if isinstance(n, SourceIndicator):
        return n.n
    n = np.asarray(n, dtype=float)
    if n.shape != (g.node_count,):
        raise ValueError(f"indicator must have shape ({g.node_count},)")
    return n


def _passing(g: Graph, n: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``f_{i->j} = n_i * prod_{k in N(i)\\j} v_{k->i}``.

    Products are taken in log space over the nonzero factors, with zeros
    counted separately so that one zero factor can be excluded exactly.
    """
    idx = g.edge_index
    zero = v <= 0.0
    logs = np.log(np.where(zero, 1.0, v))
    node_log = np.bincount(idx.head, weights=logs, minlength=g.node_count)
    node_zeros = np.bincount(idx.head, weights=zero, minlength=g.node_count)
    # exclude the reciprocal message j -> i from the product at node i
    rec = idx.reciprocal
    excl_log = node_log[idx.tail] - logs[rec]
    excl_zeros = node_zeros[idx.tail] - zero[rec]
    prod = np.where(excl_zeros > 0, 0.0, np.exp(np.minimum(excl_log, 0.0)))
    return n[idx.tail] * prod


def _clamp(v: np.ndarray, t: int) -> np.ndarray:
    lo, hi = v.min(initial=0.0), v.max(initial=1.0)
    if lo < -ROUNDOFF or hi > 1.0 + ROUNDOFF:
        raise InvariantViolation(f"message probability outside [0, 1] at t={t}: [{lo}, {hi}]")
    return np.clip(v, 0.0, 1.0)


def evolve_nonlinear(g: Graph, n, p: float, T: int, full_history: bool | None = None) -> list[MessageState]:
    """Iterate the message-passing equations from ``v = 1`` for ``T`` steps.

    Each step convolves the whole history with the geometric infection-delay
    weights ``(1-p)^(tau-1) p``. Past ``FULL_HISTORY_LIMIT`` steps the
    equivalent recursion ``u' = (1-p) u + p (1 - f(v))`` is used instead,
    unless ``full_history`` forces a choice.
    """
    _check_params(p, T)
    n = _indicator(g, n)
    if full_history is None:
        full_history = T <= FULL_HISTORY_LIMIT
    dim = 2 * g.edge_count
    v = np.ones(dim)
    states = [MessageState(v, 0)]
    if full_history:
        weights = p * (1.0 - p) ** np.arange(T)  # weights[tau - 1]
        gaps = np.empty((T, dim))  # gaps[s] = 1 - f(v^(s))
        for t in range(1, T + 1):
            gaps[t - 1] = 1.0 - _passing(g, n, states[t - 1].v)
            # sum_{tau=1}^{t} w_tau * gap^(t - tau)
            u = weights[:t] @ gaps[t - 1::-1]
            states.append(MessageState(_clamp(1.0 - u, t), t))
    else:
        u = np.zeros(dim)
        for t in range(1, T + 1):
            u = (1.0 - p) * u + p * (1.0 - _passing(g, n, states[t - 1].v))
            states.append(MessageState(_clamp(1.0 - u, t), t))
    return states


def evolve_linear(g: Graph, n, p: float, T: int) -> list[np.ndarray]:
    """Linearised dynamics ``u' = p (1 - n) + u [(1-p) I + p R]`` from ``u = 0``.

    No clamping: linear iterates can exceed 1.
    """
    _check_params(p, T)
    n = _indicator(g, n)
    forcing = p * (1.0 - n[g.edge_index.tail])
    u = np.zeros(2 * g.edge_count)
    out = [u]
    for _ in range(T):
        u = forcing + (1.0 - p) * u + p * apply_R(g, n, u, side="left")
        out.append(u)
    return out


def survival_probabilities(g: Graph, state: MessageState | np.ndarray, n) -> np.ndarray:
    """``P_i = n_i * prod_{j in N(i)} v_{j->i}``: chance node ``i`` is still uninfected."""
    v = state.v if isinstance(state, MessageState) else np.asarray(state, dtype=float)
    P = _indicator(g, n).copy()
    np.multiply.at(P, g.edge_index.head, v)
    return P


def trajectory_norms(us, ord: int = 2) -> np.ndarray:
    if ord not in (1, 2):
        raise ValueError("ord must be 1 or 2")
    return np.array([np.linalg.norm(np.asarray(u, dtype=float), ord=ord) for u in us])


def message_fixed_point(g: Graph, n, max_iter: int = 100_000) -> np.ndarray:
    """Limit ``v`` of ``v_{i->j} = n_i prod_{k in N(i)\\j} v_{k->i}`` reached from ``v = 1``.

    Starting from all-ones the iteration is monotone, and each edge settles
    at 0 or 1 within ``2M`` sweeps.
    """
    n = _indicator(g, n)
    v = np.ones(2 * g.edge_count)
    for _ in range(max_iter):
        nxt = _passing(g, n, v)
        if np.array_equal(nxt, v):
            break
        v = nxt
    return v

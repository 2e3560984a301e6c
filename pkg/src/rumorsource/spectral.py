"""Dominant eigenvalues of nonbacktracking operators and the first-order
perturbation estimate used by PMSI."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .graph import Graph, apply_B, apply_R

DEFAULT_ITERS = 20
RESIDUAL_TOL = 1e-6
TINY = np.finfo(float).tiny


class DegenerateCandidate(ArithmeticError):
    """Perturbation estimate undefined: its denominator vanishes."""


@dataclass
class EigenPair:
    lam: float
    right: np.ndarray | None = None
    left: np.ndarray | None = None
    iterations: int = 0
    converged: bool = False


@dataclass
class BatchEstimate:
    """Per-column outcome of a batched power iteration."""

    lam: np.ndarray
    vectors: np.ndarray
    iterations: int
    collapse_step: np.ndarray  # step at which the iterate vanished, or -1
    last_ratio: np.ndarray     # last norm ratio before collapse
    converged: np.ndarray


def _col_norms(X: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->j", X, X))


def power_iteration_batch(op: Callable[[np.ndarray], np.ndarray], X0: np.ndarray,
                          iters: int = DEFAULT_ITERS, converge: bool = False,
                          rtol: float = 1e-13, max_iter: int = 20_000) -> BatchEstimate:
    """Power iteration on every column of ``X0`` at once.

    Each step applies ``op`` and rescales to unit Euclidean norm. The
    eigenvalue estimate is the geometric mean of the last two norm ratios,
    which damps period-two oscillation of imprimitive operators. A column
    whose image is exactly zero has collapsed (nilpotent case) and gets
    ``lam = 0`` with a zero vector.

    ``converge=True`` is meant for nonnegative operators. Plain steps continue
    until the column collapses or ``dim + 1`` steps have passed (a nilpotent
    operator must vanish by then). Survivors then iterate ``I + op``, whose
    Perron root strictly dominates even when ``op`` is periodic, until the
    estimate moves by less than ``rtol`` relative or ``max_iter`` steps.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    X = np.array(X0, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    dim, C = X.shape
    collapse = np.full(C, -1)
    last_ratio = np.zeros(C)
    lam = np.zeros(C)
    if dim == 0:
        return BatchEstimate(lam, X, 0, np.zeros(C, dtype=int), last_ratio, np.ones(C, dtype=bool))
    norms = _col_norms(X)
    alive = norms > TINY
    collapse[~alive] = 0
    X[:, alive] /= norms[alive]
    X[:, ~alive] = 0.0
    prev_ratio = np.zeros(C)
    plain_steps = max(iters, dim + 1) if converge else iters
    t = 0
    while t < plain_steps and alive.any():
        t += 1
        Y = op(X)
        norms = _col_norms(Y)
        died = alive & (norms <= TINY)
        collapse[died] = t
        alive &= ~died
        ratio = np.where(alive, norms, 0.0)
        lam = np.sqrt(ratio * prev_ratio) if t > 1 else ratio
        last_ratio[alive] = ratio[alive]
        X = Y * np.where(alive, 1.0 / np.where(alive, norms, 1.0), 0.0)
        prev_ratio = ratio
    if converge and alive.any():
        active = alive.copy()
        for _ in range(max_iter):
            t += 1
            Y = X + op(X)
            norms = _col_norms(Y)
            new = np.where(active, norms - 1.0, lam)
            X = np.where(active, Y / np.where(active, norms, 1.0), X)
            active &= np.abs(new - lam) > rtol * np.maximum(new, 1.0)
            lam = new
            if not active.any():
                break
    resid = np.linalg.norm(op(X) - lam * X, axis=0)
    converged = resid <= RESIDUAL_TOL * np.maximum(lam, 1.0)
    return BatchEstimate(lam, X, t, collapse, last_ratio, converged)


def power_iteration(op: Callable[[np.ndarray], np.ndarray], dim: int,
                    iters: int = DEFAULT_ITERS, converge: bool = False, **kw) -> EigenPair:
    """Dominant eigenvalue of a linear operator on ``R^dim``, starting from all-ones."""
    est = power_iteration_batch(lambda X: op(X[:, 0])[:, None], np.ones((dim, 1)),
                                iters=iters, converge=converge, **kw)
    return EigenPair(float(est.lam[0]), right=est.vectors[:, 0], iterations=est.iterations,
                     converged=bool(est.converged[0]))


def _fix_sign(x: np.ndarray) -> np.ndarray:
    if x.size and x[np.argmax(np.abs(x))] < 0:
        x = -x
    return x


def dominant_pair_B(g: Graph, iters: int = DEFAULT_ITERS, converge: bool = False) -> EigenPair:
    """Dominant eigenvalue of B with unit right (``Bu = lam u``) and left
    (``v^T B = lam v^T``) eigenvectors."""
    dim = 2 * g.edge_count
    right = power_iteration(lambda x: apply_B(g, x, "right"), dim, iters, converge)
    left = power_iteration(lambda x: apply_B(g, x, "left"), dim, iters, converge)
    return EigenPair(right.lam, _fix_sign(right.right), _fix_sign(left.right),
                     max(right.iterations, left.iterations), right.converged and left.converged)


def dominant_eigenvalue_R(g: Graph, sources: Iterable[int], iters: int = DEFAULT_ITERS,
                          converge: bool = False) -> float:
    n = np.ones(g.node_count)
    n[list(sources)] = 0.0
    return power_iteration(lambda x: apply_R(g, n, x, "right"), 2 * g.edge_count,
                           iters, converge).lam


def _denominator_floor(pair: EigenPair) -> float:
    return 1e-12 * max(float(pair.left @ pair.right), TINY)


def delta_lambda(pair: EigenPair, g: Graph, sources: Iterable[int]) -> float:
    """First-order estimate of ``lam_max(B) - lam_max(R_S)``.

    ``(v' dB u - v' dB u_S) / (v' u - v' u_S)`` where ``dB = B - R_S`` and
    ``u_S`` keeps only the entries of ``u`` on edges pointing into ``S``.
    """
    sources = sorted({int(s) for s in sources})
    if not sources:
        raise ValueError("candidate set must be non-empty")
    u, v = pair.right, pair.left
    n = np.ones(g.node_count)
    n[sources] = 0.0
    into_S = n[g.edge_index.head] == 0.0
    u_S = np.where(into_S, u, 0.0)

    def dB(x):
        return apply_B(g, x, "right") - apply_R(g, n, x, "right")

    num = v @ dB(u) - v @ dB(u_S)
    den = v @ u - v @ u_S
    if u.size == 0 or abs(den) <= _denominator_floor(pair):
        raise DegenerateCandidate(f"zero denominator for candidate {sources}")
    return float(num / den)


def delta_lambda_single(pair: EigenPair, g: Graph, s: int) -> float:
    """Single-source closed form ``sum_{i in N(s)} sum_{k in N(s)\\i} v_{i->s} u_{s->k}``
    over ``v'u - v'u_{->s}``, evaluated by direct summation."""
    idx = g.edge_index
    u, v = pair.right, pair.left
    nb = [int(x) for x in g.neighbors(s)]
    num = sum(v[idx.index(i, s)] * u[idx.index(s, k)] for i in nb for k in nb if k != i)
    den = v @ u - sum(v[idx.index(i, s)] * u[idx.index(i, s)] for i in nb)
    if u.size == 0 or abs(den) <= _denominator_floor(pair):
        raise DegenerateCandidate(f"zero denominator for candidate {s}")
    return float(num / den)


def delta_lambda_batch(pair: EigenPair, g: Graph, candidates: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``delta_lambda`` over a ``(C, s)`` array of candidate sets.

    Returns values and a degenerate mask (values there are ``nan``).
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.int64))
    C, s = candidates.shape
    if 2 * g.edge_count == 0:
        return np.full(C, np.nan), np.ones(C, dtype=bool)
    idx = g.edge_index
    u, v = pair.right, pair.left
    N = g.node_count
    v_in = np.bincount(idx.head, weights=v, minlength=N)        # sum_k v_{k->s}
    u_out = np.bincount(idx.tail, weights=u, minlength=N)       # sum_k u_{s->k}
    back = np.bincount(idx.head, weights=v * u[idx.reciprocal], minlength=N)  # sum_k v_{k->s} u_{s->k}
    overlap = np.bincount(idx.head, weights=v * u, minlength=N)  # sum_k v_{k->s} u_{k->s}
    node_term = v_in * u_out - back
    num = node_term[candidates].sum(axis=1)
    den = float(v @ u) - overlap[candidates].sum(axis=1)
    # terms s -> j with j also in S belong to u_S and drop out of the numerator
    for a in range(s):
        for b in range(s):
            if a == b:
                continue
            sa, sb = candidates[:, a], candidates[:, b]
            e = np.fromiter((idx.get(int(x), int(y)) for x, y in zip(sa, sb)), dtype=np.int64, count=C)
            adj = e >= 0
            if adj.any():
                ea = e[adj]
                num[adj] -= (v_in[sa[adj]] - v[idx.reciprocal[ea]]) * u[ea]
    degenerate = np.abs(den) <= _denominator_floor(pair)
    values = np.where(degenerate, np.nan, num / np.where(degenerate, 1.0, den))
    return values, degenerate

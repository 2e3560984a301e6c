"""Error distances between true and identified source sets."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .graph import Graph, bfs_distances


@dataclass(frozen=True)
class InstanceOutcome:
    exact: bool
    one_hop: bool
    error_distance: float
    matching: tuple[tuple[int, int], ...]


def snapshot_diameter(g: Graph) -> int:
    """Largest finite hop distance (0 for graphs without edges)."""
    from scipy.sparse.csgraph import shortest_path

    if g.edge_count == 0:
        return 0
    D = shortest_path(g.csr, unweighted=True, directed=False)
    return int(D[np.isfinite(D)].max())


def match_sources(true: Sequence[int], found: Sequence[int], g: Graph,
                  distances: np.ndarray | None = None,
                  unreachable_cost: float | None = None) -> tuple[float, tuple[tuple[int, int], ...]]:
    """Mean hop distance under the best one-to-one association.

    Exhaustive over permutations, so meant for a handful of sources. Pairs
    with no path cost ``unreachable_cost`` (default: diameter + 1).
    ``distances`` may supply rows of hop distances aligned with ``true``.
    Returns the normalised distance and ``(true, found)`` pairs.
    """
    true, found = list(true), list(found)
    if len(true) != len(found):
        raise ValueError(f"source sets differ in size: {len(true)} vs {len(found)}")
    if not true:
        raise ValueError("source sets must be non-empty")
    if distances is None:
        distances = np.array([bfs_distances(g, s) for s in true])
    cost = distances[:, found].astype(float)
    if not np.all(np.isfinite(cost)):
        if unreachable_cost is None:
            unreachable_cost = snapshot_diameter(g) + 1
        cost[~np.isfinite(cost)] = unreachable_cost
    k = len(true)
    best, best_perm = np.inf, None
    for perm in permutations(range(k)):
        total = cost[np.arange(k), perm].sum()
        if total < best:
            best, best_perm = total, perm
    pairs = tuple((true[i], found[j]) for i, j in enumerate(best_perm))
    return float(best / k), pairs


def evaluate_sources(true: Sequence[int], found: Sequence[int], g: Graph,
                     distances: np.ndarray | None = None,
                     unreachable_cost: float | None = None) -> InstanceOutcome:
    """Exact-hit, all-within-one-hop and mean-distance outcome of one identification."""
    if distances is None:
        distances = np.array([bfs_distances(g, s) for s in true])
    delta, pairs = match_sources(true, found, g, distances, unreachable_cost)
    pos = {s: i for i, s in enumerate(true)}
    hops = [distances[pos[a], b] for a, b in pairs]
    return InstanceOutcome(exact=sorted(true) == sorted(found),
                           one_hop=all(h <= 1 for h in hops),
                           error_distance=delta, matching=pairs)

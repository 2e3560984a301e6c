"""Source identification: MSI, PMSI and the Jordan-centre / rumour-centre baselines.

The estimators follow the scikit-learn conventions: hyper-parameters in
``__init__``, results in trailing-underscore attributes after ``fit``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, islice
from math import factorial, lgamma
from typing import Iterator

import numpy as np
from scipy.sparse.csgraph import breadth_first_order, shortest_path
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .graph import Graph, apply_B, connected_components, induced_subgraph
from .metrics import match_sources
from .spectral import DEFAULT_ITERS, delta_lambda_batch, dominant_pair_B, power_iteration_batch
from .validation import check_graph, check_iterations, check_source_count

TIE_TOL = 1e-9
CHUNK = 2048


@dataclass(frozen=True)
class CandidateScore:
    nodes: tuple[int, ...]
    score: float
    degenerate: bool = False


@dataclass
class IdentificationResult:
    method: str
    ranked: list[CandidateScore]
    chosen: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        self.chosen = self.ranked[0].nodes if self.ranked else ()


def enumerate_candidates(N: int, s: int) -> Iterator[tuple[int, ...]]:
    """All ``s``-subsets of ``range(N)`` in lexicographic order."""
    if not 1 <= s <= N:
        raise ValueError(f"need 1 <= s <= N, got s={s}, N={N}")
    return combinations(range(N), s)


def _chunks(N, s, size=CHUNK):
    it = enumerate_candidates(N, s)
    while True:
        block = list(islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), s)


def rank_candidates(candidates: np.ndarray, scores: np.ndarray, lower_is_better: bool,
                    degenerate: np.ndarray | None = None, secondary=None,
                    tol: float = TIE_TOL) -> np.ndarray:
    """Best-first order of candidate rows.

    Scores within ``tol`` (relative, floored at 1) of the first score of a run
    are tied; ties fall to ``secondary(i)`` if given, then to the
    lexicographically smallest candidate. Degenerate rows go last.
    """
    C = len(candidates)
    degenerate = np.zeros(C, dtype=bool) if degenerate is None else np.asarray(degenerate)
    valid = np.flatnonzero(~degenerate)
    keyed = scores[valid] if lower_is_better else -scores[valid]
    # lexsort: primary score, then candidate tuple, so equal scores come out deterministic
    order = valid[np.lexsort(tuple(candidates[valid].T[::-1]) + (keyed,))]
    out = []
    start = 0
    sk = scores[order] if lower_is_better else -scores[order]
    while start < len(order):
        stop = start + 1
        while stop < len(order) and sk[stop] - sk[start] <= tol * max(1.0, abs(sk[start])):
            stop += 1
        group = order[start:stop].tolist()
        if len(group) > 1:
            group.sort(key=lambda i: ((secondary(i),) if secondary else ()) + (tuple(candidates[i]),))
        out.extend(group)
        start = stop
    tail = np.flatnonzero(degenerate)
    tail = tail[np.lexsort(tuple(candidates[tail].T[::-1]))] if len(tail) else tail
    return np.array(out + tail.tolist(), dtype=np.int64)


def _distance_matrix(g: Graph) -> np.ndarray:
    return shortest_path(g.csr, unweighted=True, directed=False)


def _set_eccentricity(D: np.ndarray, nodes) -> float:
    return float(D[list(nodes)].min(axis=0).max())


def msi(g: Graph, s: int = 1, iters: int = DEFAULT_ITERS, converge: bool = False) -> IdentificationResult:
    """Pick the ``s`` sources whose removal from the nonbacktracking matrix
    leaves the smallest dominant eigenvalue.

    Ties go to the lexicographically smallest set. If every candidate reaches
    ``lam = 0`` (tree-like snapshots make every reduced matrix nilpotent) the
    candidates are instead ordered by how early the power iterate vanished,
    then by its last norm ratio, then by set eccentricity.
    """
    g = check_graph(g)
    s = check_source_count(s, g.node_count)
    iters = check_iterations(iters)
    blocks, lams, steps, ratios = [], [], [], []
    dim = 2 * g.edge_count
    for cand in _chunks(g.node_count, s):
        nmat = np.ones((g.node_count, len(cand)))
        nmat[cand, np.arange(len(cand))[:, None]] = 0.0
        n_head = nmat[g.edge_index.head]   # R x = n[head] * (B x), gathered once per chunk
        est = power_iteration_batch(lambda X: n_head * apply_B(g, X, "right"),
                                    np.ones((dim, len(cand))), iters=iters, converge=converge)
        blocks.append(cand)
        lams.append(est.lam)
        steps.append(est.collapse_step)
        ratios.append(est.last_ratio)
    cand = np.concatenate(blocks)
    lam = np.concatenate(lams)
    step = np.concatenate(steps)
    ratio = np.concatenate(ratios)
    secondary = None
    if not lam.any():
        D = _distance_matrix(g)

        def tree_key(i):
            return (int(step[i]), round(float(ratio[i]), 9), _set_eccentricity(D, cand[i]))
        secondary = tree_key

    order = rank_candidates(cand, lam, lower_is_better=True, secondary=secondary)
    ranked = [CandidateScore(tuple(int(x) for x in cand[i]), float(lam[i])) for i in order]
    return IdentificationResult("MSI", ranked)


def pmsi(g: Graph, s: int = 1, iters: int = DEFAULT_ITERS, converge: bool = False) -> IdentificationResult:
    """Rank candidate sets by the perturbation estimate of the eigenvalue drop
    their removal causes, using one eigenpair of B."""
    g = check_graph(g)
    s = check_source_count(s, g.node_count)
    pair = dominant_pair_B(g, check_iterations(iters), converge)
    cand = np.array(list(enumerate_candidates(g.node_count, s)), dtype=np.int64).reshape(-1, s)
    values, degenerate = delta_lambda_batch(pair, g, cand)
    order = rank_candidates(cand, values, lower_is_better=False, degenerate=degenerate)
    ranked = [CandidateScore(tuple(int(x) for x in cand[i]), float(values[i]), bool(degenerate[i]))
              for i in order]
    return IdentificationResult("PMSI", ranked)


def _largest_component(g: Graph) -> tuple[Graph, np.ndarray]:
    comps = connected_components(g)
    if not comps:
        raise ValueError("graph has no nodes")
    if len(comps) == 1:
        return g, np.arange(g.node_count)
    return induced_subgraph(g, max(comps, key=len))


def jordan_center(g: Graph) -> IdentificationResult:
    """Node of minimum eccentricity within the largest infected component."""
    g = check_graph(g)
    sub, ids = _largest_component(g)
    ecc = _distance_matrix(sub).max(axis=1)
    order = np.lexsort((ids, ecc))
    return IdentificationResult("JC", [CandidateScore((int(ids[i]),), float(ecc[i])) for i in order])


def bfs_tree_subtree_sizes(g: Graph, root: int) -> tuple[np.ndarray, np.ndarray]:
    """Subtree sizes and parents of the BFS tree rooted at ``root``.

    Neighbours are explored in ascending id and the first discoverer is the
    parent. Nodes outside the root's component get size 0 and parent -9999.
    """
    order, parent = breadth_first_order(g.csr, root, directed=True, return_predecessors=True)
    size = np.zeros(g.node_count, dtype=np.int64)
    size[order] = 1
    for v in order[:0:-1]:
        size[parent[v]] += size[v]
    return size, parent


def log_rumor_centrality(g: Graph, root: int) -> float:
    """``log(N! / prod_u T_u)`` on the BFS tree of ``root``'s component."""
    size, _ = bfs_tree_subtree_sizes(g, root)
    sizes = size[size > 0]
    return lgamma(len(sizes) + 1) - float(np.log(sizes).sum())


def rumor_centrality(g: Graph, root: int) -> int:
    """Exact ``N! / prod_u T_u`` on the BFS tree rooted at ``root``."""
    size, _ = bfs_tree_subtree_sizes(g, root)
    sizes = size[size > 0]
    denom = 1
    for x in sizes.tolist():
        denom *= x
    return factorial(len(sizes)) // denom


def rumor_center_bfs(g: Graph) -> IdentificationResult:
    """Maximise rumour centrality over per-root BFS trees of the largest component."""
    g = check_graph(g)
    sub, ids = _largest_component(g)
    scores = np.array([log_rumor_centrality(sub, r) for r in range(sub.node_count)])
    cand = ids[:, None]
    order = rank_candidates(cand, scores, lower_is_better=False)
    return IdentificationResult("RC-BFS", [CandidateScore((int(ids[i]),), float(scores[i])) for i in order])


class SourceIdentifier(BaseEstimator):
    """Shared ``fit`` / ``fit_predict`` / ``score`` for source identifiers."""

    method = ""

    def fit(self, X, y=None):
        """Identify sources on a snapshot; ``y`` is ignored."""
        g = check_graph(X)
        self.result_ = self._identify(g)
        self.sources_ = self.result_.chosen
        self.ranked_ = self.result_.ranked
        self.n_nodes_in_ = g.node_count
        return self

    def fit_predict(self, X, y=None) -> tuple[int, ...]:
        return self.fit(X).sources_

    def score(self, X, y) -> float:
        """Negative mean hop distance between fitted sources and ``y``."""
        check_is_fitted(self, "sources_")
        g = check_graph(X)
        delta, _ = match_sources(list(y), list(self.sources_), g)
        return -delta

    def _identify(self, g: Graph) -> IdentificationResult:
        raise NotImplementedError


class MSI(SourceIdentifier):
    """Minimum dominant eigenvalue of the reduced nonbacktracking matrix.

    Parameters
    ----------
    n_sources : int
        Size of the source set to identify.
    power_iters : int
        Power-iteration steps per candidate (the minimum when ``converge``).
    converge : bool
        Iterate until the eigenvalue estimates stop changing.
    """

    method = "MSI"

    def __init__(self, n_sources=1, power_iters=DEFAULT_ITERS, converge=False):
        self.n_sources = n_sources
        self.power_iters = power_iters
        self.converge = converge

    def _identify(self, g):
        return msi(g, self.n_sources, self.power_iters, self.converge)


class PMSI(SourceIdentifier):
    """Perturbation variant of :class:`MSI`; same parameters."""

    method = "PMSI"

    def __init__(self, n_sources=1, power_iters=DEFAULT_ITERS, converge=False):
        self.n_sources = n_sources
        self.power_iters = power_iters
        self.converge = converge

    def _identify(self, g):
        return pmsi(g, self.n_sources, self.power_iters, self.converge)


class JordanCenter(SourceIdentifier):
    method = "JC"

    def _identify(self, g):
        return jordan_center(g)


class RumorCenterBFS(SourceIdentifier):
    method = "RC-BFS"

    def _identify(self, g):
        return rumor_center_bfs(g)


METHODS = {"MSI": MSI, "PMSI": PMSI, "JC": JordanCenter, "RC-BFS": RumorCenterBFS}
SINGLE_SOURCE_ONLY = frozenset({"JC", "RC-BFS"})


def make_identifier(name: str, n_sources: int = 1, power_iters: int = DEFAULT_ITERS,
                    converge: bool = False) -> SourceIdentifier:
    key = name.upper()
    if key not in METHODS:
        raise ValueError(f"unknown method {name!r}; choose from {sorted(METHODS)}")
    if key in SINGLE_SOURCE_ONLY:
        if n_sources != 1:
            raise ValueError(f"{key} identifies a single source only")
        return METHODS[key]()
    return METHODS[key](n_sources=n_sources, power_iters=power_iters, converge=converge)

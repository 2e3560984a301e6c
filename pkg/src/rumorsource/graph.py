"""Undirected graphs, directed-edge indexing and matrix-free nonbacktracking operators."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph stored in CSR form.

    ``indices[indptr[i]:indptr[i + 1]]`` holds the sorted neighbours of node ``i``.
    """

    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def adjacency(self) -> list[tuple[int, ...]]:
        return [tuple(int(j) for j in self.neighbors(i)) for i in range(self.node_count)]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges ``(i, j)`` with ``i < j`` in sorted order."""
        idx = self.edge_index
        return list(zip(idx.tail[::2].tolist(), idx.head[::2].tolist()))

    @cached_property
    def edge_index(self) -> DirectedEdgeIndex:
        return DirectedEdgeIndex(self)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int8)
        n = self.node_count
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.indptr.tobytes(), self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(N={self.node_count}, M={self.edge_count})"


class DirectedEdgeIndex:
    """Bijection between ordered adjacent pairs ``i -> j`` and ``0 .. 2M-1``.

    Undirected edge number ``m`` (edges sorted by ``(min, max)``) owns indices
    ``2m`` for ``min -> max`` and ``2m + 1`` for ``max -> min``, so the
    reciprocal of ``e`` is ``e ^ 1``.
    """

    def __init__(self, graph: Graph):
        n = graph.node_count
        rows = np.repeat(np.arange(n), graph.degrees)
        cols = graph.indices
        upper = rows < cols
        lo, hi = rows[upper], cols[upper]  # already sorted by (lo, hi) thanks to CSR order
        m = len(lo)
        tail = np.empty(2 * m, dtype=np.int64)
        head = np.empty(2 * m, dtype=np.int64)
        tail[0::2], head[0::2] = lo, hi
        tail[1::2], head[1::2] = hi, lo
        self.node_count = n
        self.tail = tail
        self.head = head
        self.reciprocal = np.arange(2 * m) ^ 1
        for a in (self.tail, self.head, self.reciprocal):
            a.setflags(write=False)
        self._lookup = {(int(i), int(j)): e for e, (i, j) in enumerate(zip(tail, head))}

    def __len__(self) -> int:
        return len(self.tail)

    def index(self, i: int, j: int) -> int:
        try:
            return self._lookup[(i, j)]
        except KeyError:
            raise KeyError(f"{i} -> {j} is not an edge") from None

    def get(self, i: int, j: int, default: int = -1) -> int:
        return self._lookup.get((i, j), default)

    def pair(self, e: int) -> tuple[int, int]:
        return int(self.tail[e]), int(self.head[e])

    @cached_property
    def tail_incidence(self) -> sp.csr_matrix:
        """N x 2M matrix summing edge values by tail node."""
        return self._incidence(self.tail)

    @cached_property
    def head_incidence(self) -> sp.csr_matrix:
        """N x 2M matrix summing edge values by head node."""
        return self._incidence(self.head)

    def _incidence(self, nodes):
        e = len(nodes)
        return sp.csr_matrix((np.ones(e), (nodes, np.arange(e))), shape=(self.node_count, e))


class SourceIndicator:
    """Candidate source set ``S`` with the node indicator ``n`` (0 on sources, 1 elsewhere)."""

    def __init__(self, sources: Iterable[int], node_count: int):
        self.sources = tuple(sorted({int(s) for s in sources}))
        if not self.sources:
            raise ValueError("source set must be non-empty")
        if self.sources[0] < 0 or self.sources[-1] >= node_count:
            raise ValueError(f"sources {self.sources} outside 0..{node_count - 1}")
        self.node_count = node_count
        n = np.ones(node_count)
        n[list(self.sources)] = 0.0
        n.setflags(write=False)
        self.n = n

    def on_edges(self, idx: DirectedEdgeIndex) -> np.ndarray:
        """The edge-space indicator with ``n_{i->j} = n_i``."""
        return self.n[idx.tail]

    def __repr__(self):
        return f"SourceIndicator({list(self.sources)})"


def from_edge_list(pairs: Iterable[Sequence[int]], node_count: int | None = None) -> Graph:
    """Build a simple graph, dropping self-loops and duplicate edges.

    Ids between 0 and the largest id seen become nodes, isolated or not.
    ``node_count`` may extend that range with trailing isolated nodes.
    """
    arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
    if len(arr) and arr.min() < 0:
        raise ValueError("node ids must be nonnegative")
    n = int(arr.max()) + 1 if len(arr) else 0
    if node_count is not None:
        if node_count < n:
            raise ValueError(f"node_count={node_count} smaller than max id + 1 = {n}")
        n = node_count
    arr = arr[arr[:, 0] != arr[:, 1]]
    both = np.concatenate([arr, arr[:, ::-1]])
    both = np.unique(both, axis=0)  # sorted by (row, col)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, both[:, 0] + 1, 1)
    return Graph(np.cumsum(indptr), both[:, 1].copy())


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> tuple[Graph, np.ndarray]:
    """Subgraph on ``nodes`` relabelled ``0..k-1`` in ascending original id.

    Returns the subgraph and ``old_ids`` with ``old_ids[new] = old``.
    """
    old_ids = np.unique(np.fromiter((int(v) for v in nodes), dtype=np.int64))
    if len(old_ids) and (old_ids[0] < 0 or old_ids[-1] >= g.node_count):
        bad = [int(v) for v in old_ids if v < 0 or v >= g.node_count]
        raise ValueError(f"unknown node ids {bad}")
    new_id = np.full(g.node_count, -1, dtype=np.int64)
    new_id[old_ids] = np.arange(len(old_ids))
    idx = g.edge_index
    keep = (new_id[idx.tail] >= 0) & (new_id[idx.head] >= 0)
    pairs = np.stack([new_id[idx.tail[keep]], new_id[idx.head[keep]]], axis=1)
    return from_edge_list(pairs, node_count=len(old_ids)), old_ids


def bfs_distances(g: Graph, root: int) -> np.ndarray:
    """Hop distances from ``root``; ``inf`` marks unreachable nodes."""
    if not 0 <= root < g.node_count:
        raise ValueError(f"root {root} not in graph with {g.node_count} nodes")
    dist = np.full(g.node_count, np.inf)
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        d = dist[u] + 1
        for w in g.neighbors(u):
            if dist[w] == np.inf:
                dist[w] = d
                queue.append(w)
    return dist


def connected_components(g: Graph) -> list[np.ndarray]:
    """Components as sorted node arrays, ordered by their smallest node."""
    from scipy.sparse.csgraph import connected_components as cc

    if g.node_count == 0:
        return []
    _, labels = cc(g.csr, directed=False)
    order = np.argsort(labels, kind="stable")
    splits = np.flatnonzero(np.diff(labels[order])) + 1
    comps = np.split(order, splits)
    return sorted(comps, key=lambda c: c[0])


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _check_dim(idx: DirectedEdgeIndex, x: np.ndarray) -> None:
    if x.shape[0] != len(idx):
        raise ValueError(f"edge-space vector has length {x.shape[0]}, expected 2M={len(idx)}")


def apply_B(g: Graph, x, side: str = "right") -> np.ndarray:
    """Apply the nonbacktracking matrix without forming it.

    ``side="left"`` computes ``x B`` with ``(xB)_{i->j} = sum_{k in N(i)\\j} x_{k->i}``;
    ``side="right"`` computes ``B x`` with ``(Bx)_{k->l} = sum_{j in N(l)\\k} x_{l->j}``.
    ``x`` may also be a ``(2M, C)`` batch of column vectors.
    """
    _check_side(side)
    idx = g.edge_index
    x = np.asarray(x, dtype=float)
    _check_dim(idx, x)
    # reciprocal of e is e ^ 1, so reversing each (2m, 2m+1) pair avoids a gather
    back = x.reshape(-1, 2, *x.shape[1:])[:, ::-1].reshape(x.shape)
    if side == "left":
        # every in-edge of the tail, minus the reversed edge j -> i
        return (idx.head_incidence @ x)[idx.tail] - back
    return (idx.tail_incidence @ x)[idx.head] - back


def apply_R(g: Graph, n, x, side: str = "right") -> np.ndarray:
    """Apply the reduced matrix ``R_{k->l,i->j} = n_i B_{k->l,i->j}``.

    ``n`` is a ``SourceIndicator`` or a per-node 0/1 array; a ``(N, C)``
    array pairs one indicator with each column of a batched ``x``.
    """
    if isinstance(n, SourceIndicator):
        n = n.n
    n = np.asarray(n, dtype=float)
    if n.shape[0] != g.node_count:
        raise ValueError(f"indicator has length {n.shape[0]}, expected N={g.node_count}")
    idx = g.edge_index
    y = apply_B(g, x, side)
    if side == "left":
        return n[idx.tail] * y
    return n[idx.head] * y

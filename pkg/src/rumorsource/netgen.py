"""Network generators and SNAP-style edge-list loading."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .graph import Graph, connected_components, from_edge_list, induced_subgraph


class GraphFormatError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "small_world"
    n: int = 1000
    k: int = 4
    beta: float = 0.1
    rows: int = 20
    cols: int = 20
    path: str | None = None

    def validate(self) -> None:
        if self.kind == "small_world":
            _check_small_world(self.n, self.k, self.beta)
        elif self.kind == "lattice":
            _check_lattice(self.rows, self.cols)
        elif self.kind == "from_file":
            if not self.path:
                raise ValueError("from_file generator needs a path")
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")

    @property
    def is_random(self) -> bool:
        return self.kind == "small_world"

    def build(self, rng: np.random.Generator | None = None) -> Graph:
        self.validate()
        if self.kind == "small_world":
            return generate_small_world(self.n, self.k, self.beta, rng)
        if self.kind == "lattice":
            return generate_lattice(self.rows, self.cols)
        with open(self.path, encoding="utf-8") as fh:
            return largest_connected_component(load_snap_edge_list(fh))


def _check_small_world(n, k, beta):
    if k % 2 or not 0 < k < n:
        raise ValueError(f"small-world needs even k with 0 < k < n (got n={n}, k={k})")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")


def _check_lattice(rows, cols):
    if rows < 2 or cols < 2:
        raise ValueError(f"lattice needs rows, cols >= 2 (got {rows}x{cols})")


def generate_small_world(n: int, k: int = 4, beta: float = 0.1,
                         rng: np.random.Generator | int | None = None) -> Graph:
    """Watts-Strogatz graph.

    Start from a ring where each node links to its ``k/2`` nearest nodes on
    each side; then, ring distance by ring distance, move the far endpoint of
    each edge with probability ``beta`` to a uniformly chosen node that is
    neither the near endpoint nor already adjacent to it.
    """
    _check_small_world(n, k, beta)
    rng = np.random.default_rng(rng)
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= beta:
                continue
            if len(adj[u]) >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    break
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    pairs = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return from_edge_list(pairs, node_count=n)


def generate_lattice(rows: int, cols: int) -> Graph:
    """Non-periodic 2D grid with 4-neighbour links; node ``r * cols + c``."""
    _check_lattice(rows, cols)
    ids = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vertical = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    return from_edge_list(np.concatenate([horizontal, vertical]), node_count=rows * cols)


def parse_edge_lines(lines: Iterable[str]) -> list[tuple[int, int]]:
    """Integer pairs from whitespace-separated lines, skipping blanks and ``#`` comments."""
    pairs = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) < 2:
            raise GraphFormatError(f"expected two node ids, got {stripped!r}", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node id in {stripped!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError(f"negative node id in {stripped!r}", lineno)
        pairs.append((u, v))
    return pairs


def load_snap_edge_list(stream: TextIO | Iterable[str]) -> Graph:
    """Read an edge list, compacting ids to ``0..N-1`` by first appearance."""
    compact: dict[int, int] = {}
    pairs = []
    for u, v in parse_edge_lines(stream):
        a = compact.setdefault(u, len(compact))
        b = compact.setdefault(v, len(compact))
        pairs.append((a, b))
    return from_edge_list(pairs, node_count=len(compact))


def write_edge_list(g: Graph, stream: TextIO) -> None:
    for i, j in g.edges():
        stream.write(f"{i} {j}\n")


def largest_connected_component(g: Graph, return_nodes: bool = False):
    """Induced subgraph of the largest component.

    Ties go to the component holding the smallest node id.
    """
    comps = connected_components(g)
    if not comps:
        raise ValueError("graph has no nodes")
    best = max(comps, key=len)  # max keeps the first maximal one, i.e. smallest id
    sub, nodes = induced_subgraph(g, best)
    return (sub, nodes) if return_nodes else sub


def load_graph(path: str | Path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_snap_edge_list(fh)

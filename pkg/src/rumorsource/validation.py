"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import numpy as np

from .graph import Graph, from_edge_list
from .simulate import Snapshot


def check_graph(X, allow_empty: bool = False) -> Graph:
    """Coerce a ``Graph``, ``Snapshot``, networkx graph or ``(E, 2)`` edge array to ``Graph``."""
    if isinstance(X, Snapshot):
        g = X.graph
    elif isinstance(X, Graph):
        g = X
    elif hasattr(X, "nodes") and hasattr(X, "edges"):
        nodes = sorted(X.nodes())
        if nodes != list(range(len(nodes))):
            raise ValueError("networkx graphs must be labelled 0..N-1")
        g = from_edge_list(list(X.edges()), node_count=len(nodes))
    else:
        arr = np.asarray(X)
        if arr.ndim != 2 or arr.shape[1] != 2 or not np.issubdtype(arr.dtype, np.integer):
            raise TypeError("expected a Graph, Snapshot, networkx graph or an integer (E, 2) edge array")
        g = from_edge_list(arr)
    if not allow_empty and g.node_count == 0:
        raise ValueError("graph has no nodes")
    return g


def check_source_count(n_sources, node_count: int) -> int:
    if isinstance(n_sources, bool) or not isinstance(n_sources, (int, np.integer)):
        raise TypeError(f"n_sources must be an int, got {n_sources!r}")
    if not 1 <= n_sources <= node_count:
        raise ValueError(f"n_sources must lie in 1..{node_count}, got {n_sources}")
    return int(n_sources)


def check_iterations(iters) -> int:
    if isinstance(iters, bool) or not isinstance(iters, (int, np.integer)) or iters < 1:
        raise ValueError(f"power_iters must be a positive int, got {iters!r}")
    return int(iters)

"""Rumour-source identification on loopy networks via nonbacktracking spectra."""
from .graph import (DirectedEdgeIndex, Graph, SourceIndicator, apply_B, apply_R, bfs_distances,
                    from_edge_list, induced_subgraph)
from .identify import (MSI, PMSI, IdentificationResult, JordanCenter, RumorCenterBFS,
                       jordan_center, msi, pmsi, rumor_center_bfs)
from .netgen import generate_lattice, generate_small_world, largest_connected_component, load_snap_edge_list
from .simulate import Snapshot, SpreadConfig, simulate_si, take_snapshot

__version__ = "0.1.0"

__all__ = [
    "Graph", "DirectedEdgeIndex", "SourceIndicator", "from_edge_list", "induced_subgraph",
    "bfs_distances", "apply_B", "apply_R", "generate_small_world", "generate_lattice",
    "load_snap_edge_list", "largest_connected_component", "SpreadConfig", "Snapshot",
    "simulate_si", "take_snapshot", "msi", "pmsi", "jordan_center", "rumor_center_bfs",
    "MSI", "PMSI", "JordanCenter", "RumorCenterBFS", "IdentificationResult",
]

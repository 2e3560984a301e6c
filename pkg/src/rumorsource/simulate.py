"""Time-slotted SI spreading, snapshot extraction and snapshot files."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .graph import Graph, from_edge_list, induced_subgraph
from .netgen import GraphFormatError, parse_edge_lines


class UnderfilledSpread(RuntimeError):
    """The spread stopped short of the target size; ``trace`` holds what happened."""

    def __init__(self, message: str, trace: InfectionTrace):
        super().__init__(message)
        self.trace = trace


class InfeasibleSnapshot(ValueError):
    pass


@dataclass(frozen=True)
class SpreadConfig:
    p: float
    sources: tuple[int, ...]
    target_infected: int
    max_steps: int = 10_000
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(sorted({int(s) for s in self.sources})))
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if not self.sources:
            raise ValueError("at least one source is required")
        if self.target_infected < len(self.sources):
            raise ValueError("target_infected must be at least the number of sources")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")


@dataclass
class InfectionTrace:
    """Per-node infection step (``inf`` if never infected)."""

    infection_time: np.ndarray
    step_reached: int
    sources: tuple[int, ...]

    @property
    def infected(self) -> np.ndarray:
        return np.flatnonzero(np.isfinite(self.infection_time))

    def infected_at(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.infection_time <= t)


@dataclass
class Snapshot:
    """Observed infected subgraph.

    ``true_sources`` is ``None`` for snapshots without ground truth;
    ``node_ids`` maps snapshot ids back to the network the snapshot came from.
    """

    graph: Graph
    true_sources: tuple[int, ...] | None
    p: float
    node_ids: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.true_sources is not None:
            self.true_sources = tuple(sorted(int(s) for s in self.true_sources))
            if any(not 0 <= s < self.graph.node_count for s in self.true_sources):
                raise ValueError("true sources must be nodes of the snapshot graph")


def simulate_si(g: Graph, cfg: SpreadConfig) -> InfectionTrace:
    """Run synchronous SI dynamics until ``cfg.target_infected`` nodes are infected.

    In every step each node infected before that step tries each susceptible
    neighbour independently with probability ``p``.
    """
    if cfg.sources[-1] >= g.node_count or cfg.sources[0] < 0:
        raise ValueError(f"sources {cfg.sources} not in graph with {g.node_count} nodes")
    rng = np.random.default_rng(cfg.seed)
    idx = g.edge_index
    times = np.full(g.node_count, np.inf)
    times[list(cfg.sources)] = 0
    count = len(cfg.sources)
    t = 0
    while count < cfg.target_infected:
        if t >= cfg.max_steps:
            raise UnderfilledSpread(
                f"only {count} of {cfg.target_infected} nodes infected after {t} steps",
                InfectionTrace(times, t, cfg.sources))
        infected = np.isfinite(times)
        live = infected[idx.tail] & ~infected[idx.head]
        if not live.any():
            raise UnderfilledSpread(
                f"spread exhausted its component at {count} of {cfg.target_infected} nodes",
                InfectionTrace(times, t, cfg.sources))
        t += 1
        # one Bernoulli trial per (infected, susceptible) edge, in edge-index order
        hits = rng.random(int(live.sum())) < cfg.p
        newly = np.unique(idx.head[live][hits])
        times[newly] = t
        count += len(newly)
    return InfectionTrace(times, t, cfg.sources)


def is_si_feasible(g: Graph, times: np.ndarray, keep: np.ndarray, sources: Iterable[int]) -> bool:
    """Every kept non-source has a kept neighbour infected strictly earlier."""
    keep_mask = np.zeros(g.node_count, dtype=bool)
    keep_mask[keep] = True
    src = set(int(s) for s in sources)
    for v in np.flatnonzero(keep_mask):
        if int(v) in src:
            continue
        nb = g.neighbors(v)
        if not np.any(keep_mask[nb] & (times[nb] < times[v])):
            return False
    return True


def take_snapshot(g: Graph, trace: InfectionTrace, target_infected: int,
                  rng: np.random.Generator | int | None = None, p: float = float("nan")) -> Snapshot:
    """Induced infected subgraph with exactly ``target_infected`` nodes.

    When the last step overshoots, a uniform subset of the last-step infectees
    is kept. Nodes infected earlier are never dropped, so every kept node
    still has an earlier-infected kept neighbour.
    """
    rng = np.random.default_rng(rng)
    times = trace.infection_time
    infected = trace.infected
    if len(infected) < target_infected:
        raise InfeasibleSnapshot(f"trace has {len(infected)} infected nodes, need {target_infected}")
    last = times[infected].max() if len(infected) else 0
    earlier = infected[times[infected] < last]
    final = infected[times[infected] == last]
    room = target_infected - len(earlier)
    if room < 0 or (last == 0 and room < len(final)):
        raise InfeasibleSnapshot(
            f"cannot trim to {target_infected} nodes without dropping sources or earlier infectees")
    if room < len(final):
        final = np.sort(rng.choice(final, size=room, replace=False))
    keep = np.sort(np.concatenate([earlier, final]))
    if not is_si_feasible(g, times, keep, trace.sources):
        raise InfeasibleSnapshot("trimmed snapshot violates SI feasibility")
    sub, old_ids = induced_subgraph(g, keep)
    relabel = {int(o): n for n, o in enumerate(old_ids)}
    sources = tuple(relabel[s] for s in trace.sources)
    return Snapshot(sub, sources, p, old_ids)


def write_snapshot(snap: Snapshot, stream: TextIO) -> None:
    srcs = "?" if snap.true_sources is None else ",".join(map(str, snap.true_sources))
    stream.write(f"p={snap.p!r} sources={srcs} nodes={snap.graph.node_count}\n")
    for i, j in snap.graph.edges():
        stream.write(f"{i} {j}\n")


def read_snapshot(stream: TextIO | Iterable[str]) -> Snapshot:
    """Parse a snapshot file. Node ids are taken literally, not compacted."""
    lines = iter(stream)
    header = next(lines, "").strip()
    fields = {}
    for token in header.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise GraphFormatError(f"bad header token {token!r}", 1)
        fields[key] = value
    if "p" not in fields or "sources" not in fields:
        raise GraphFormatError("header must carry p=<float> and sources=<list|?>", 1)
    try:
        p = float(fields["p"])
        sources = None if fields["sources"] == "?" else tuple(
            int(s) for s in fields["sources"].split(",") if s)
        nodes = int(fields["nodes"]) if "nodes" in fields else None
    except ValueError as exc:
        raise GraphFormatError(f"bad header value: {exc}", 1) from None
    body = ["#"] + list(lines)  # keep line numbers aligned with the file
    pairs = parse_edge_lines(body)
    n = max([nodes or 0] + [max(e) + 1 for e in pairs] + [s + 1 for s in sources or ()])
    return Snapshot(from_edge_list(pairs, node_count=n), sources, p)

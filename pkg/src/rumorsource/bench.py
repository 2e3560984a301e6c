"""Monte-Carlo experiments: simulate, snapshot, identify, score, report."""
from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, bfs_distances
from .identify import METHODS, SINGLE_SOURCE_ONLY, make_identifier
from .metrics import evaluate_sources, snapshot_diameter
from .netgen import GeneratorSpec
from .simulate import Snapshot, SpreadConfig, UnderfilledSpread, simulate_si, take_snapshot

log = logging.getLogger(__name__)

AGGREGATE_COLUMNS = ("method", "accuracy", "one_hop_accuracy", "avg_error_distance")
INSTANCE_COLUMNS = ("instance", "method", "true_sources", "chosen", "exact", "one_hop", "error_distance")


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    p: float = 0.05
    target: int = 400
    max_steps: int = 10_000
    methods: tuple[str, ...] = ("MSI", "PMSI", "JC", "RC-BFS")
    instances: int = 100
    source_count: int = 1
    base_seed: int = 0
    power_iters: int = 20
    converge: bool = False
    distance: str = "snapshot"
    max_retries: int = 20
    workers: int = 1

    def validate(self) -> None:
        self.generator.validate()
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        if self.source_count < 1:
            raise ValueError("source_count must be >= 1")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.target < self.source_count:
            raise ValueError("target must be at least source_count")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {sorted(METHODS)}")
        if self.source_count != 1 and SINGLE_SOURCE_ONLY.intersection(self.methods):
            raise ValueError("JC and RC-BFS require source_count = 1")
        if self.distance not in ("snapshot", "full"):
            raise ValueError("distance must be 'snapshot' or 'full'")


_GENERATOR_KEYS = {"n": int, "k": int, "beta": float, "rows": int, "cols": int, "path": str}
_CONFIG_KEYS = {"p": float, "target": int, "max_steps": int, "instances": int, "source_count": int,
                "base_seed": int, "power_iters": int, "max_retries": int, "workers": int,
                "distance": str}


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Read ``key = value`` lines (``#`` comments allowed) into a config.

    Generator keys are ``generator`` (kind), ``n``, ``k``, ``beta``, ``rows``,
    ``cols`` and ``path``; ``methods`` is comma separated.
    """
    gen, top = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        try:
            if key == "generator":
                gen["kind"] = value
            elif key in _GENERATOR_KEYS:
                gen[key] = _GENERATOR_KEYS[key](value)
            elif key in _CONFIG_KEYS:
                top[key] = _CONFIG_KEYS[key](value)
            elif key == "methods":
                top[key] = tuple(m.strip().upper() for m in value.split(",") if m.strip())
            elif key == "converge":
                top[key] = _parse_bool(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: {exc}") from None
    cfg = ExperimentConfig(generator=GeneratorSpec(**gen), **top)
    cfg.validate()
    return cfg


@dataclass
class InstanceRecord:
    instance: int
    method: str
    true_sources: tuple[int, ...]
    chosen: tuple[int, ...]
    exact: bool
    one_hop: bool
    error_distance: float
    runtime: float = field(default=0.0, compare=False)


@dataclass
class MetricsReport:
    methods: tuple[str, ...]
    aggregates: dict[str, dict[str, float]]
    records: list[InstanceRecord]
    diameters: list[int]

    @property
    def mean_diameter(self) -> float:
        return float(np.mean(self.diameters)) if self.diameters else float("nan")

    def to_dict(self, timings: bool = False) -> dict:
        recs = []
        for r in self.records:
            d = asdict(r)
            d["true_sources"], d["chosen"] = list(r.true_sources), list(r.chosen)
            if not timings:
                d.pop("runtime")
            recs.append(d)
        return {"methods": list(self.methods), "aggregates": self.aggregates,
                "diameters": list(self.diameters), "mean_diameter": self.mean_diameter,
                "records": recs}

    @classmethod
    def from_dict(cls, data: dict) -> MetricsReport:
        recs = [InstanceRecord(**{**r, "true_sources": tuple(r["true_sources"]),
                                  "chosen": tuple(r["chosen"])}) for r in data["records"]]
        return cls(tuple(data["methods"]), data["aggregates"], recs, list(data["diameters"]))


def aggregate(records: list[InstanceRecord], methods) -> dict[str, dict[str, float]]:
    out = {}
    for m in methods:
        rs = [r for r in records if r.method == m]
        if not rs:
            continue
        out[m] = {"accuracy": float(np.mean([r.exact for r in rs])),
                  "one_hop_accuracy": float(np.mean([r.one_hop for r in rs])),
                  "avg_error_distance": float(np.mean([r.error_distance for r in rs]))}
    return out


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_snapshot(cfg: ExperimentConfig, instance: int, base: Graph | None = None
                    ) -> tuple[Graph, Snapshot]:
    """Draw one (network, snapshot) pair, retrying underfilled spreads with fresh seeds."""
    for attempt in range(cfg.max_retries + 1):
        ss = np.random.SeedSequence([cfg.base_seed, instance, attempt])
        net_ss, src_ss, spread_ss, trim_ss = ss.spawn(4)
        g = base if base is not None else cfg.generator.build(np.random.default_rng(net_ss))
        if g.node_count < cfg.target:
            raise ExperimentError(f"network has {g.node_count} nodes, fewer than target {cfg.target}")
        sources = np.random.default_rng(src_ss).choice(g.node_count, cfg.source_count, replace=False)
        spread = SpreadConfig(cfg.p, tuple(int(s) for s in sources), cfg.target,
                              cfg.max_steps, _seed_int(spread_ss))
        try:
            trace = simulate_si(g, spread)
        except UnderfilledSpread as exc:
            log.info("instance %d attempt %d underfilled: %s", instance, attempt, exc)
            continue
        return g, take_snapshot(g, trace, cfg.target, np.random.default_rng(trim_ss), cfg.p)
    raise ExperimentError(f"instance {instance}: spread underfilled {cfg.max_retries + 1} times")


def run_instance(cfg: ExperimentConfig, instance: int, base: Graph | None = None
                 ) -> tuple[list[InstanceRecord], int]:
    g, snap = sample_snapshot(cfg, instance, base)
    true = list(snap.true_sources)
    if cfg.distance == "full":
        space, to_space = g, snap.node_ids
    else:
        space, to_space = snap.graph, np.arange(snap.graph.node_count)
    true_space = [int(to_space[s]) for s in true]
    dist = np.array([bfs_distances(space, s) for s in true_space])
    unreachable = snapshot_diameter(snap.graph) + 1
    records = []
    for m in cfg.methods:
        est = make_identifier(m, cfg.source_count, cfg.power_iters, cfg.converge)
        start = time.perf_counter()
        chosen = est.fit_predict(snap)
        elapsed = time.perf_counter() - start
        out = evaluate_sources(true_space, [int(to_space[c]) for c in chosen], space, dist, unreachable)
        records.append(InstanceRecord(instance, m, tuple(true), tuple(chosen), out.exact,
                                      out.one_hop, out.error_distance, elapsed))
    return records, unreachable - 1


def _fixed_base(cfg):
    return None if cfg.generator.is_random else cfg.generator.build()


def _worker(args):
    cfg, instance, base = args
    return run_instance(cfg, instance, base)


def run_experiment(cfg: ExperimentConfig, progress=None) -> MetricsReport:
    """Run ``cfg.instances`` independent instances and aggregate their metrics.

    Each instance derives its seeds from ``(base_seed, instance, attempt)``,
    so results do not depend on ``workers`` or execution order.
    """
    cfg.validate()
    base = _fixed_base(cfg)
    jobs = [(cfg, i, base) for i in range(cfg.instances)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_worker, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_worker(job))
            if progress:
                progress(job[1])
    records = [r for recs, _ in results for r in recs]
    diameters = [d for _, d in results]
    return MetricsReport(tuple(cfg.methods), aggregate(records, cfg.methods), records, diameters)


def _fmt_set(nodes):
    return ";".join(map(str, nodes))


def export_report(report: MetricsReport, out_dir: str | Path, formats=("csv", "json"),
                  timings: bool = False) -> list[Path]:
    """Write ``aggregate.csv``, ``instances.csv`` and/or ``report.json`` into ``out_dir``.

    Runtimes are left out unless ``timings`` is set, so reruns are byte-identical.
    """
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            path = out_dir / "aggregate.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(AGGREGATE_COLUMNS)
                for m in report.methods:
                    if m in report.aggregates:
                        a = report.aggregates[m]
                        w.writerow([m, repr(a["accuracy"]), repr(a["one_hop_accuracy"]),
                                    repr(a["avg_error_distance"])])
            written.append(path)
            path = out_dir / "instances.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(INSTANCE_COLUMNS + (("runtime_s",) if timings else ()))
                for r in report.records:
                    row = [r.instance, r.method, _fmt_set(r.true_sources), _fmt_set(r.chosen),
                           int(r.exact), int(r.one_hop), repr(r.error_distance)]
                    w.writerow(row + ([repr(r.runtime)] if timings else []))
            written.append(path)
        if "json" in formats:
            path = out_dir / "report.json"
            path.write_text(json.dumps(report.to_dict(timings), indent=2) + "\n", encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report to {out_dir}: {exc}") from exc
    return written


def load_report(path: str | Path) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

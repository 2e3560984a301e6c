"""Command-line entry point: ``rumorsource {simulate,identify,bench,trajectory}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .bench import ExperimentError, export_report, parse_config, run_experiment
from .identify import make_identifier
from .message_passing import InvariantViolation, evolve_linear, evolve_nonlinear, trajectory_norms
from .netgen import GeneratorSpec, GraphFormatError
from .simulate import (InfeasibleSnapshot, SpreadConfig, UnderfilledSpread, read_snapshot,
                       simulate_si, take_snapshot, write_snapshot)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_graph_spec(text: str) -> GeneratorSpec:
    """``small_world:n=1000,k=4,beta=0.1``, ``lattice:rows=30,cols=30`` or a file path."""
    kind, _, params = text.partition(":")
    if kind not in ("small_world", "lattice"):
        if os.path.exists(text):
            return GeneratorSpec(kind="from_file", path=text)
        raise UsageError(f"--graph: {text!r} is neither a generator spec nor an existing file")
    kw = {}
    for item in filter(None, params.split(",")):
        key, sep, value = item.partition("=")
        if not sep or key not in ("n", "k", "beta", "rows", "cols"):
            raise UsageError(f"--graph: bad parameter {item!r}")
        try:
            kw[key] = float(value) if key == "beta" else int(value)
        except ValueError:
            raise UsageError(f"--graph: bad value in {item!r}") from None
    spec = GeneratorSpec(kind=kind, **kw)
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(f"--graph: {exc}") from None
    return spec


def cmd_simulate(args) -> int:
    spec = parse_graph_spec(args.graph)
    net_ss, src_ss, spread_ss, trim_ss = np.random.SeedSequence(args.seed).spawn(4)
    g = spec.build(np.random.default_rng(net_ss))
    if not 1 <= args.sources <= g.node_count or args.target > g.node_count:
        raise UsageError(f"need 1 <= sources <= target <= N = {g.node_count}")
    sources = np.random.default_rng(src_ss).choice(g.node_count, args.sources, replace=False)
    cfg = SpreadConfig(args.p, tuple(int(s) for s in sources), args.target, args.max_steps,
                       int(spread_ss.generate_state(1, dtype=np.uint64)[0]))
    trace = simulate_si(g, cfg)
    snap = take_snapshot(g, trace, args.target, np.random.default_rng(trim_ss), args.p)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_snapshot(snap, fh)
    print(f"snapshot: {snap.graph.node_count} nodes, {snap.graph.edge_count} edges, "
          f"sources {' '.join(map(str, snap.true_sources))} -> {args.out}")
    return EXIT_OK


def _read_snapshot(path):
    with open(path, encoding="utf-8") as fh:
        return read_snapshot(fh)


def cmd_identify(args) -> int:
    snap = _read_snapshot(args.snapshot)
    try:
        est = make_identifier(args.method, args.num_sources, args.power_iters, args.converge)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.num_sources > snap.graph.node_count:
        raise UsageError(f"--num-sources exceeds the {snap.graph.node_count} snapshot nodes")
    est.fit(snap)
    print(f"{est.method} sources: {' '.join(map(str, est.sources_))}")
    if args.out:
        payload = {"method": est.method, "chosen": list(est.sources_),
                   "ranked": [{"nodes": list(c.nodes), "score": c.score, "degenerate": c.degenerate}
                              for c in est.ranked_[:args.top]]}
        if snap.true_sources is not None:
            payload["true_sources"] = list(snap.true_sources)
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        text = fh.read()
    try:
        cfg = parse_config(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    report = run_experiment(cfg)
    export_report(report, args.out_dir, timings=args.timings)
    for m in report.methods:
        a = report.aggregates[m]
        print(f"{m:7s} acc={a['accuracy']:.3f} one_hop={a['one_hop_accuracy']:.3f} "
              f"err={a['avg_error_distance']:.3f}")
    print(f"mean snapshot diameter {report.mean_diameter:.2f}")
    return EXIT_OK


def _indicator_sets(args, snap, rng):
    """Yield ``(label, source set)`` for every requested ``--indicator``."""
    k = len(snap.true_sources) if snap.true_sources else args.num_sources
    random_count = 0
    for spec in args.indicator:
        if spec == "true":
            if snap.true_sources is None:
                raise UsageError("snapshot has no ground-truth sources for --indicator true")
            yield "true-source", snap.true_sources
        elif spec == "random":
            picks = rng.choice(snap.graph.node_count, k, replace=False)
            yield f"random-source-{random_count}", tuple(sorted(int(x) for x in picks))
            random_count += 1
        elif spec.startswith("node:"):
            try:
                nodes = tuple(int(x) for x in spec[5:].split("+"))
            except ValueError:
                raise UsageError(f"bad indicator {spec!r}") from None
            if any(not 0 <= v < snap.graph.node_count for v in nodes):
                raise UsageError(f"indicator {spec!r} names a node outside the snapshot")
            yield f"node-{'+'.join(map(str, nodes))}", nodes
        else:
            raise UsageError(f"bad indicator {spec!r}; use true, random or node:<id>")


def cmd_trajectory(args) -> int:
    snap = _read_snapshot(args.snapshot)
    p = args.p if args.p is not None else snap.p
    if not 0.0 < p < 1.0:
        raise UsageError("a spreading probability in (0, 1) is needed (snapshot header or --p)")
    modes = ("nonlinear", "linear") if args.mode == "both" else (args.mode,)
    rng = np.random.default_rng(args.seed)
    g = snap.graph
    rows = []
    for label, sources in _indicator_sets(args, snap, rng):
        n = np.ones(g.node_count)
        n[list(sources)] = 0.0
        for mode in modes:
            if mode == "linear":
                us = evolve_linear(g, n, p, args.steps)
            else:
                us = [s.u for s in evolve_nonlinear(g, n, p, args.steps)]
            for t, norm in enumerate(trajectory_norms(us, args.norm)):
                rows.append((t, repr(float(norm)), f"{label}/{mode}"))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "norm", "label"))
        w.writerows(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rumorsource", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="spread a rumour and write a snapshot file")
    s.add_argument("--graph", required=True, help="generator spec or edge-list file")
    s.add_argument("--p", type=float, default=0.05)
    s.add_argument("--sources", type=int, default=1, help="number of random sources")
    s.add_argument("--target", type=int, required=True, help="snapshot size")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-steps", type=int, default=10_000)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("identify", help="identify sources in a snapshot file")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--method", required=True, choices=["msi", "pmsi", "jc", "rc-bfs"])
    s.add_argument("--num-sources", type=int, default=1)
    s.add_argument("--power-iters", type=int, default=20)
    s.add_argument("--converge", action="store_true", help="iterate to convergence")
    s.add_argument("--top", type=int, default=10, help="ranked candidates kept in --out")
    s.add_argument("--out", help="JSON result file")
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("bench", help="run a Monte-Carlo experiment from a key=value config")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--timings", action="store_true", help="also export per-instance runtimes")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("trajectory", help="message-passing norm trajectories as CSV")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--indicator", action="append", default=None,
                   help="true, random or node:<id>[+<id>...]; repeatable")
    s.add_argument("--mode", choices=["linear", "nonlinear", "both"], default="nonlinear")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--p", type=float, help="override the snapshot's p")
    s.add_argument("--num-sources", type=int, default=1, help="set size for random indicators")
    s.add_argument("--norm", type=int, choices=[1, 2], default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_trajectory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "indicator", "") is None:
        args.indicator = ["true"]
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rumorsource: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, AssertionError) as exc:
        print(f"rumorsource: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (GraphFormatError, UnderfilledSpread, InfeasibleSnapshot, ExperimentError,
            ValueError, OSError) as exc:
        print(f"rumorsource: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

import time
from itertools import combinations
from math import comb

import networkx as nx
import numpy as np
import pytest
from sklearn.base import clone

from oracles import count_infection_orderings, dense_R, from_nx, nx_graph, random_graph, spectral_radius
from rumorsource.bench import ExperimentConfig, sample_snapshot
from rumorsource.graph import from_edge_list
from rumorsource.identify import (MSI, PMSI, JordanCenter, RumorCenterBFS, enumerate_candidates,
                                  jordan_center, make_identifier, msi, pmsi, rank_candidates,
                                  rumor_center_bfs, rumor_centrality)
from rumorsource.netgen import GeneratorSpec, generate_small_world


def graph(G):
    return from_nx(nx.convert_node_labels_to_integers(G))


def test_enumerate_small():
    assert list(enumerate_candidates(3, 1)) == [(0,), (1,), (2,)]
    pairs = list(enumerate_candidates(4, 2))
    assert len(pairs) == 6 and pairs[0] == (0, 1) and pairs[-1] == (2, 3)
    assert sum(1 for _ in enumerate_candidates(10, 3)) == 120


def test_enumerate_rejects():
    with pytest.raises(ValueError):
        enumerate_candidates(3, 4)


def test_rank_candidates_ties_and_degenerate():
    cands = np.array([[2], [0], [1], [3]])
    scores = np.array([1.0, 1.0 + 1e-12, 0.5, np.nan])
    order = rank_candidates(cands, scores, lower_is_better=False,
                            degenerate=np.array([False, False, False, True]))
    assert cands[order].ravel().tolist() == [0, 2, 1, 3]


def test_msi_bowtie(bowtie):
    res = msi(bowtie)
    assert res.chosen == (2,)
    lam = {c.nodes: c.score for c in res.ranked}
    assert lam[(2,)] == 0.0
    for s in (0, 1, 3, 4):
        n = np.ones(5)
        n[s] = 0
        assert spectral_radius(dense_R(bowtie, n)) == pytest.approx(1.0)
        assert lam[(s,)] > 0.5
    n = np.ones(5)
    n[2] = 0
    assert spectral_radius(dense_R(bowtie, n)) == pytest.approx(0.0, abs=1e-12)


def test_pmsi_bowtie_converged(bowtie):
    assert pmsi(bowtie, converge=True).chosen == (2,)


def test_cycle_ties_break_to_zero():
    g = graph(nx.cycle_graph(6))
    res = msi(g)
    assert res.chosen == (0,)
    assert np.ptp([c.score for c in res.ranked]) <= 1e-12
    res = pmsi(g)
    assert res.chosen == (0,)
    assert np.ptp([c.score for c in res.ranked]) <= 1e-12


@pytest.mark.parametrize("G", [nx.cycle_graph(7), nx.complete_graph(5), nx.petersen_graph(),
                               nx.hypercube_graph(3)])
def test_vertex_transitive_all_methods_pick_zero(G):
    g = graph(G)
    for method in (msi, pmsi, jordan_center, rumor_center_bfs):
        assert method(g).chosen == (0,)


def test_msi_minimum_is_first():
    rng = np.random.default_rng(3)
    g = random_graph(rng, connected=True)
    res = msi(g, 2)
    assert len(res.ranked) == comb(g.node_count, 2)
    assert all(res.ranked[0].score <= c.score + 1e-9 for c in res.ranked)


@pytest.mark.parametrize("seed", range(6))
def test_msi_matches_dense_argmin(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, min_nodes=5, max_nodes=10, connected=True, cyclic=True)
    for s in (1, 2):
        cands = list(combinations(range(g.node_count), s))
        lam = []
        for c in cands:
            n = np.ones(g.node_count)
            n[list(c)] = 0
            lam.append(spectral_radius(dense_R(g, n)))
        best = min(lam)
        expected = next(c for c, l in zip(cands, lam) if l <= best + 1e-7 * max(1, best))
        assert msi(g, s, converge=True).chosen == expected


def test_msi_tree_fallback():
    # on a tree every reduced matrix is nilpotent; the centre keeps iterates alive the shortest
    g = graph(nx.path_graph(7))
    res = msi(g)
    assert all(c.score == 0.0 for c in res.ranked)
    assert res.chosen == (3,)


def test_msi_pmsi_deterministic():
    g = generate_small_world(40, 4, 0.2, rng=5)
    assert msi(g).ranked == msi(g).ranked
    assert pmsi(g, 2).ranked == pmsi(g, 2).ranked


def test_pmsi_agrees_with_msi_often():
    cfg = ExperimentConfig(generator=GeneratorSpec("small_world", n=200, k=4, beta=0.1),
                           p=0.1, target=20, instances=100, base_seed=3)
    agree = 0
    for i in range(100):
        _, snap = sample_snapshot(cfg, i)
        agree += msi(snap.graph).chosen == pmsi(snap.graph).chosen
    print(f"PMSI/MSI agreement: {agree}/100")
    assert agree >= 60


@pytest.mark.parametrize("G, node, ecc", [(nx.path_graph(5), 2, 2), (nx.star_graph(5), 0, 1),
                                          (nx.cycle_graph(6), 0, 3)])
def test_jordan_center(G, node, ecc):
    res = jordan_center(graph(G))
    assert res.chosen == (node,) and res.ranked[0].score == ecc


def test_jordan_center_uses_largest_component():
    g = from_edge_list([(0, 1), (2, 3), (3, 4), (4, 5), (5, 6)])
    assert jordan_center(g).chosen == (4,)
    assert rumor_center_bfs(g).chosen == (4,)


def test_rumor_centrality_star():
    g = graph(nx.star_graph(3))
    assert rumor_centrality(g, 0) == 6
    assert rumor_centrality(g, 1) == 2
    assert rumor_center_bfs(g).chosen == (0,)


def test_rumor_centrality_path():
    g = graph(nx.path_graph(3))
    assert [rumor_centrality(g, r) for r in range(3)] == [1, 2, 1]
    assert rumor_center_bfs(g).chosen == (1,)


@pytest.mark.parametrize("N", range(2, 7))
def test_rumor_centrality_counts_orderings(N):
    for T in nx.nonisomorphic_trees(N):
        g = graph(T)
        G = nx_graph(g)
        for r in range(N):
            assert rumor_centrality(g, r) == count_infection_orderings(G, r)


def test_rumor_centrality_log_scores_finite():
    g = generate_small_world(60, 4, 0.3, rng=2)
    assert np.all(np.isfinite([c.score for c in rumor_center_bfs(g).ranked]))


def test_msi_complexity_smoke():
    cfg = ExperimentConfig(generator=GeneratorSpec("small_world", n=1000, k=4, beta=0.1),
                           p=0.05, target=400, instances=1, base_seed=0)
    _, snap = sample_snapshot(cfg, 0)
    start = time.perf_counter()
    msi(snap.graph)
    assert time.perf_counter() - start < 10.0


def test_estimator_params_roundtrip():
    est = MSI(n_sources=2, power_iters=30)
    assert est.get_params() == {"n_sources": 2, "power_iters": 30, "converge": False}
    twin = clone(est).set_params(converge=True)
    assert twin.converge and not est.converge


def test_estimators_fit_predict(bowtie):
    for est in (MSI(), PMSI(converge=True), JordanCenter(), RumorCenterBFS()):
        assert est.fit_predict(bowtie) == (2,)
        assert est.sources_ == (2,) and est.ranked_[0].nodes == (2,)
        assert est.score(bowtie, [2]) == 0.0
        assert est.score(bowtie, [0]) == -1.0


def test_estimator_accepts_networkx_and_arrays():
    G = nx.cycle_graph(6)
    assert MSI().fit_predict(G) == (0,)
    assert MSI().fit_predict(np.array(list(G.edges()))) == (0,)


def test_estimator_validation(bowtie):
    with pytest.raises(ValueError):
        MSI(n_sources=9).fit(bowtie)
    with pytest.raises(ValueError):
        MSI(power_iters=0).fit(bowtie)
    with pytest.raises(TypeError):
        MSI().fit("not a graph")
    with pytest.raises(ValueError):
        make_identifier("JC", n_sources=2)
    with pytest.raises(ValueError):
        make_identifier("nope")

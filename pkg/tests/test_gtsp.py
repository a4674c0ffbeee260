import json
import math

import numpy as np
import pytest

from mtbound.bounds import IntervalNode
from mtbound.graph import ClusteredGraph
from mtbound.gtsp import (
    MAX_EXACT_CLUSTERS,
    NotFound,
    TooLarge,
    TooManyClusters,
    solve_bruteforce,
    solve_exact,
    solve_heuristic,
)

from conftest import random_cluster_graph


def _graph(cluster_sizes, W):
    nodes = [IntervalNode(0, 0, 0.0, 0.0)]
    clusters = {}
    for c, size in enumerate(cluster_sizes, start=1):
        clusters[c] = list(range(len(nodes), len(nodes) + size))
        nodes += [IntervalNode(len(nodes) + k, c, 0.0, 1.0) for k in range(size)]
    nodes.append(IntervalNode(len(nodes), 0, 0.0, math.inf))
    return ClusteredGraph(tuple(nodes), clusters, 0, len(nodes) - 1, np.asarray(W, dtype=float), "t", 0.0)


INF = math.inf


def test_single_node():
    g = _graph([1], [[INF, 2, INF], [INF, INF, 3], [INF, INF, INF]])
    for solver in (solve_exact, solve_bruteforce):
        sol = solver(g)
        assert sol.cost == 5 and sol.node_sequence == (0, 1, 2) and sol.edge_costs == (2.0, 3.0)
    h = solve_heuristic(g)
    assert h.cost == 5 and not h.exact


def test_unreachable_cluster():
    W = np.full((5, 5), INF)
    W[0, 1] = W[1, 3] = 1.0
    W[2, 3] = 1.0  # cluster 2 has no incoming edge
    g = _graph([1, 1], W)
    assert solve_exact(g) is None
    assert solve_bruteforce(g) is None
    with pytest.raises(NotFound):
        solve_heuristic(g)


def test_picks_best_node_and_order():
    # clusters {1,2} and {3}; best is 0 -> 2 -> 3 -> 4
    W = np.full((5, 5), INF)
    W[0, 1], W[0, 2], W[0, 3] = 1, 2, 1
    W[1, 3], W[2, 3] = 5, 1
    W[3, 1], W[3, 2] = 9, 9
    W[1, 4], W[2, 4], W[3, 4] = 1, 1, 1
    g = _graph([2, 1], W)
    sol = solve_exact(g)
    assert sol.node_sequence == (0, 2, 3, 4) and sol.cost == 4
    assert sol.cluster_sequence == (1, 2)


def test_tie_break_lexicographic():
    # two equal-cost tours; the one through node 1 wins
    W = np.full((4, 4), INF)
    W[0, 1] = W[0, 2] = 1
    W[1, 3] = W[2, 3] = 1
    g = _graph([2], W)
    assert solve_exact(g).node_sequence == (0, 1, 3)
    assert solve_bruteforce(g).node_sequence == (0, 1, 3)


def test_matches_bruteforce(rng):
    for _ in range(60):
        g = random_cluster_graph(rng, int(rng.integers(1, 6)), 4)
        a, b = solve_exact(g), solve_bruteforce(g)
        if b is None:
            assert a is None
            continue
        assert a.cost == b.cost and a.node_sequence == b.node_sequence


def test_matches_bruteforce_real_costs(rng):
    for _ in range(30):
        g = random_cluster_graph(rng, 5, 3, integer=False)
        a, b = solve_exact(g), solve_bruteforce(g)
        assert (a is None) == (b is None)
        if a is not None:
            assert a.cost == pytest.approx(b.cost, abs=1e-9)


def test_solution_invariants(rng):
    g = random_cluster_graph(rng, 6, 4, p_inf=0.05)
    sol = solve_exact(g)
    seq = sol.node_sequence
    assert seq[0] == g.depot_out and seq[-1] == g.depot_in
    assert sorted(sol.cluster_sequence) == sorted(g.clusters)
    assert all(math.isfinite(c) for c in sol.edge_costs)
    assert abs(sum(sol.edge_costs) - sol.cost) <= 1e-9
    assert sol.stats["states_expanded"] > 0
    doc = json.loads(sol.dumps())
    assert doc["sequence"] == list(seq) and doc["cost"] == sol.cost


def test_heuristic_not_better_than_exact(rng):
    for _ in range(40):
        g = random_cluster_graph(rng, int(rng.integers(1, 7)), 4, integer=False)
        ex = solve_exact(g)
        if ex is None:
            continue
        try:
            h = solve_heuristic(g, "default", seed=1)
        except NotFound:
            continue
        assert h.cost >= ex.cost - 1e-9
        assert sorted(h.cluster_sequence) == sorted(g.clusters)


def test_heuristic_deterministic(rng):
    g = random_cluster_graph(rng, 8, 4, p_inf=0.05, integer=False)
    assert solve_heuristic(g, seed=3) == solve_heuristic(g, seed=3)
    with pytest.raises(ValueError):
        solve_heuristic(g, "extreme")


def test_too_many_clusters(rng):
    g = random_cluster_graph(rng, MAX_EXACT_CLUSTERS + 1, 1)
    with pytest.raises(TooManyClusters) as exc:
        solve_exact(g)
    assert exc.value.n == MAX_EXACT_CLUSTERS + 1 and "heuristic" in str(exc.value)


def test_bruteforce_too_large(rng):
    with pytest.raises(TooLarge):
        solve_bruteforce(random_cluster_graph(rng, 8, 1))


def test_raising_an_edge_never_lowers_optimum(rng):
    for _ in range(10):
        g = random_cluster_graph(rng, 4, 3, p_inf=0.05, integer=False)
        base = solve_exact(g)
        if base is None:
            continue
        finite = np.argwhere(np.isfinite(g.weights))
        for u, v in finite[rng.choice(len(finite), 8, replace=False)]:
            W = g.weights.copy()
            W[u, v] += rng.uniform(0.1, 5.0)
            g2 = ClusteredGraph(g.nodes, g.clusters, g.depot_out, g.depot_in, W, "t", 0.0)
            sol = solve_exact(g2)
            assert sol is None or sol.cost >= base.cost - 1e-12

"""Generalized TSP over a clustered graph: exact subset DP, brute force, heuristic.

A tour starts at ``depot_out``, visits exactly one node of every cluster and
ends at ``depot_in``.  Infinite weights mark missing or infeasible edges.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

MAX_EXACT_CLUSTERS = 16
TIE_TOL = 1e-9


class TooManyClusters(ValueError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"{n} clusters exceeds the exact solver limit of {MAX_EXACT_CLUSTERS}; "
                         "use a coarser discretization, fewer targets, or the heuristic solver")


class TooLarge(ValueError):
    pass


class NotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class GtspSolution:
    node_sequence: tuple
    cost: float
    exact: bool
    cluster_sequence: tuple
    edge_costs: tuple
    stats: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"cost": self.cost, "exact": self.exact, "sequence": list(self.node_sequence),
                "targets": list(self.cluster_sequence), "edge_costs": list(self.edge_costs),
                "stats": dict(self.stats)}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def _cluster_lists(graph):
    tids = sorted(graph.clusters)
    return tids, [np.asarray(graph.clusters[t], dtype=np.int64) for t in tids]


def make_solution(graph, seq, exact: bool, stats=None) -> GtspSolution:
    W = graph.weights
    costs = tuple(float(W[u, v]) for u, v in zip(seq, seq[1:]))
    total = 0.0
    for c in costs:
        total += c
    tid = tuple(graph.nodes[u].target_id for u in seq[1:-1])
    return GtspSolution(tuple(int(u) for u in seq), total, exact, tid, costs, stats or {})


def solve_exact(graph) -> Optional[GtspSolution]:
    """Optimal tour by dynamic programming over (visited clusters, last node).

    ``G[S, v]`` is the cheapest completion from node ``v`` once the clusters in
    ``S`` are visited.  Among optimal tours the lexicographically smallest node
    sequence is returned.  None means no tour with all-finite edges exists.
    """
    t0 = time.perf_counter()
    tids, members = _cluster_lists(graph)
    n = len(tids)
    if n > MAX_EXACT_CLUSTERS:
        raise TooManyClusters(n)
    W = graph.weights
    d_out, d_in = graph.depot_out, graph.depot_in
    if n == 0:
        c = W[d_out, d_in]
        return None if math.isinf(c) else make_solution(graph, [d_out, d_in], True)
    full = (1 << n) - 1
    N = W.shape[0]
    cl = np.full(N, -1, dtype=np.int64)
    for k, m in enumerate(members):
        cl[m] = k
    G = np.full((full + 1, N), np.inf)
    allnodes = np.concatenate(members)
    G[full, allnodes] = W[allnodes, d_in]
    expanded = len(allnodes)
    for S in range(full - 1, 0, -1):
        ins = [k for k in range(n) if S >> k & 1]
        outs = [k for k in range(n) if not S >> k & 1]
        vin = np.concatenate([members[k] for k in ins])
        vout = np.concatenate([members[k] for k in outs])
        nxt = G[S | (1 << cl[vout]), vout]
        G[S, vin] = np.min(W[np.ix_(vin, vout)] + nxt[None, :], axis=1)
        expanded += len(vin) * len(vout)
    start = W[d_out, allnodes] + G[1 << cl[allnodes], allnodes]
    if not np.isfinite(start).any():
        return None

    # forward walk, picking the smallest node id among near-best moves
    seq = [d_out]
    best = start.min()
    u = int(allnodes[start <= best + TIE_TOL].min())
    S = 1 << cl[u]
    seq.append(u)
    while S != full:
        vout = np.concatenate([members[k] for k in range(n) if not S >> k & 1])
        val = W[u, vout] + G[S | (1 << cl[vout]), vout]
        b = val.min()
        u = int(vout[val <= b + TIE_TOL].min())
        S |= 1 << cl[u]
        seq.append(u)
    seq.append(d_in)
    stats = {"states_expanded": int(expanded), "wall_seconds": time.perf_counter() - t0}
    return make_solution(graph, seq, True, stats)


def solve_bruteforce(graph) -> Optional[GtspSolution]:
    """Enumerate every cluster order and node choice (test oracle)."""
    t0 = time.perf_counter()
    tids, members = _cluster_lists(graph)
    n = len(tids)
    if n > 7 or any(len(m) > 6 for m in members):
        raise TooLarge(f"brute force supports at most 7 clusters of at most 6 nodes")
    W = graph.weights
    d_out, d_in = graph.depot_out, graph.depot_in
    tours = []
    count = 0
    for perm in itertools.permutations(range(n)):
        for choice in itertools.product(*[members[k] for k in perm]):
            seq = (d_out, *(int(c) for c in choice), d_in)
            total = 0.0
            for a, b in zip(seq, seq[1:]):
                total += W[a, b]
            count += 1
            if math.isfinite(total):
                tours.append((total, seq))
    if not tours:
        return None
    best = min(t for t, _ in tours)
    seq = min(s for t, s in tours if t <= best + TIE_TOL)
    return make_solution(graph, list(seq), True,
                         {"states_expanded": count, "wall_seconds": time.perf_counter() - t0})


# ---------------------------------------------------------------------------
# heuristic


class _OrderEvaluator:
    """Best node selection for a fixed cluster order via a layered shortest path."""

    def __init__(self, graph):
        self.W = graph.weights
        self.d_out, self.d_in = graph.depot_out, graph.depot_in
        self.tids, self.members = _cluster_lists(graph)
        self.calls = 0

    def cost(self, order) -> float:
        self.calls += 1
        W, mem = self.W, self.members
        if not order:
            return float(W[self.d_out, self.d_in])
        cur = W[self.d_out, mem[order[0]]]
        for a, b in zip(order, order[1:]):
            cur = np.min(cur[:, None] + W[np.ix_(mem[a], mem[b])], axis=0)
        return float(np.min(cur + W[mem[order[-1]], self.d_in]))

    def nodes(self, order) -> list:
        W, mem = self.W, self.members
        layers = [W[self.d_out, mem[order[0]]]]
        back = []
        for a, b in zip(order, order[1:]):
            tot = layers[-1][:, None] + W[np.ix_(mem[a], mem[b])]
            back.append(np.argmin(tot, axis=0))
            layers.append(np.min(tot, axis=0))
        k = int(np.argmin(layers[-1] + W[mem[order[-1]], self.d_in]))
        picks = [k]
        for bk in reversed(back):
            k = int(bk[k])
            picks.append(k)
        picks.reverse()
        return [self.d_out] + [int(mem[c][i]) for c, i in zip(order, picks)] + [self.d_in]


def cheapest_insertion(evaluate, n: int) -> Optional[list]:
    """Grow an order over ``range(n)`` by the cheapest finite insertion."""
    order = []
    left = list(range(n))
    while left:
        best = (math.inf, None, None)
        for c in left:
            for pos in range(len(order) + 1):
                val = evaluate(order[:pos] + [c] + order[pos:])
                if val < best[0]:
                    best = (val, c, pos)
        if best[1] is None:
            return None
        order.insert(best[2], best[1])
        left.remove(best[1])
    return order


def nearest_neighbor(evaluate, n: int) -> Optional[list]:
    order = []
    left = list(range(n))
    while left:
        vals = [evaluate(order + [c]) for c in left]
        k = int(np.argmin(vals))
        if math.isinf(vals[k]):
            return None
        order.append(left.pop(k))
    return order


def _neighbors(order):
    n = len(order)
    for i in range(n - 1):
        for j in range(i + 2, n + 1):
            yield order[:i] + order[i:j][::-1] + order[j:]
    for i in range(n):
        rest = order[:i] + order[i + 1:]
        for j in range(n):
            if j != i:
                yield rest[:j] + [order[i]] + rest[j:]
    for i in range(n - 1):
        for j in range(i + 1, n):
            o = list(order)
            o[i], o[j] = o[j], o[i]
            yield o


def local_search(order: list, evaluate, max_passes: Optional[int] = None):
    """First-improvement descent over 2-opt, relocate and swap moves."""
    best = evaluate(order)
    passes = 0
    improved = True
    while improved and (max_passes is None or passes < max_passes):
        improved = False
        passes += 1
        for cand in _neighbors(order):
            val = evaluate(cand)
            if val < best - 1e-12:
                order, best = cand, val
                improved = True
                break
    return order, best


def solve_heuristic(graph, effort: str = "default", seed: int = 0) -> GtspSolution:
    """Cheapest insertion over clusters then local search; raises NotFound if no finite tour."""
    if effort not in ("fast", "default", "thorough"):
        raise ValueError(f"unknown effort {effort!r}")
    t0 = time.perf_counter()
    ev = _OrderEvaluator(graph)
    n = len(ev.tids)
    if n == 0:
        if math.isinf(ev.cost([])):
            raise NotFound("depot legs are infeasible")
        return make_solution(graph, [graph.depot_out, graph.depot_in], False)
    rng = np.random.default_rng(seed)
    starts = []
    for build in (cheapest_insertion, nearest_neighbor):
        o = build(ev.cost, n)
        if o is not None and math.isfinite(ev.cost(o)):
            starts.append(o)
            break
    restarts = {"fast": 4, "default": 16, "thorough": 64}[effort]
    tries = 0
    while (not starts or effort == "thorough") and tries < restarts:
        o = [int(x) for x in rng.permutation(n)]
        tries += 1
        if not starts:
            o, val = local_search(o, ev.cost, 1 if effort == "fast" else None)
            if math.isfinite(val):
                starts.append(o)
        else:
            starts.append(o)
    if not starts:
        raise NotFound("no finite tour found; try more samples per target")
    best_order, best_val = None, math.inf
    for o in starts:
        o, val = local_search(o, ev.cost, 1 if effort == "fast" else None)
        if val < best_val:
            best_order, best_val = o, val
    if math.isinf(best_val):
        raise NotFound("no finite tour found; try more samples per target")
    stats = {"orders_evaluated": ev.calls, "wall_seconds": time.perf_counter() - t0}
    return make_solution(graph, ev.nodes(best_order), False, stats)

"""Partition time windows into intervals and build the clustered graph."""

from __future__ import annotations

import json
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .bounds import (
    DEPOT,
    IntervalNode,
    SamplingParams,
    Variant,
    edge_cost,
    sft_geometric,
    sft_linear,
    sft_sampling,
    sft_to_depot,
)
from .kinematics import FEAS_TOL
from .model import Instance, ParseError

GRAPH_VERSION = 1
LEVELS = {1: 5.0, 2: 2.5, 3: 1.25, 4: 0.625}


class VariantUnsupported(ValueError):
    def __init__(self, variant, kind):
        self.variant = variant
        self.kind = kind
        super().__init__(f"variant {variant} needs piecewise-linear trajectories (instance kind {kind})")


def delta_for_level(level: int) -> float:
    try:
        return LEVELS[int(level)]
    except KeyError:
        raise ValueError(f"level must be one of {sorted(LEVELS)}, got {level}") from None


@dataclass
class ClusteredGraph:
    nodes: tuple
    clusters: dict
    depot_out: int
    depot_in: int
    weights: np.ndarray
    variant: str
    delta: float
    build_seconds: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def cluster_of(self) -> np.ndarray:
        out = np.full(len(self.nodes), -1, dtype=np.int64)
        for k, tid in enumerate(sorted(self.clusters)):
            out[self.clusters[tid]] = k
        out[self.depot_in] = -2
        return out

    def edge_pairs(self):
        """All structurally present edges, sorted."""
        tgt = [n.node_id for n in self.nodes if not n.is_depot]
        by = {nid: self.nodes[nid].target_id for nid in tgt}
        out = [(self.depot_out, v) for v in tgt]
        for u in tgt:
            out.extend((u, v) for v in tgt if by[u] != by[v])
            out.append((u, self.depot_in))
        return sorted(out)

    @property
    def edges(self) -> dict:
        out = {}
        for u, v in self.edge_pairs():
            w = self.weights[u, v]
            out[(u, v)] = None if math.isinf(w) else float(w)
        return out

    def cost(self, u: int, v: int) -> Optional[float]:
        w = self.weights[u, v]
        return None if math.isinf(w) else float(w)


def partition(inst: Instance, delta: float) -> dict:
    """Split every window into ``delta``-wide intervals; returns ``{target_id: [IntervalNode]}``.

    Boundaries are ``lo + k*delta`` so halving ``delta`` nests the intervals.
    Node ids run from 1 in (target, window, interval) order.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    out = {}
    nid = 1
    for tgt in inst.targets:
        nodes = []
        for w_idx, w in enumerate(tgt.windows):
            count = max(1, math.ceil((w.hi - w.lo) / delta - 1e-9))
            if abs(count * delta - (w.hi - w.lo)) > 1e-9:
                warnings.warn(f"window {w_idx} of target {tgt.id} is not a multiple of delta={delta}; "
                              "last interval is shorter", stacklevel=2)
            for k in range(count):
                lo = w.lo + k * delta
                hi = w.hi if k == count - 1 else min(w.lo + (k + 1) * delta, w.hi)
                nodes.append(IntervalNode(nid, tgt.id, lo, hi, w_idx))
                nid += 1
        out[tgt.id] = nodes
    return out


def _node_arrays(inst: Instance, nodes):
    lo = np.array([n.t_lo for n in nodes])
    hi = np.array([n.t_hi for n in nodes])
    p_lo = np.array([inst.target(n.target_id).position_at(n.t_lo) for n in nodes]).reshape(-1, 2)
    p_hi = np.array([inst.target(n.target_id).position_at(n.t_hi) for n in nodes]).reshape(-1, 2)
    return lo, hi, p_lo, p_hi


def reach_matrix(src, t0, dst, t1, v):
    d = np.hypot(dst[..., 0] - src[..., 0], dst[..., 1] - src[..., 1])
    return (t1 >= t0) & (d <= v * (t1 - t0) + FEAS_TOL)


def _bound_one(args):
    inst, p, q, variant, params = args
    if variant is Variant.GEOMETRIC:
        return sft_geometric(p, q, inst)
    if variant is Variant.SAMPLING:
        return sft_sampling(p, q, inst, params)
    return sft_linear(p, q, inst)


def _bound_chunk(args):
    inst, pairs, variant, params = args
    return [_bound_one((inst, p, q, variant, params)) for p, q in pairs]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MTBOUND_THREADS", "1")))
    except ValueError:
        return 1


def build(inst: Instance, delta: float, variant, params: SamplingParams = SamplingParams()) -> ClusteredGraph:
    """Build the clustered graph with gated edge costs for ``variant``."""
    variant = Variant(variant)
    if variant is Variant.LINEAR and not inst.is_linear:
        raise VariantUnsupported(variant.value, inst.kind.value)
    t0 = time.perf_counter()
    g = _skeleton(inst, delta, variant)
    nodes = g.nodes
    tnodes = nodes[1:-1]
    m = len(tnodes)
    W = g.weights

    # row 0 is the depot pinned at time 0, then the target nodes
    lo, hi, p_lo, p_hi = _node_arrays(inst, tnodes)
    dep = np.array(inst.depot, dtype=float)
    src_lo = np.vstack([dep, p_lo])
    src_hi = np.vstack([dep, p_hi])
    s_tlo = np.concatenate([[0.0], lo])
    s_thi = np.concatenate([[0.0], hi])
    tid = np.array([n.target_id for n in tnodes])
    s_tid = np.concatenate([[DEPOT], tid])

    feasible = reach_matrix(src_lo[:, None, :], s_tlo[:, None], p_hi[None, :, :], hi[None, :], inst.v_max)
    trivial = reach_matrix(src_hi[:, None, :], s_thi[:, None], p_lo[None, :, :], lo[None, :], inst.v_max)
    present = s_tid[:, None] != tid[None, :]
    block = np.full((m + 1, m), np.inf)
    triv = present & feasible & trivial
    block[triv] = (lo[None, :] - s_thi[:, None])[triv]
    todo = present & feasible & ~trivial
    if variant is Variant.LITE:
        block[todo] = np.maximum(lo[None, :] - s_thi[:, None], 0.0)[todo]
    else:
        rows, cols = np.nonzero(todo)
        pairs = [(nodes[r], tnodes[c]) for r, c in zip(rows, cols)]
        vals = _evaluate(inst, pairs, variant, params)
        block[rows, cols] = [np.inf if x is None else x for x in vals]
    W[: m + 1, 1 : m + 1] = block
    for k, n in enumerate(tnodes):
        W[k + 1, m + 1] = sft_to_depot(n, inst)

    g.build_seconds = time.perf_counter() - t0
    return g


def _skeleton(inst: Instance, delta: float, variant: Variant) -> ClusteredGraph:
    clusters = partition(inst, delta)
    tnodes = [n for tid in sorted(clusters) for n in clusters[tid]]
    m = len(tnodes)
    nodes = (IntervalNode(0, DEPOT, 0.0, 0.0), *tnodes, IntervalNode(m + 1, DEPOT, 0.0, math.inf))
    return ClusteredGraph(
        nodes=nodes,
        clusters={t: [n.node_id for n in ns] for t, ns in clusters.items()},
        depot_out=0,
        depot_in=m + 1,
        weights=np.full((m + 2, m + 2), np.inf),
        variant=variant.value,
        delta=float(delta),
    )


def _evaluate(inst, pairs, variant, params):
    workers = _threads()
    if workers <= 1 or len(pairs) < 256:
        return [_bound_one((inst, p, q, variant, params)) for p, q in pairs]
    size = math.ceil(len(pairs) / (4 * workers))
    chunks = [(inst, pairs[i : i + size], variant, params) for i in range(0, len(pairs), size)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return [x for part in ex.map(_bound_chunk, chunks) for x in part]


def reference_build(inst: Instance, delta: float, variant, params: SamplingParams = SamplingParams()) -> ClusteredGraph:
    """Edge-by-edge build through :func:`edge_cost`; slow, used to cross-check :func:`build`."""
    g = _skeleton(inst, delta, Variant(variant))
    for u, v in g.edge_pairs():
        c = edge_cost(g.nodes[u], g.nodes[v], inst, variant, params)
        g.weights[u, v] = np.inf if c is None else c
    return g


# ---------------------------------------------------------------------------
# dump / load


def _num(x: float):
    return None if math.isinf(x) else x


def to_dict(g: ClusteredGraph) -> dict:
    return {
        "version": GRAPH_VERSION,
        "variant": g.variant,
        "delta": g.delta,
        "depot_out": g.depot_out,
        "depot_in": g.depot_in,
        "nodes": [{"id": n.node_id, "target": n.target_id, "t_lo": n.t_lo, "t_hi": _num(n.t_hi),
                   "window": n.window} for n in g.nodes],
        "edges": [[u, v, c] for (u, v), c in sorted(g.edges.items())],
    }


def dumps(g: ClusteredGraph) -> str:
    return json.dumps(to_dict(g), indent=1) + "\n"


def dump(g: ClusteredGraph, path) -> None:
    Path(path).write_text(dumps(g), encoding="utf-8")


def from_dict(doc: dict) -> ClusteredGraph:
    if not isinstance(doc, dict) or "version" not in doc:
        raise ParseError("version", detail="missing")
    if doc["version"] != GRAPH_VERSION:
        raise ParseError("version", detail=f"unsupported version {doc['version']!r}")
    try:
        nodes = tuple(IntervalNode(int(d["id"]), int(d["target"]), float(d["t_lo"]),
                                   math.inf if d["t_hi"] is None else float(d["t_hi"]),
                                   int(d.get("window", -1))) for d in doc["nodes"])
        W = np.full((len(nodes), len(nodes)), np.inf)
        for u, v, c in doc["edges"]:
            W[int(u), int(v)] = np.inf if c is None else float(c)
        clusters = {}
        for n in nodes:
            if not n.is_depot:
                clusters.setdefault(n.target_id, []).append(n.node_id)
        return ClusteredGraph(nodes, clusters, int(doc["depot_out"]), int(doc["depot_in"]), W,
                              str(doc["variant"]), float(doc["delta"]))
    except KeyError as exc:
        raise ParseError(str(exc.args[0]), detail="missing") from exc


def loads(text: str) -> ClusteredGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("json", exc.lineno, exc.msg) from exc
    return from_dict(doc)


def load_graph(path) -> ClusteredGraph:
    return loads(Path(path).read_text(encoding="utf-8"))

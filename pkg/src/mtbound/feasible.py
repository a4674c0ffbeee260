"""Feasible tours (upper bounds) for an instance.

The pipeline samples each target's windows at discrete instants, runs the
cluster heuristic on the resulting point graph, then re-times the chosen
visit order with exact earliest arrivals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bounds import DEPOT, IntervalNode
from .geometry import dist
from .graph import ClusteredGraph, reach_matrix
from .gtsp import NotFound, cheapest_insertion, local_search, solve_heuristic
from .kinematics import efat_trajectory
from .model import Instance

RESTARTS = {"fast": 0, "default": 4, "thorough": 32}


@dataclass(frozen=True)
class FeasibleTour:
    visit_order: tuple
    arrival_times: tuple
    window_choice: tuple
    completion_time: float

    def to_dict(self) -> dict:
        return {"order": list(self.visit_order), "arrivals": list(self.arrival_times),
                "windows": list(self.window_choice), "completion_time": self.completion_time}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "FeasibleTour":
        return cls(tuple(int(x) for x in d["order"]), tuple(float(x) for x in d["arrivals"]),
                   tuple(int(x) for x in d["windows"]), float(d["completion_time"]))


def check_tour(inst: Instance, tour: FeasibleTour, tol: float = 1e-7) -> list:
    """Return a list of problems with ``tour``; empty means it is realizable."""
    problems = []
    if sorted(tour.visit_order) != [t.id for t in inst.targets]:
        problems.append("order does not visit every target exactly once")
        return problems
    pos, t = inst.depot, 0.0
    for tid, a, w in zip(tour.visit_order, tour.arrival_times, tour.window_choice):
        tgt = inst.target(tid)
        win = tgt.windows[w]
        if not (win.lo - tol <= a <= win.hi + tol):
            problems.append(f"target {tid}: arrival {a} outside window {w}")
        p = tgt.position_at(min(max(a, tgt.trajectory.t_start), tgt.trajectory.t_end))
        if not (a >= t - tol and dist(pos, p) <= inst.v_max * (a - t) + tol):
            problems.append(f"target {tid}: travel infeasible")
        pos, t = p, a
    end = t + dist(pos, inst.depot) / inst.v_max
    if abs(end - tour.completion_time) > tol:
        problems.append(f"completion {tour.completion_time} != {end}")
    return problems


def _allocate(counts_total: int, durations: Sequence[float]) -> list:
    """Split ``counts_total`` samples across windows by largest remainder."""
    total = sum(durations)
    raw = [counts_total * d / total for d in durations]
    out = [int(math.floor(r)) for r in raw]
    rest = counts_total - sum(out)
    order = sorted(range(len(raw)), key=lambda k: (-(raw[k] - out[k]), k))
    for k in order[:rest]:
        out[k] += 1
    return out


def sample_times(inst: Instance, target_id: int, samples: int) -> list:
    """``(time, window index)`` sample points spread evenly over the target's windows."""
    wins = inst.target(target_id).windows
    out = []
    for w_idx, (w, c) in enumerate(zip(wins, _allocate(samples, [w.duration for w in wins]))):
        if c == 1:
            out.append((0.5 * (w.lo + w.hi), w_idx))
        elif c > 1:
            out.extend((float(t), w_idx) for t in np.linspace(w.lo, w.hi, c))
    return out


def sample_point_graph(inst: Instance, samples_per_target: int) -> ClusteredGraph:
    """Clustered graph whose nodes are trajectory points and edges are waiting-inclusive times."""
    if samples_per_target < 1:
        raise ValueError("samples_per_target must be >= 1")
    nodes = [IntervalNode(0, DEPOT, 0.0, 0.0)]
    clusters = {}
    for tgt in inst.targets:
        ids = []
        for t, w in sample_times(inst, tgt.id, samples_per_target):
            ids.append(len(nodes))
            nodes.append(IntervalNode(len(nodes), tgt.id, t, t, w))
        clusters[tgt.id] = ids
    m = len(nodes) - 1
    nodes.append(IntervalNode(m + 1, DEPOT, 0.0, math.inf))

    tn = nodes[1 : m + 1]
    t = np.array([n.t_lo for n in tn])
    P = np.array([inst.target(n.target_id).position_at(n.t_lo) for n in tn]).reshape(-1, 2)
    tid = np.array([n.target_id for n in tn])
    src = np.vstack([np.array(inst.depot, dtype=float), P])
    st = np.concatenate([[0.0], t])
    stid = np.concatenate([[DEPOT], tid])
    ok = reach_matrix(src[:, None, :], st[:, None], P[None, :, :], t[None, :], inst.v_max)
    ok &= stid[:, None] != tid[None, :]
    W = np.full((m + 2, m + 2), np.inf)
    W[: m + 1, 1 : m + 1] = np.where(ok, t[None, :] - st[:, None], np.inf)
    W[1 : m + 1, m + 1] = np.hypot(P[:, 0] - inst.depot[0], P[:, 1] - inst.depot[1]) / inst.v_max
    return ClusteredGraph(tuple(nodes), clusters, 0, m + 1, W, "points", 0.0)


def reoptimize_arrivals(inst: Instance, order: Sequence[int], partial: bool = False) -> Optional[FeasibleTour]:
    """Minimum-completion timing for a fixed visit order.

    Keeps, for every window of the current target, the earliest arrival
    reachable through any window chain.  Departing later never allows an
    earlier arrival downstream, so these states dominate.  Returns None when
    no window chain is feasible.  ``partial`` allows a subset of targets.
    """
    order = list(order)
    if len(set(order)) != len(order) or (not partial and sorted(order) != [t.id for t in inst.targets]):
        raise ValueError("order must visit every target exactly once")
    v = inst.v_max
    # each state: (arrival, position, back pointer)
    layer = [(0.0, inst.depot, None)]
    history = []
    for tid in order:
        tgt = inst.target(tid)
        nxt = []
        for w in tgt.windows:
            best = (math.inf, None, None)
            for k, (a, pos, _) in enumerate(layer):
                if a is None:
                    continue
                e = efat_trajectory(pos, a, tgt.trajectory, w.lo, w.hi, v)
                if e is not None and e < best[0]:
                    best = (e, tgt.position_at(e), k)
            nxt.append(best if best[1] is not None else (None, None, None))
        history.append(nxt)
        layer = nxt
    finals = [(a + dist(pos, inst.depot) / v, k) for k, (a, pos, _) in enumerate(layer) if a is not None]
    if not finals:
        return None
    completion, k = min(finals)
    arrivals, windows = [], []
    for step in reversed(history):
        a, _, back = step[k]
        arrivals.append(a)
        windows.append(k)
        k = back
    arrivals.reverse()
    windows.reverse()
    return FeasibleTour(tuple(order), tuple(arrivals), tuple(windows), completion)


LATE_WEIGHT = 1e4


def penalized_completion(inst: Instance, order) -> float:
    """Completion time for feasible orders, else a large multiple of total lateness.

    Infeasible orders are timed greedily, arriving late where a window cannot
    be met, so local search still has a gradient to follow.
    """
    v = inst.v_max
    pos, t, late = inst.depot, 0.0, 0.0
    for tid in order:
        tgt = inst.target(tid)
        traj = tgt.trajectory
        arrive = [e for w in tgt.windows
                  if (e := efat_trajectory(pos, t, traj, w.lo, w.hi, v)) is not None]
        if arrive:
            e = min(arrive)
        else:
            e = efat_trajectory(pos, t, traj, t, traj.t_end, v)
            if e is None:
                e = traj.t_end
                late += inst.horizon
            late += max(e - max(w.hi for w in tgt.windows), 0.0)
        pos, t = tgt.position_at(e), e
    if late > 0.0:
        return LATE_WEIGHT * (1.0 + late)
    tour = reoptimize_arrivals(inst, order, partial=True)
    return tour.completion_time


def find_feasible(inst: Instance, samples_per_target: int = 32, effort: str = "default") -> Optional[FeasibleTour]:
    """Heuristic feasible tour, or None when none is found (which does not prove infeasibility).

    Candidate orders come from the point-graph heuristic, cheapest insertion,
    a window-sorted order and seeded random permutations; each is polished by
    local search on :func:`penalized_completion` and then re-timed exactly.
    """
    ids = [t.id for t in inst.targets]

    def score(idx_order):
        return penalized_completion(inst, [ids[i] for i in idx_order])

    starts = []
    try:
        sol = solve_heuristic(sample_point_graph(inst, samples_per_target), effort)
        starts.append([ids.index(t) for t in sol.cluster_sequence])
    except NotFound:
        starts.append(cheapest_insertion(score, len(ids)))
    first = [min(w.lo for w in inst.target(i).windows) for i in ids]
    starts.append(sorted(range(len(ids)), key=lambda k: (first[k], k)))
    rng = np.random.default_rng(0)
    starts += [[int(x) for x in rng.permutation(len(ids))] for _ in range(RESTARTS[effort])]
    best, best_val = None, math.inf
    for o in starts:
        if effort != "fast":
            o, val = local_search(o, score)
        else:
            val = score(o)
        if val < best_val:
            best, best_val = o, val
        if effort == "fast" and best_val < LATE_WEIGHT:
            break
    if best is None or best_val >= LATE_WEIGHT:
        return None
    return reoptimize_arrivals(inst, [ids[i] for i in best])


def feasible_from_lower_bound(inst: Instance, lb) -> Optional[FeasibleTour]:
    """Re-time the lower-bound tour's target order; None if no feasible timing exists."""
    return reoptimize_arrivals(inst, list(lb.cluster_sequence))


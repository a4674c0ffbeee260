"""Edge costs between trajectory intervals: trivial-case gates and four SFT bounds.

Every function here returns a cost in seconds or ``None`` for an infeasible
edge.  The bounds never exceed the true shortest feasible travel time.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

from .geometry import LinePiece, Point2, min_distance_piece_sets, point_piece_set_distance
from .kinematics import (
    PairCoeffs,
    efat_bisect,
    efat_trajectory,
    lfdt_trajectory,
    reachable,
    sft_stationary_points,
)
from .model import Instance

log = logging.getLogger(__name__)

DEPOT = 0
MEET_TOL = 1e-7
_DEDUPE = 1e-12


class Variant(str, enum.Enum):
    LITE = "lite"
    GEOMETRIC = "geometric"
    SAMPLING = "sampling"
    LINEAR = "linear"


class Gate(enum.Enum):
    INFEASIBLE = "infeasible"
    TRIVIAL = "trivial"
    BOUND = "needs_bounding"


@dataclass(frozen=True)
class IntervalNode:
    node_id: int
    target_id: int
    t_lo: float
    t_hi: float
    window: int = -1

    @property
    def is_depot(self) -> bool:
        return self.target_id == DEPOT


@dataclass(frozen=True)
class SamplingParams:
    k: int = 10
    eps: float = 0.05

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


def _traj(inst: Instance, node: IntervalNode):
    return inst.target(node.target_id).trajectory


def _pos(inst: Instance, node: IntervalNode, t: float) -> Point2:
    if node.is_depot:
        return inst.depot
    return _traj(inst, node).position_at(t)


def gate(p: IntervalNode, q: IntervalNode, inst: Instance):
    """Classify the edge ``p -> q`` as ``(Gate, cost)``; cost is set only for TRIVIAL."""
    v = inst.v_max
    if not reachable(_pos(inst, p, p.t_lo), p.t_lo, _pos(inst, q, q.t_hi), q.t_hi, v):
        return Gate.INFEASIBLE, None
    if reachable(_pos(inst, p, p.t_hi), p.t_hi, _pos(inst, q, q.t_lo), q.t_lo, v):
        return Gate.TRIVIAL, q.t_lo - p.t_hi
    return Gate.BOUND, None


def sft_lite(p: IntervalNode, q: IntervalNode) -> float:
    return max(q.t_lo - p.t_hi, 0.0)


def _pieces(inst: Instance, node: IntervalNode) -> list:
    return _traj(inst, node).clip(node.t_lo, node.t_hi)


def sft_geometric(p: IntervalNode, q: IntervalNode, inst: Instance) -> float:
    if p.is_depot:
        d = point_piece_set_distance(inst.depot, _pieces(inst, q))
    else:
        d = min_distance_piece_sets(_pieces(inst, p), _pieces(inst, q))
    return d / inst.v_max


def _earliest_lower(start: Point2, depart: float, q: IntervalNode, inst: Instance,
                    params: SamplingParams) -> Optional[float]:
    """Earliest arrival on q from a point, or a lower estimate of it on arc trajectories."""
    traj = _traj(inst, q)
    if all(isinstance(pc, LinePiece) for pc in _pieces(inst, q)):
        return efat_trajectory(start, depart, traj, q.t_lo, q.t_hi, inst.v_max)
    br = efat_bisect(start, depart, traj, (q.t_lo, q.t_hi), inst.v_max, params.eps)
    return None if br is None else br[0]


def sft_sampling(p: IntervalNode, q: IntervalNode, inst: Instance,
                 params: SamplingParams = SamplingParams()) -> Optional[float]:
    if p.is_depot:
        return _from_depot_efat(q, inst, params)
    traj = _traj(inst, p)
    width = (p.t_hi - p.t_lo) / params.k
    best = math.inf
    for m in range(params.k):
        lo = p.t_lo + m * width
        hi = p.t_hi if m == params.k - 1 else p.t_lo + (m + 1) * width
        e = _earliest_lower(traj.position_at(lo), lo, q, inst, params)
        if e is not None:
            best = min(best, e - hi)
    if math.isinf(best):
        return None
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# exact SFT for piecewise-linear trajectories


def _closest_approach(traj_i, traj_j, t0: float, t1: float) -> float:
    """Minimum of |pi_i(t) - pi_j(t)| over common times in ``[t0, t1]``."""
    if t1 < t0:
        return math.inf
    cuts = sorted({t0, t1, *[c for c in traj_i.corner_times() + traj_j.corner_times() if t0 < c < t1]})
    best = math.inf
    for a, b in zip(cuts, cuts[1:] or cuts):
        pa_i, pb_i = traj_i.position_at(a), traj_i.position_at(b)
        pa_j, pb_j = traj_j.position_at(a), traj_j.position_at(b)
        rx0, ry0 = pa_i[0] - pa_j[0], pa_i[1] - pa_j[1]
        dx = (pb_i[0] - pb_j[0]) - rx0
        dy = (pb_i[1] - pb_j[1]) - ry0
        dd = dx * dx + dy * dy
        s = 0.0 if dd == 0.0 else min(max(-(rx0 * dx + ry0 * dy) / dd, 0.0), 1.0)
        best = min(best, math.hypot(rx0 + s * dx, ry0 + s * dy))
    return best


def sft_linear(p: IntervalNode, q: IntervalNode, inst: Instance) -> Optional[float]:
    """Exact shortest feasible travel time between two piecewise-linear intervals.

    The departure interval is first shrunk so its ends map onto the ends of
    the (shrunk) arrival interval under the earliest-arrival map.  Corners of
    either trajectory then split both intervals into aligned sub-intervals on
    which both targets move on a single line, where the cost ``E(t) - t`` is
    minimized over the span ends and the closed-form stationary points.
    """
    if p.is_depot:
        return _from_depot_efat(q, inst, SamplingParams())
    v = inst.v_max
    ti, tj = _traj(inst, p), _traj(inst, q)
    if not (ti.is_linear and tj.is_linear):
        raise ValueError("sft_linear needs piecewise-linear trajectories")
    a_lo, a_hi, b_lo, b_hi = p.t_lo, p.t_hi, q.t_lo, q.t_hi

    if _closest_approach(ti, tj, max(a_lo, b_lo), min(a_hi, b_hi)) <= MEET_TOL:
        return 0.0

    def E(t):
        return efat_trajectory(ti.position_at(t), t, tj, t, tj.t_end, v)

    def L(s):
        return lfdt_trajectory(ti, tj.position_at(s), s, v)

    e_lo = E(a_lo)
    if e_lo is not None and e_lo >= b_lo:
        s_lo = a_lo
    else:
        s_lo, e_lo = L(b_lo), b_lo
    e_hi = E(a_hi)
    if e_hi is not None and e_hi <= b_hi:
        s_hi = a_hi
    else:
        s_hi, e_hi = L(b_hi), b_hi
    if s_lo is None or s_hi is None:
        # cannot happen after a BOUND gate; keep the edge valid regardless
        return sft_lite(p, q)
    s_lo = min(max(s_lo, a_lo), a_hi)
    s_hi = min(max(s_hi, a_lo), a_hi)
    if s_hi - s_lo <= _DEDUPE:
        log.debug("degenerate shrink for edge %d->%d at t=%.9g", p.node_id, q.node_id, s_lo)
        e = E(s_lo)
        return None if e is None else max(e - s_lo, 0.0)

    pairs = [(s_lo, e_lo), (s_hi, e_hi)]
    for c in ti.corner_times():
        if s_lo < c < s_hi:
            e = E(c)
            if e is not None:
                pairs.append((c, e))
    for c in tj.corner_times():
        if e_lo < c < e_hi:
            d = L(c)
            if d is not None and s_lo < d < s_hi:
                pairs.append((d, c))
    pairs.sort()
    aligned = [pairs[0]]
    for pr in pairs[1:]:
        if pr[0] - aligned[-1][0] > _DEDUPE:
            aligned.append(pr)

    best = min(e - t for t, e in aligned)
    for (t0, e0), (t1, e1) in zip(aligned, aligned[1:]):
        pi = ti.piece_at(0.5 * (t0 + t1))
        pj = tj.piece_at(0.5 * (e0 + e1))
        pc = PairCoeffs.from_pieces(pi, pj, v)
        for t in sft_stationary_points(pi, pj, v, t0, t1)[2:]:
            e = pc.earliest_arrival(t)
            if e is not None and math.isfinite(e) and e0 - 1e-6 <= e <= e1 + 1e-6:
                best = min(best, e - t)
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# depot legs


def sft_to_depot(p: IntervalNode, inst: Instance) -> float:
    return point_piece_set_distance(inst.depot, _pieces(inst, p)) / inst.v_max


def _from_depot_efat(q: IntervalNode, inst: Instance, params: SamplingParams) -> Optional[float]:
    e = _earliest_lower(inst.depot, 0.0, q, inst, params)
    return None if e is None else max(e, q.t_lo)


def sft_from_depot(q: IntervalNode, inst: Instance, variant, params: SamplingParams = SamplingParams()):
    """Cost of leaving the depot at time 0 for interval ``q``."""
    depot = IntervalNode(0, DEPOT, 0.0, 0.0)
    return edge_cost(depot, q, inst, variant, params)


def edge_cost(p: IntervalNode, q: IntervalNode, inst: Instance, variant,
              params: SamplingParams = SamplingParams()) -> Optional[float]:
    """Gate the edge, then apply the variant's bound if needed."""
    if q.is_depot:
        return sft_to_depot(p, inst)
    g, c = gate(p, q, inst)
    if g is Gate.INFEASIBLE:
        return None
    if g is Gate.TRIVIAL:
        return c
    variant = Variant(variant)
    if variant is Variant.LITE:
        return sft_lite(p, q)
    if variant is Variant.GEOMETRIC:
        return sft_geometric(p, q, inst)
    if variant is Variant.SAMPLING:
        return sft_sampling(p, q, inst, params)
    return sft_linear(p, q, inst)

"""Travel feasibility, earliest arrival and latest departure times.

For a departure point moving on a line and a destination moving on a line the
interception condition ``|x_j(t) - x_i(t_i)| = v_max (t - t_i)`` squares to a
quadratic in the arrival time ``t`` (for fixed ``t_i``) or in the departure
time ``t_i`` (for fixed ``t``).  Both share the six coefficients held by
:class:`PairCoeffs`.  Arcs are handled by bisection on the monotone
reachability function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .geometry import ArcPiece, LinePiece, Point2, Trajectory

FEAS_TOL = 1e-9
REPORT_TOL = 1e-7
_DEGENERATE = 1e-12


@dataclass(frozen=True)
class FeasibleTravelQuery:
    from_point: Point2
    depart: float
    to_point: Point2
    arrive: float
    v_max: float


def reachable(src: Point2, depart: float, dst: Point2, arrive: float, v_max: float) -> bool:
    if arrive < depart:
        return False
    return math.hypot(dst[0] - src[0], dst[1] - src[1]) <= v_max * (arrive - depart) + FEAS_TOL


def travel_feasible(q: FeasibleTravelQuery) -> bool:
    return reachable(q.from_point, q.depart, q.to_point, q.arrive, q.v_max)


@dataclass(frozen=True)
class QuadraticCoeffs:
    a2: float
    a1: float
    a0: float

    def roots(self) -> list:
        """Real roots in ascending order, using the cancellation-free form."""
        a, b, c = self.a2, self.a1, self.a0
        scale = max(abs(a), abs(b), abs(c))
        if scale == 0.0:
            return []
        if abs(a) <= _DEGENERATE * scale:
            if abs(b) <= _DEGENERATE * scale:
                return []
            return [-c / b]
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            if disc > -1e-12 * b * b:
                disc = 0.0
            else:
                return []
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        if q == 0.0:
            return [0.0, 0.0]
        r1, r2 = q / a, c / q
        return sorted((r1, r2))


@dataclass(frozen=True)
class PairCoeffs:
    """Coefficients for departure on line ``i`` and arrival on line ``j``.

    ``A`` multiplies ``t^2`` in the arrival-time quadratic; ``Ap`` multiplies
    ``t_i^2`` in the departure-time quadratic.  The primed names follow the
    usual derivation: ``Bp = v^2 - U.V``, ``Cp = c.V``, ``Dp = 2 U.c``,
    ``Ep = |c|^2`` with ``c = p_j(0) - p_i(0)`` extrapolated to time zero.
    """

    A: float
    Bp: float
    Cp: float
    Ap: float
    Dp: float
    Ep: float

    @classmethod
    def from_motion(cls, a1: Point2, U: Point2, t1: float, p2: Point2, V: Point2, t2: float,
                    v_max: float) -> "PairCoeffs":
        c1 = p2[0] - V[0] * t2 - a1[0] + U[0] * t1
        c2 = p2[1] - V[1] * t2 - a1[1] + U[1] * t1
        v2 = v_max * v_max
        return cls(
            A=V[0] * V[0] + V[1] * V[1] - v2,
            Bp=-U[0] * V[0] - U[1] * V[1] + v2,
            Cp=c1 * V[0] + c2 * V[1],
            Ap=U[0] * U[0] + U[1] * U[1] - v2,
            Dp=2.0 * (U[0] * c1 + U[1] * c2),
            Ep=c1 * c1 + c2 * c2,
        )

    @classmethod
    def from_pieces(cls, piece_i: LinePiece, piece_j: LinePiece, v_max: float) -> "PairCoeffs":
        return cls.from_motion(piece_i.start, piece_i.velocity, piece_i.t_start,
                               piece_j.start, piece_j.velocity, piece_j.t_start, v_max)

    @classmethod
    def from_point(cls, point: Point2, piece_j: LinePiece, v_max: float) -> "PairCoeffs":
        return cls.from_motion(point, Point2(0.0, 0.0), 0.0,
                               piece_j.start, piece_j.velocity, piece_j.t_start, v_max)

    @classmethod
    def to_point(cls, piece_i: LinePiece, point: Point2, v_max: float) -> "PairCoeffs":
        return cls.from_motion(piece_i.start, piece_i.velocity, piece_i.t_start,
                               point, Point2(0.0, 0.0), 0.0, v_max)

    def arrival_quadratic(self, t_i: float) -> QuadraticCoeffs:
        return QuadraticCoeffs(self.A, 2.0 * self.Bp * t_i + 2.0 * self.Cp,
                               self.Ap * t_i * t_i - self.Dp * t_i + self.Ep)

    def departure_quadratic(self, t: float) -> QuadraticCoeffs:
        return QuadraticCoeffs(self.Ap, 2.0 * self.Bp * t - self.Dp,
                               self.A * t * t + 2.0 * self.Cp * t + self.Ep)

    def stationary_quadratic(self) -> QuadraticCoeffs:
        A, B, C, Ap, D, E = self.A, self.Bp, self.Cp, self.Ap, self.Dp, self.Ep
        s = 4.0 * (A + B) ** 2
        P = s * (B * B - A * Ap) - 4.0 * B ** 4 - (4.0 * A * A * Ap * Ap - 8.0 * A * Ap * B * B)
        Q = (s * (2.0 * B * C + A * D) - 8.0 * B ** 3 * C
             - (4.0 * A * B * B * D - 8.0 * A * Ap * B * C - 4.0 * A * A * Ap * D))
        R = s * (C * C - A * E) - 4.0 * B * B * C * C - (4.0 * A * B * C * D + A * A * D * D)
        return QuadraticCoeffs(P, Q, R)

    def earliest_arrival(self, t_i: float) -> Optional[float]:
        """Largest root of the arrival quadratic: the interception time on the extended lines."""
        roots = self.arrival_quadratic(t_i).roots()
        return roots[-1] if roots else None

    def latest_departure(self, t: float) -> Optional[float]:
        roots = self.departure_quadratic(t).roots()
        return roots[0] if roots else None


# ---------------------------------------------------------------------------
# earliest feasible arrival


def _gap(src: Point2, depart: float, piece, t: float, v_max: float) -> float:
    p = piece.position(t)
    return v_max * (t - depart) - math.hypot(p[0] - src[0], p[1] - src[1])


def _bisect_increasing(f, lo: float, hi: float, tol: float = 1e-12, iters: int = 200) -> float:
    """Smallest ``t`` in ``[lo, hi]`` with ``f(t) >= 0`` given ``f(lo) < 0 <= f(hi)``."""
    for _ in range(iters):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def efat_linear(start: Point2, depart: float, target_piece: LinePiece, v_max: float) -> Optional[float]:
    """Earliest time in the piece's span at which the agent can be on the target."""
    s = max(target_piece.t_start, depart)
    te = target_piece.t_end
    if s > te:
        return None
    if _gap(start, depart, target_piece, s, v_max) >= -FEAS_TOL:
        return s
    if _gap(start, depart, target_piece, te, v_max) < -FEAS_TOL:
        return None
    root = PairCoeffs.from_point(start, target_piece, v_max).arrival_quadratic(depart)
    cands = [r for r in root.roots() if s - REPORT_TOL <= r <= te + REPORT_TOL]
    if cands:
        t = min(max(cands[-1], s), te)
        if abs(_gap(start, depart, target_piece, t, v_max)) <= REPORT_TOL:
            return t
    return _bisect_increasing(lambda t: _gap(start, depart, target_piece, t, v_max) + FEAS_TOL, s, te)


def _efat_arc(start: Point2, depart: float, piece: ArcPiece, v_max: float, tol: float) -> Optional[float]:
    s = max(piece.t_start, depart)
    te = piece.t_end
    if s > te:
        return None
    if _gap(start, depart, piece, s, v_max) >= -FEAS_TOL:
        return s
    if _gap(start, depart, piece, te, v_max) < -FEAS_TOL:
        return None
    return _bisect_increasing(lambda t: _gap(start, depart, piece, t, v_max) + FEAS_TOL, s, te, tol)


def efat_piece(start: Point2, depart: float, piece, v_max: float, tol: float = 1e-10) -> Optional[float]:
    if isinstance(piece, LinePiece):
        return efat_linear(start, depart, piece, v_max)
    return _efat_arc(start, depart, piece, v_max, tol)


def efat_trajectory(start: Point2, depart: float, traj: Trajectory, t_lo: float, t_hi: float,
                    v_max: float) -> Optional[float]:
    """Earliest feasible arrival on ``traj`` restricted to arrivals in ``[t_lo, t_hi]``.

    Returns None when even ``traj(t_hi)`` is out of reach.  For arc pieces the
    returned time is the reachable end of a 1e-10 s bisection bracket.
    """
    t_hi = min(t_hi, traj.t_end)
    lo = max(t_lo, depart, traj.t_start)
    if lo > t_hi:
        return None
    if not reachable(start, depart, traj.position_at(t_hi), t_hi, v_max):
        return None
    if reachable(start, depart, traj.position_at(lo), lo, v_max):
        return lo
    for piece in traj.pieces[traj.piece_index(lo):]:
        if piece.t_start > t_hi:
            break
        if isinstance(piece, LinePiece):
            t = _efat_clipped_line(start, depart, piece, lo, t_hi, v_max)
        else:
            t = _efat_clipped_arc(start, depart, piece, lo, t_hi, v_max)
        if t is not None:
            return min(max(t, lo), t_hi)
    return t_hi


def _efat_clipped_line(start, depart, piece: LinePiece, lo, hi, v_max):
    a = max(piece.t_start, lo)
    b = min(piece.t_end, hi)
    if b < a:
        return None
    if a == b:
        return a if reachable(start, depart, piece.position(a), a, v_max) else None
    t = efat_linear(start, depart, piece, v_max)
    if t is None or t > b:
        return None
    return max(t, a)


def _efat_clipped_arc(start, depart, piece: ArcPiece, lo, hi, v_max):
    a = max(piece.t_start, lo, depart)
    b = min(piece.t_end, hi)
    if b < a:
        return None
    if reachable(start, depart, piece.position(a), a, v_max):
        return a
    if not reachable(start, depart, piece.position(b), b, v_max):
        return None
    return _bisect_increasing(lambda t: _gap(start, depart, piece, t, v_max) + FEAS_TOL, a, b, 1e-10)


def efat(start: Point2, depart: float, traj: Trajectory, v_max: float) -> Optional[float]:
    """Unrestricted earliest arrival on ``traj`` at or after ``depart``."""
    return efat_trajectory(start, depart, traj, depart, traj.t_end, v_max)


def efat_bisect(start: Point2, depart: float, traj: Trajectory, window: Sequence[float],
                v_max: float, eps: float):
    """Bracket ``(E_lo, E_hi)`` of the earliest arrival inside ``window``.

    ``traj(E_hi)`` is reachable and ``traj(E_lo)`` is not, with
    ``E_hi - E_lo <= eps``.  Returns ``(t_lo, t_lo)`` when the window start is
    already reachable and None when the window end is not.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t_lo, t_hi = float(window[0]), float(window[1])

    def ok(t):
        return reachable(start, depart, traj.position_at(t), t, v_max)

    if not ok(t_hi):
        return None
    if ok(t_lo):
        return (t_lo, t_lo)
    lo, hi = t_lo, t_hi
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return (lo, hi)


# ---------------------------------------------------------------------------
# latest feasible departure


def _slack(piece, t: float, dst: Point2, arrive: float, v_max: float) -> float:
    p = piece.position(t)
    return v_max * (arrive - t) - math.hypot(dst[0] - p[0], dst[1] - p[1])


def _bisect_decreasing(f, lo: float, hi: float, tol: float = 1e-12, iters: int = 200) -> float:
    """Largest ``t`` with ``f(t) >= 0`` given ``f(lo) >= 0 > f(hi)``."""
    for _ in range(iters):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def lfdt_linear(agent_piece: LinePiece, arrive_point: Point2, arrive: float, v_max: float) -> Optional[float]:
    """Latest departure time on the piece that still reaches ``arrive_point`` by ``arrive``."""
    ts = agent_piece.t_start
    e = min(agent_piece.t_end, arrive)
    if e < ts:
        return None
    if _slack(agent_piece, e, arrive_point, arrive, v_max) >= -FEAS_TOL:
        return e
    if _slack(agent_piece, ts, arrive_point, arrive, v_max) < -FEAS_TOL:
        return None
    quad = PairCoeffs.to_point(agent_piece, arrive_point, v_max).departure_quadratic(arrive)
    cands = [r for r in quad.roots() if ts - REPORT_TOL <= r <= e + REPORT_TOL]
    if cands:
        t = min(max(cands[0], ts), e)
        if abs(_slack(agent_piece, t, arrive_point, arrive, v_max)) <= REPORT_TOL:
            return t
    return _bisect_decreasing(lambda t: _slack(agent_piece, t, arrive_point, arrive, v_max) + FEAS_TOL, ts, e)


def lfdt_trajectory(traj: Trajectory, arrive_point: Point2, arrive: float, v_max: float) -> Optional[float]:
    """Latest departure from ``traj`` reaching ``arrive_point`` at ``arrive``."""
    e = min(arrive, traj.t_end)
    if e < traj.t_start:
        return None
    k = traj.piece_index(e)
    for piece in reversed(traj.pieces[:k + 1]):
        if isinstance(piece, LinePiece):
            t = lfdt_linear(piece, arrive_point, arrive, v_max)
        else:
            hi = min(piece.t_end, arrive)
            if _slack(piece, hi, arrive_point, arrive, v_max) >= -FEAS_TOL:
                t = hi
            elif _slack(piece, piece.t_start, arrive_point, arrive, v_max) < -FEAS_TOL:
                t = None
            else:
                t = _bisect_decreasing(
                    lambda x: _slack(piece, x, arrive_point, arrive, v_max) + FEAS_TOL,
                    piece.t_start, hi)
        if t is not None:
            return t
    return None


# ---------------------------------------------------------------------------
# stationary points of (arrival - departure) for a line/line pair


def sft_stationary_points(piece_i: LinePiece, piece_j: LinePiece, v_max: float,
                          t_lo: Optional[float] = None, t_hi: Optional[float] = None) -> list:
    """Candidate departure times minimizing ``E(t) - t`` on a line/line pair.

    The span defaults to ``piece_i``'s; the returned list always contains both
    span ends followed by any real stationary roots strictly inside.
    """
    lo = piece_i.t_start if t_lo is None else t_lo
    hi = piece_i.t_end if t_hi is None else t_hi
    out = [lo, hi]
    for r in PairCoeffs.from_pieces(piece_i, piece_j, v_max).stationary_quadratic().roots():
        if lo < r < hi:
            out.append(r)
    return out

"""Planar primitives: points, constant-speed line and arc pieces, trajectories.

Every trajectory is an ordered list of time-contiguous pieces.  A piece maps
a time in ``[t_start, t_end]`` to a point by linear (line) or angular (arc)
interpolation.  Distances between piece loci ignore the time parameterization.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

TOL = 1e-9
TWO_PI = 2.0 * math.pi


class OutOfHorizon(ValueError):
    """Raised when a trajectory is evaluated outside its time span."""


class Point2(NamedTuple):
    x: float
    y: float


def dist(a: Point2, b: Point2) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def normalize_angle(theta: float) -> float:
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    if theta >= TWO_PI:
        theta = 0.0
    return theta


@dataclass(frozen=True)
class LinePiece:
    start: Point2
    end: Point2
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"line piece needs t_end > t_start, got [{self.t_start}, {self.t_end}]")
        object.__setattr__(self, "start", Point2(float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", Point2(float(self.end[0]), float(self.end[1])))

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def length(self) -> float:
        return dist(self.start, self.end)

    @property
    def speed(self) -> float:
        return self.length / self.duration

    @property
    def velocity(self) -> Point2:
        d = self.duration
        return Point2((self.end[0] - self.start[0]) / d, (self.end[1] - self.start[1]) / d)

    def position(self, t: float) -> Point2:
        s = (t - self.t_start) / self.duration
        return Point2(self.start[0] + s * (self.end[0] - self.start[0]),
                      self.start[1] + s * (self.end[1] - self.start[1]))

    def clip(self, t0: float, t1: float) -> "LinePiece":
        return LinePiece(self.position(t0), self.position(t1), t0, t1)

    @property
    def start_point(self) -> Point2:
        return self.start

    @property
    def end_point(self) -> Point2:
        return self.end


@dataclass(frozen=True)
class ArcPiece:
    """Circular arc traversed at constant angular rate.

    Angles are normalized to ``[0, 2pi)``; the swept angle is measured from
    ``theta_start`` to ``theta_end`` in the direction given by ``ccw`` and is
    therefore always in ``[0, 2pi)``.
    """

    center: Point2
    radius: float
    theta_start: float
    theta_end: float
    ccw: bool
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("arc radius must be positive")
        if not self.t_end > self.t_start:
            raise ValueError(f"arc piece needs t_end > t_start, got [{self.t_start}, {self.t_end}]")
        object.__setattr__(self, "center", Point2(float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "theta_start", normalize_angle(self.theta_start))
        object.__setattr__(self, "theta_end", normalize_angle(self.theta_end))

    @property
    def sweep(self) -> float:
        if self.ccw:
            return normalize_angle(self.theta_end - self.theta_start)
        return normalize_angle(self.theta_start - self.theta_end)

    @property
    def direction(self) -> float:
        return 1.0 if self.ccw else -1.0

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def length(self) -> float:
        return self.radius * self.sweep

    @property
    def speed(self) -> float:
        return self.length / self.duration

    def angle_at(self, t: float) -> float:
        s = (t - self.t_start) / self.duration
        return self.theta_start + self.direction * self.sweep * s

    def point_at_angle(self, theta: float) -> Point2:
        return Point2(self.center[0] + self.radius * math.cos(theta),
                      self.center[1] + self.radius * math.sin(theta))

    def position(self, t: float) -> Point2:
        return self.point_at_angle(self.angle_at(t))

    def clip(self, t0: float, t1: float) -> "ArcPiece":
        return ArcPiece(self.center, self.radius, self.angle_at(t0), self.angle_at(t1),
                        self.ccw, t0, t1)

    def contains_angle(self, theta: float) -> bool:
        if self.ccw:
            off = normalize_angle(theta - self.theta_start)
        else:
            off = normalize_angle(self.theta_start - theta)
        return off <= self.sweep + 1e-12 or off >= TWO_PI - 1e-12

    @property
    def start_point(self) -> Point2:
        return self.point_at_angle(self.theta_start)

    @property
    def end_point(self) -> Point2:
        return self.point_at_angle(self.theta_start + self.direction * self.sweep)


Piece = Union[LinePiece, ArcPiece]


@dataclass(frozen=True)
class Trajectory:
    pieces: tuple
    speed: float
    _starts: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("trajectory needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "_starts", tuple(p.t_start for p in pieces))

    @property
    def t_start(self) -> float:
        return self.pieces[0].t_start

    @property
    def t_end(self) -> float:
        return self.pieces[-1].t_end

    @property
    def is_linear(self) -> bool:
        return all(isinstance(p, LinePiece) for p in self.pieces)

    def piece_index(self, t: float) -> int:
        """Index of the piece whose span contains ``t`` (the later one at a boundary)."""
        if t < self.t_start - TOL or t > self.t_end + TOL:
            raise OutOfHorizon(f"t={t} outside [{self.t_start}, {self.t_end}]")
        k = bisect.bisect_right(self._starts, t) - 1
        return min(max(k, 0), len(self.pieces) - 1)

    def piece_at(self, t: float) -> Piece:
        return self.pieces[self.piece_index(t)]

    def position_at(self, t: float) -> Point2:
        piece = self.piece_at(t)
        return piece.position(min(max(t, piece.t_start), piece.t_end))

    def corner_times(self) -> list:
        """Interior piece boundaries (break points between consecutive pieces)."""
        return [p.t_start for p in self.pieces[1:]]

    def clip(self, t0: float, t1: float) -> list:
        """Pieces covering ``[t0, t1]`` split exactly at the interval ends.

        A degenerate interval yields a single zero-duration stand-in, returned
        as a zero-length ``LinePiece`` spanning a nominal instant.
        """
        if t1 < t0:
            raise ValueError("clip needs t0 <= t1")
        if t1 - t0 <= 0.0:
            p = self.position_at(t0)
            return [_point_piece(p, t0)]
        out = []
        for piece in self.pieces[self.piece_index(t0):]:
            if piece.t_start >= t1:
                break
            a = max(piece.t_start, t0)
            b = min(piece.t_end, t1)
            if b - a <= 0.0:
                continue
            out.append(piece if (a == piece.t_start and b == piece.t_end) else piece.clip(a, b))
        return out


def _point_piece(p: Point2, t: float) -> LinePiece:
    return LinePiece(p, p, t, t + 1.0)


def position_at(traj: Trajectory, t: float) -> Point2:
    return traj.position_at(t)


# ---------------------------------------------------------------------------
# distances between loci


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    den = dx * dx + dy * dy
    if den == 0.0:
        return dist(p, a)
    s = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den
    s = min(1.0, max(0.0, s))
    return math.hypot(a[0] + s * dx - p[0], a[1] + s * dy - p[1])


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    d1 = _cross(c[0], c[1], d[0], d[1], a[0], a[1])
    d2 = _cross(c[0], c[1], d[0], d[1], b[0], b[1])
    d3 = _cross(a[0], a[1], b[0], b[1], c[0], c[1])
    d4 = _cross(a[0], a[1], b[0], b[1], d[0], d[1])
    return ((d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0
            and (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0)


def segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> float:
    if _segments_intersect(a, b, c, d):
        return 0.0
    return min(point_segment_distance(a, c, d), point_segment_distance(b, c, d),
               point_segment_distance(c, a, b), point_segment_distance(d, a, b))


def point_arc_distance(p: Point2, arc: ArcPiece) -> float:
    cx, cy = arc.center
    r = math.hypot(p[0] - cx, p[1] - cy)
    if r > 0.0 and arc.contains_angle(math.atan2(p[1] - cy, p[0] - cx)):
        return abs(r - arc.radius)
    if r == 0.0:
        return arc.radius
    return min(dist(p, arc.start_point), dist(p, arc.end_point))


def segment_arc_distance(a: Point2, b: Point2, arc: ArcPiece) -> float:
    cx, cy = arc.center
    dx, dy = b[0] - a[0], b[1] - a[1]
    den = dx * dx + dy * dy
    cands = [point_arc_distance(a, arc), point_arc_distance(b, arc),
             point_segment_distance(arc.start_point, a, b),
             point_segment_distance(arc.end_point, a, b)]
    if den == 0.0:
        return min(cands)
    # crossings of the segment with the full circle
    fx, fy = a[0] - cx, a[1] - cy
    qa = den
    qb = 2.0 * (fx * dx + fy * dy)
    qc = fx * fx + fy * fy - arc.radius * arc.radius
    disc = qb * qb - 4.0 * qa * qc
    if disc >= 0.0:
        sq = math.sqrt(disc)
        for s in ((-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)):
            if -1e-12 <= s <= 1.0 + 1e-12:
                px, py = fx + s * dx, fy + s * dy
                if arc.contains_angle(math.atan2(py, px)):
                    return 0.0
    # perpendicular foot of the center on the segment, paired radially
    s = min(1.0, max(0.0, -(fx * dx + fy * dy) / den))
    foot = Point2(a[0] + s * dx, a[1] + s * dy)
    rf = math.hypot(foot[0] - cx, foot[1] - cy)
    if rf > 0.0:
        theta = math.atan2(foot[1] - cy, foot[0] - cx)
        for th in (theta, theta + math.pi):
            if arc.contains_angle(th):
                cands.append(dist(foot, arc.point_at_angle(th)))
    return min(cands)


def arc_arc_distance(a: ArcPiece, b: ArcPiece) -> float:
    cands = [point_arc_distance(a.start_point, b), point_arc_distance(a.end_point, b),
             point_arc_distance(b.start_point, a), point_arc_distance(b.end_point, a)]
    (x1, y1), (x2, y2) = a.center, b.center
    d = math.hypot(x2 - x1, y2 - y1)
    r1, r2 = a.radius, b.radius
    if d == 0.0:
        # concentric: any common angle realizes |r1 - r2|
        for th in (a.theta_start, a.theta_end, b.theta_start, b.theta_end):
            if a.contains_angle(th) and b.contains_angle(th):
                cands.append(abs(r1 - r2))
                break
        return min(cands)
    # circle-circle crossings
    if abs(r1 - r2) <= d <= r1 + r2:
        along = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
        h = math.sqrt(max(r1 * r1 - along * along, 0.0))
        ux, uy = (x2 - x1) / d, (y2 - y1) / d
        mx, my = x1 + along * ux, y1 + along * uy
        for sgn in (1.0, -1.0):
            px, py = mx - sgn * h * uy, my + sgn * h * ux
            if (a.contains_angle(math.atan2(py - y1, px - x1))
                    and b.contains_angle(math.atan2(py - y2, px - x2))):
                return 0.0
    # critical pairs on the line through both centers
    base = math.atan2(y2 - y1, x2 - x1)
    for th1 in (base, base + math.pi):
        if not a.contains_angle(th1):
            continue
        p1 = a.point_at_angle(th1)
        for th2 in (base, base + math.pi):
            if b.contains_angle(th2):
                cands.append(dist(p1, b.point_at_angle(th2)))
    return min(cands)


def min_distance_pieces(a: Piece, b: Piece) -> float:
    """Minimum Euclidean distance between the loci of two pieces."""
    if isinstance(a, LinePiece):
        if isinstance(b, LinePiece):
            return segment_segment_distance(a.start, a.end, b.start, b.end)
        return segment_arc_distance(a.start, a.end, b)
    if isinstance(b, LinePiece):
        return segment_arc_distance(b.start, b.end, a)
    # keep argument order irrelevant for exact symmetry
    if (a.center, a.radius, a.theta_start, a.theta_end) > (b.center, b.radius, b.theta_start, b.theta_end):
        a, b = b, a
    return arc_arc_distance(a, b)


def min_distance_piece_sets(A: Sequence[Piece], B: Sequence[Piece]) -> float:
    if not A or not B:
        raise ValueError("piece sets must be nonempty")
    return min(min_distance_pieces(a, b) for a in A for b in B)


def point_piece_distance(p: Point2, piece: Piece) -> float:
    if isinstance(piece, LinePiece):
        return point_segment_distance(p, piece.start, piece.end)
    return point_arc_distance(p, piece)


def point_piece_set_distance(p: Point2, pieces: Sequence[Piece]) -> float:
    return min(point_piece_distance(p, q) for q in pieces)

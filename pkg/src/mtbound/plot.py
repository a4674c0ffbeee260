"""Deterministic SVG rendering of instances and tours (no plotting library)."""

from __future__ import annotations

from typing import Optional

from .geometry import ArcPiece
from .model import Instance

SIZE = 640
MARGIN = 30
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
           "#e377c2", "#bcbd22", "#7f7f7f"]


def _bounds(inst: Instance):
    xs, ys = [inst.depot[0]], [inst.depot[1]]
    for tgt in inst.targets:
        for pc in tgt.trajectory.pieces:
            for p in _piece_points(pc, pc.t_start, pc.t_end):
                xs.append(p[0])
                ys.append(p[1])
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    return lo, max(hi - lo, 1e-9)


def _piece_points(piece, t0: float, t1: float, steps: int = 24):
    if not isinstance(piece, ArcPiece):
        return [piece.position(t0), piece.position(t1)]
    return [piece.position(t0 + (t1 - t0) * k / steps) for k in range(steps + 1)]


def _locus(traj, t0: float, t1: float) -> list:
    pts = []
    for pc in traj.clip(t0, t1):
        seg = _piece_points(pc, pc.t_start, pc.t_end)
        pts.extend(seg if not pts else seg[1:])
    return pts


class _Canvas:
    def __init__(self, inst: Instance):
        self.lo, self.span = _bounds(inst)
        self.scale = (SIZE - 2 * MARGIN) / self.span
        self.items = []

    def xy(self, p):
        x = MARGIN + (p[0] - self.lo) * self.scale
        y = SIZE - MARGIN - (p[1] - self.lo) * self.scale
        return f"{x:.2f},{y:.2f}"

    def polyline(self, pts, color: str, width: float, cls: str, dash: Optional[str] = None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline class="{cls}" points="{" ".join(self.xy(p) for p in pts)}" '
                          f'fill="none" stroke="{color}" stroke-width="{width}"{extra}/>')

    def circle(self, p, r: float, color: str, cls: str):
        x, y = self.xy(p).split(",")
        self.items.append(f'<circle class="{cls}" cx="{x}" cy="{y}" r="{r}" fill="{color}"/>')

    def text(self, p, s: str):
        x, y = self.xy(p).split(",")
        self.items.append(f'<text x="{float(x) + 4:.2f}" y="{float(y) - 4:.2f}" font-size="10">{s}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
                f'viewBox="0 0 {SIZE} {SIZE}">\n<rect width="100%" height="100%" fill="white"/>\n')
        return head + "\n".join(self.items) + "\n</svg>\n"


def render_svg(inst: Instance, lower_bound: Optional[dict] = None, tour: Optional[dict] = None) -> str:
    """SVG text for the instance with an optional lower-bound or feasible tour overlay.

    ``lower_bound`` needs an ``intervals`` list of ``[target, t_lo, t_hi]``;
    its legs run from each interval's end point to the next interval's start
    point, so the path has gaps.  ``tour`` needs ``order`` and ``arrivals``
    and is drawn as one connected polyline.
    """
    cv = _Canvas(inst)
    for k, tgt in enumerate(inst.targets):
        color = PALETTE[k % len(PALETTE)]
        traj = tgt.trajectory
        cv.polyline(_locus(traj, traj.t_start, traj.t_end), "#bbbbbb", 1, "path")
        for w in tgt.windows:
            cv.polyline(_locus(traj, w.lo, w.hi), color, 3, "window")
        cv.text(traj.position_at(traj.t_start), str(tgt.id))
    if lower_bound is not None:
        prev = inst.depot
        for tid, lo, hi in lower_bound["intervals"]:
            traj = inst.target(int(tid)).trajectory
            cv.polyline([prev, traj.position_at(lo)], "black", 1.5, "lb-leg", "4,2")
            prev = traj.position_at(hi)
        cv.polyline([prev, inst.depot], "black", 1.5, "lb-leg", "4,2")
    if tour is not None:
        pts = [inst.depot]
        for tid, a in zip(tour["order"], tour["arrivals"]):
            pts.append(inst.target(int(tid)).position_at(a))
        pts.append(inst.depot)
        cv.polyline(pts, "black", 1.5, "tour")
        for p in pts[1:-1]:
            cv.circle(p, 2.5, "black", "visit")
    cv.circle(inst.depot, 5, "#000000", "depot")
    return cv.render()


"""Random instance generation.

Targets get random confined trajectories first.  A feasible tour is then
found with every window spanning the whole horizon, and each target's primary
window is placed around its visit time in that tour, so every generated
instance is known to be feasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import TWO_PI, ArcPiece, LinePiece, Point2, Trajectory
from .model import Instance, Kind, Target, TimeWindow

MAX_SHAPE_TRIES = 10_000
MAX_REDRAWS = 50


class GenerationFailed(RuntimeError):
    def __init__(self, redraws: int):
        self.redraws = redraws
        super().__init__(f"no feasible seed tour after {redraws} trajectory redraws")


@dataclass(frozen=True)
class GeneratorConfig:
    n_targets: int
    kind: Kind = Kind.SIMPLE
    rng_seed: int = 0
    area_side: float = 100.0
    horizon: float = 100.0
    depot: tuple = (10.0, 10.0)
    v_max: float = 4.0
    target_speed_range: tuple = (0.5, 1.0)
    total_window_duration: float = 20.0
    primary_window: Optional[float] = None
    secondary_window: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.n_targets < 1:
            raise ValueError("n_targets must be >= 1")
        simple = self.kind is Kind.SIMPLE
        if self.primary_window is None:
            object.__setattr__(self, "primary_window", self.total_window_duration if simple else 15.0)
        if self.secondary_window is None:
            object.__setattr__(self, "secondary_window",
                               0.0 if simple else self.total_window_duration - self.primary_window)
        if abs(self.primary_window + self.secondary_window - self.total_window_duration) > 1e-9:
            raise ValueError("primary + secondary windows must equal the total window duration")
        if self.primary_window + self.secondary_window > self.horizon:
            raise ValueError("windows do not fit in the horizon")
        lo, hi = self.target_speed_range
        if not 0 <= lo <= hi < self.v_max:
            raise ValueError("target speeds must lie in [0, v_max)")


def _inside(p, side: float) -> bool:
    return 0.0 <= p[0] <= side and 0.0 <= p[1] <= side


def _arc_inside(arc: ArcPiece, side: float) -> bool:
    pts = [arc.start_point, arc.end_point]
    pts += [arc.point_at_angle(a) for a in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)
            if arc.contains_angle(a)]
    return all(_inside(p, side) for p in pts)


def _breaks(rng, k: int, horizon: float) -> list:
    cuts = np.sort(rng.uniform(0.0, horizon, size=k - 1)) if k > 1 else np.array([])
    return [0.0, *[float(c) for c in cuts], horizon]


def _line_shape(rng, cfg: GeneratorConfig, speed: float, k: int) -> Optional[list]:
    side = cfg.area_side
    p = Point2(*rng.uniform(0.0, side, size=2))
    ts = _breaks(rng, k, cfg.horizon)
    pieces = []
    for a, b in zip(ts, ts[1:]):
        if b - a <= 1e-6:
            return None
        h = rng.uniform(0.0, TWO_PI)
        L = speed * (b - a)
        q = Point2(p[0] + L * math.cos(h), p[1] + L * math.sin(h))
        if not _inside(q, side):
            return None
        pieces.append(LinePiece(p, q, a, b))
        p = q
    return pieces


def _dubins_shape(rng, cfg: GeneratorConfig, speed: float, k: int) -> Optional[list]:
    side = cfg.area_side
    p = Point2(*rng.uniform(0.0, side, size=2))
    h = rng.uniform(0.0, TWO_PI)
    ts = _breaks(rng, k, cfg.horizon)
    pieces = []
    for idx, (a, b) in enumerate(zip(ts, ts[1:])):
        if b - a <= 1e-6:
            return None
        L = speed * (b - a)
        if idx % 2 == 0:
            q = Point2(p[0] + L * math.cos(h), p[1] + L * math.sin(h))
            if not _inside(q, side):
                return None
            pieces.append(LinePiece(p, q, a, b))
            p = q
            continue
        r = rng.uniform(5.0, 20.0)
        sweep = L / r
        if sweep >= TWO_PI - 1e-6:
            return None
        ccw = bool(rng.integers(0, 2))
        sgn = 1.0 if ccw else -1.0
        center = Point2(p[0] - sgn * r * math.sin(h), p[1] + sgn * r * math.cos(h))
        th0 = math.atan2(p[1] - center[1], p[0] - center[0])
        arc = ArcPiece(center, r, th0, th0 + sgn * sweep, ccw, a, b)
        if not _arc_inside(arc, side):
            return None
        pieces.append(arc)
        p = arc.end_point
        h += sgn * sweep
    return pieces


def _draw_trajectory(rng, cfg: GeneratorConfig) -> Trajectory:
    for _ in range(MAX_SHAPE_TRIES):
        speed = float(rng.uniform(*cfg.target_speed_range))
        if cfg.kind is Kind.SIMPLE:
            pieces = _line_shape(rng, cfg, speed, 1)
        elif cfg.kind is Kind.COMPLEX:
            pieces = _line_shape(rng, cfg, speed, int(rng.integers(2, 6)))
        else:
            pieces = _dubins_shape(rng, cfg, speed, int(rng.integers(2, 6)))
        if pieces is not None:
            return Trajectory(tuple(pieces), speed)
    raise RuntimeError("could not draw a confined trajectory")


def _place_windows(rng, cfg: GeneratorConfig, visit: float) -> tuple:
    H, P, S = cfg.horizon, cfg.primary_window, cfg.secondary_window
    lo = float(rng.uniform(max(0.0, visit - P), min(visit, H - P)))
    wins = [TimeWindow(lo, lo + P)]
    if S > 0:
        for _ in range(10_000):
            s = float(rng.uniform(0.0, H - S))
            if s + S < lo or s > lo + P:
                wins.append(TimeWindow(s, s + S))
                break
        else:
            raise RuntimeError("could not place a disjoint secondary window")
    return tuple(sorted(wins, key=lambda w: w.lo))


def generate(cfg: GeneratorConfig) -> Instance:
    """Deterministic random instance for ``cfg``; raises GenerationFailed."""
    from .feasible import find_feasible

    rng = np.random.default_rng(cfg.rng_seed)
    full = (TimeWindow(0.0, cfg.horizon),)
    for redraw in range(MAX_REDRAWS):
        trajs = [_draw_trajectory(rng, cfg) for _ in range(cfg.n_targets)]
        seed_inst = Instance(Point2(*cfg.depot), cfg.v_max, cfg.horizon,
                             tuple(Target(i + 1, tr, full) for i, tr in enumerate(trajs)), cfg.kind)
        tour = find_feasible(seed_inst)
        if tour is None:
            continue
        visit = dict(zip(tour.visit_order, tour.arrival_times))
        targets = tuple(Target(i + 1, tr, _place_windows(rng, cfg, visit[i + 1]))
                        for i, tr in enumerate(trajs))
        meta = {"seed": cfg.rng_seed, "redraws": redraw, "seed_tour": tour.to_dict()}
        return Instance(Point2(*cfg.depot), cfg.v_max, cfg.horizon, targets, cfg.kind, meta)
    raise GenerationFailed(MAX_REDRAWS)

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import random_polyline
from mtbound.geometry import ArcPiece, LinePiece, Point2, Trajectory
from mtbound.kinematics import (
    FeasibleTravelQuery,
    PairCoeffs,
    QuadraticCoeffs,
    efat,
    efat_bisect,
    efat_linear,
    efat_trajectory,
    lfdt_linear,
    lfdt_trajectory,
    reachable,
    sft_stationary_points,
    travel_feasible,
)
from oracles import Polyline, efat_grid, polyline_of

P = Point2


def still(x, y, t0=0.0, t1=10.0):
    return LinePiece(P(x, y), P(x, y), t0, t1)


def test_travel_feasible_examples():
    assert travel_feasible(FeasibleTravelQuery(P(10, 10), 0.0, P(10, 14), 1.0, 4.0))
    assert not travel_feasible(FeasibleTravelQuery(P(10, 10), 0.0, P(10, 14), 0.9, 4.0))
    assert not travel_feasible(FeasibleTravelQuery(P(10, 10), 1.0, P(10, 10), 0.5, 4.0))


def test_quadratic_roots_stable():
    q = QuadraticCoeffs(1.0, -1e8, 1.0)
    lo, hi = q.roots()
    assert lo == pytest.approx(1e-8, rel=1e-12) and hi == pytest.approx(1e8, rel=1e-12)
    assert QuadraticCoeffs(0.0, 2.0, -4.0).roots() == [2.0]
    assert QuadraticCoeffs(1.0, 0.0, 1.0).roots() == []
    assert QuadraticCoeffs(0.0, 0.0, 0.0).roots() == []


def test_efat_stationary_and_coincident():
    assert efat_linear(P(0, 0), 0.0, still(8, 0), 4.0) == pytest.approx(2.0)
    piece = LinePiece(P(0, 0), P(10, 0), 0, 10)
    assert efat_linear(P(3, 0), 3.0, piece, 4.0) == 3.0


def test_efat_moving_matches_bisection():
    piece = LinePiece(P(0, 0), P(10, 0), 0, 10)
    e = efat_linear(P(0, -3), 0.0, piece, 2.0)
    lo, hi = efat_bisect(P(0, -3), 0.0, Trajectory((piece,), 1.0), (0, 10), 2.0, 1e-9)
    assert abs(e - hi) <= 1e-6
    # closed form: (t)^2 + 9 = 4 t^2
    assert e == pytest.approx(math.sqrt(3.0), abs=1e-12)


def test_efat_infeasible_piece():
    assert efat_linear(P(0, 0), 0.0, still(100, 0), 4.0) is None
    assert efat_linear(P(0, 0), 20.0, still(1, 0), 4.0) is None


def test_degenerate_leading_coefficient():
    # target speed equals v_max along the chase direction, so A == 0
    piece = LinePiece(P(10, 0), P(50, 0), 0, 10)
    e = efat_linear(P(0, 0), 0.0, piece, 4.0)
    assert e is None
    piece = LinePiece(P(10, 0), P(-30, 0), 0, 10)
    assert efat_linear(P(0, 0), 0.0, piece, 4.0) == pytest.approx(1.25)


def test_efat_trajectory_single_piece_and_boundary():
    piece = LinePiece(P(0, 0), P(10, 0), 0, 10)
    traj = Trajectory((piece,), 1.0)
    assert efat_trajectory(P(0, -3), 0.0, traj, 0, 10, 2.0) == efat_linear(P(0, -3), 0.0, piece, 2.0)
    # stationary target at distance 8 reachable only at t = 2 = t_hi
    st_traj = Trajectory((still(8, 0),), 0.0)
    assert efat_trajectory(P(0, 0), 0.0, st_traj, 0.0, 2.0, 4.0) == 2.0
    assert efat_trajectory(P(0, 0), 0.0, st_traj, 0.0, 1.9, 4.0) is None
    assert efat_trajectory(P(0, 0), 0.0, st_traj, 5.0, 9.0, 4.0) == 5.0


def test_efat_trajectory_polyline_matches_oracle(rng):
    for _ in range(20):
        traj = random_polyline(rng, 3)
        src = P(*rng.uniform(0, 100, 2))
        t0 = float(rng.uniform(0, 60))
        lo, hi = t0 + float(rng.uniform(0, 10)), t0 + float(rng.uniform(10, 40))
        e = efat_trajectory(src, t0, traj, lo, hi, 4.0)
        ref = efat_grid([src], [t0], polyline_of(traj), lo, hi, 4.0, iters=80)[0]
        if e is None:
            assert math.isinf(ref)
        else:
            assert abs(e - ref) <= 1e-6


def test_efat_bisect_examples():
    traj = Trajectory((still(8, 0),), 0.0)
    lo, hi = efat_bisect(P(0, 0), 0.0, traj, (0, 10), 4.0, 1e-6)
    assert lo <= 2.0 <= hi and hi - lo <= 1e-6
    assert efat_bisect(P(0, 0), 0.0, traj, (0, 1), 4.0, 1e-6) is None
    assert efat_bisect(P(8, 0), 0.0, traj, (0, 1), 4.0, 1e-6) == (0, 0)
    with pytest.raises(ValueError):
        efat_bisect(P(0, 0), 0.0, traj, (0, 10), 4.0, 0.0)


def test_efat_bisect_on_arc():
    arc = ArcPiece(P(50, 50), 10.0, 0.0, 2.0, True, 0.0, 20.0)
    traj = Trajectory((arc,), 1.0)
    lo, hi = efat_bisect(P(10, 10), 0.0, traj, (0, 20), 4.0, 1e-3)
    assert hi - lo <= 1e-3
    assert reachable(P(10, 10), 0.0, traj.position_at(hi), hi, 4.0)
    assert not reachable(P(10, 10), 0.0, traj.position_at(lo), lo, 4.0)


def test_lfdt_examples():
    assert lfdt_linear(still(8, 0), P(0, 0), 10.0, 4.0) == pytest.approx(8.0)
    piece = LinePiece(P(0, 0), P(10, 0), 0, 10)
    assert lfdt_linear(piece, P(5, 0), 5.0, 4.0) == 5.0
    assert lfdt_linear(still(100, 0), P(0, 0), 10.0, 4.0) is None


def _line_pair(rng):
    a = random_polyline(rng, 1)
    b = random_polyline(rng, 1)
    return a.pieces[0], b.pieces[0]


def test_fixed_point_lfdt_of_efat(rng):
    done = 0
    while done < 100:
        a, b = _line_pair(rng)
        t = float(rng.uniform(0, 60))
        e = efat_linear(a.position(t), t, b, 4.0)
        if e is None:
            continue
        back = lfdt_linear(a, b.position(e), e, 4.0)
        assert abs(back - t) <= 1e-6
        assert abs(efat_linear(a.position(back), back, b, 4.0) - e) <= 1e-6
        done += 1


def test_monotone_and_tight(rng):
    done = 0
    while done < 100:
        a, b = _line_pair(rng)
        t1, t2 = sorted(rng.uniform(0, 60, 2))
        e1 = efat_linear(a.position(t1), t1, b, 4.0)
        e2 = efat_linear(a.position(t2), t2, b, 4.0)
        if e1 is None or e2 is None or e1 <= t1:
            continue
        assert e1 < e2
        # just before the earliest arrival the target is out of reach
        d = 1e-4
        assert not reachable(a.position(t1), t1, b.position(e1 - d), e1 - d, 4.0)
        done += 1


def test_efat_linear_agrees_with_bisect(rng):
    for _ in range(100):
        a, b = _line_pair(rng)
        t = float(rng.uniform(0, 60))
        e = efat_linear(a.position(t), t, b, 4.0)
        br = efat_bisect(a.position(t), t, Trajectory((b,), 1.0), (t, b.t_end), 4.0, 1e-6)
        if e is None:
            assert br is None
        else:
            assert abs(e - br[1]) <= 1e-6 + 1e-7


def test_lfdt_trajectory_scans_back(rng):
    for _ in range(30):
        a = random_polyline(rng, 4)
        b = random_polyline(rng, 2)
        t = float(rng.uniform(0, 60))
        e = efat(a.position_at(t), t, b, 4.0)
        if e is None:
            continue
        assert abs(lfdt_trajectory(a, b.position_at(e), e, 4.0) - t) <= 1e-6


def _cost_grid(a, b, v, n=100_000):
    ts = np.linspace(a.t_start, a.t_end, n)
    src = Polyline([a.t_start, a.t_end], [a.start, a.end]).at(ts)
    dst = Polyline([b.t_start, b.t_end], [b.start, b.end])
    return ts, efat_grid(src, ts, dst, b.t_start, b.t_end, v) - ts


def _best_candidate(a, b, v):
    pc = PairCoeffs.from_pieces(a, b, v)
    best = math.inf
    for t in sft_stationary_points(a, b, v):
        e = pc.earliest_arrival(t)
        if e is not None and b.t_start <= e <= b.t_end:
            best = min(best, e - t)
    return best


def test_stationary_points_both_still():
    a, b = still(0, 0, 0, 10), still(8, 0, 0, 20)
    cands = sft_stationary_points(a, b, 4.0)
    pc = PairCoeffs.from_pieces(a, b, 4.0)
    costs = {round(pc.earliest_arrival(t) - t, 12) for t in cands}
    assert costs == {2.0}


def test_stationary_points_perpendicular_matches_grid():
    a = LinePiece(P(0, 20), P(0, 0), 0.0, 20.0)
    b = LinePiece(P(30, 0), P(30, 20), 0.0, 40.0)
    _, cost = _cost_grid(a, b, 4.0)
    assert abs(_best_candidate(a, b, 4.0) - cost.min()) <= 1e-4


def test_stationary_points_intersecting_near_zero():
    a = LinePiece(P(0, 0), P(10, 10), 0.0, 20.0)
    b = LinePiece(P(10, 0), P(0, 10), 0.0, 20.0)
    best = _best_candidate(a, b, 4.0)
    assert 0.0 <= best <= 1e-6


@given(st.integers(0, 10_000))
def test_stationary_candidates_match_grid_random(seed):
    rng = np.random.default_rng(seed)
    a = LinePiece(P(*rng.uniform(0, 50, 2)), P(*rng.uniform(0, 50, 2)), 0.0, 60.0)
    b = LinePiece(P(*rng.uniform(0, 50, 2)), P(*rng.uniform(0, 50, 2)), 0.0, 80.0)
    assume(a.speed < 4 and b.speed < 4)
    _, cost = _cost_grid(a, b, 4.0, 20_000)
    ref = cost.min()
    assume(math.isfinite(ref))
    got = _best_candidate(a, b, 4.0)
    assert got <= ref + 1e-7
    assert ref - got <= 1e-2

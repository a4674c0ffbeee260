import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from mtbound.geometry import LinePiece, Point2, Trajectory  # noqa: E402
from mtbound.model import Instance, Target, TimeWindow  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_polyline(rng, k, speed=None, t0=0.0, t1=100.0, box=(20.0, 80.0)):
    """Random constant-speed polyline with ``k`` pieces over ``[t0, t1]``."""
    sp = rng.uniform(0.5, 1.0) if speed is None else speed
    p = rng.uniform(*box, size=2)
    cuts = [t0, *sorted(rng.uniform(t0, t1, size=k - 1)), t1]
    pieces = []
    for a, b in zip(cuts, cuts[1:]):
        h = rng.uniform(0, 2 * math.pi)
        q = p + sp * (b - a) * np.array([math.cos(h), math.sin(h)])
        pieces.append(LinePiece(Point2(*p), Point2(*q), float(a), float(b)))
        p = q
    return Trajectory(tuple(pieces), sp)


def stationary(x, y, t0=0.0, t1=100.0):
    return Trajectory((LinePiece(Point2(x, y), Point2(x, y), t0, t1),), 0.0)


def two_target_instance(ti, tj, v_max=4.0, depot=(10.0, 10.0)):
    full = (TimeWindow(0.0, 100.0),)
    return Instance(Point2(*depot), v_max, 100.0, (Target(1, ti, full), Target(2, tj, full)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_cluster_graph(rng, n_clusters, max_nodes=4, p_inf=0.15, integer=True):
    """Random clustered graph with depot_out=0 and depot_in last.

    Integer costs in 1..9 make exact ties common, which exercises tie-breaking.
    """
    from mtbound.bounds import IntervalNode
    from mtbound.graph import ClusteredGraph

    nodes = [IntervalNode(0, 0, 0.0, 0.0)]
    clusters = {}
    for c in range(1, n_clusters + 1):
        ids = []
        for _ in range(int(rng.integers(1, max_nodes + 1))):
            ids.append(len(nodes))
            nodes.append(IntervalNode(len(nodes), c, 0.0, 1.0))
        clusters[c] = ids
    nodes.append(IntervalNode(len(nodes), 0, 0.0, math.inf))
    N = len(nodes)
    W = rng.integers(1, 10, size=(N, N)).astype(float) if integer else rng.uniform(0, 10, size=(N, N))
    W[rng.random((N, N)) < p_inf] = np.inf
    tid = np.array([nd.target_id for nd in nodes])
    W[tid[:, None] == tid[None, :]] = np.inf
    W[:, 0] = np.inf
    W[N - 1, :] = np.inf
    W[0, N - 1] = np.inf
    return ClusteredGraph(tuple(nodes), clusters, 0, N - 1, W, "random", 0.0)


# acceptance criterion number -> (status, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {detail}")

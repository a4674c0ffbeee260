import math
import time

import numpy as np
import pytest

from mtbound.bounds import SamplingParams, edge_cost
from mtbound.generator import GeneratorConfig, generate
from mtbound.graph import (
    LEVELS,
    VariantUnsupported,
    build,
    delta_for_level,
    dumps,
    load_graph,
    loads,
    partition,
    reference_build,
    dump,
)
from mtbound.model import ParseError
from mtbound.gtsp import solve_exact


@pytest.fixture(scope="module")
def simple5():
    return generate(GeneratorConfig(5, "simple", 1))


@pytest.fixture(scope="module")
def complex5():
    return generate(GeneratorConfig(5, "complex", 2))


@pytest.mark.parametrize("level,count", [(1, 4), (2, 8), (3, 16), (4, 32)])
def test_table_counts(complex5, level, count):
    parts = partition(complex5, delta_for_level(level))
    assert all(len(v) == count for v in parts.values())


def test_one_node_per_window_when_delta_equals_window(simple5):
    parts = partition(simple5, 20.0)
    assert all(len(v) == 1 for v in parts.values())


def test_intervals_tile_windows(complex5):
    for tid, nodes in partition(complex5, 0.625).items():
        wins = complex5.target(tid).windows
        for w_idx, w in enumerate(wins):
            mine = [n for n in nodes if n.window == w_idx]
            assert mine[0].t_lo == w.lo and mine[-1].t_hi == w.hi
            for a, b in zip(mine, mine[1:]):
                assert a.t_hi == b.t_lo
            assert all(n.t_hi - n.t_lo == pytest.approx(0.625) for n in mine)


def test_short_tail_warns(simple5):
    with pytest.warns(UserWarning):
        parts = partition(simple5, 3.0)
    for nodes in parts.values():
        assert len(nodes) == 7 and nodes[-1].t_hi - nodes[-1].t_lo == pytest.approx(2.0)


def test_bad_level():
    with pytest.raises(ValueError):
        delta_for_level(5)


def test_structure_and_edge_count(complex5):
    g = build(complex5, LEVELS[4], "lite")
    assert len(g.nodes) == 162 and g.depot_out == 0 and g.depot_in == 161
    pairs = g.edge_pairs()
    assert len(pairs) == 160 * (160 - 32) + 2 * 160
    cl = {n.node_id: n.target_id for n in g.nodes}
    for u, v in pairs:
        assert u != v and (cl[u] != cl[v])
        assert u != g.depot_in and v != g.depot_out
    finite = g.weights[np.isfinite(g.weights)]
    assert (finite >= 0).all()
    # nothing but structural edges carries a weight
    mask = np.zeros_like(g.weights, dtype=bool)
    for u, v in pairs:
        mask[u, v] = True
    assert not np.isfinite(g.weights[~mask]).any()


@pytest.mark.parametrize("variant", ["lite", "geometric", "sampling", "linear"])
def test_vectorized_build_matches_per_edge(simple5, variant):
    g = build(simple5, LEVELS[2], variant)
    ref = reference_build(simple5, LEVELS[2], variant)
    assert np.array_equal(np.isinf(g.weights), np.isinf(ref.weights))
    fin = np.isfinite(ref.weights)
    assert np.allclose(g.weights[fin], ref.weights[fin], rtol=0, atol=1e-12)


def test_linear_rejected_on_generic():
    inst = generate(GeneratorConfig(3, "generic", 1))
    with pytest.raises(VariantUnsupported):
        build(inst, 5.0, "linear")
    assert math.isfinite(solve_exact(build(inst, 5.0, "sampling")).cost)


def test_deterministic_serialization(complex5):
    a = dumps(build(complex5, LEVELS[2], "sampling"))
    b = dumps(build(complex5, LEVELS[2], "sampling"))
    assert a == b


def test_round_trip(tmp_path, complex5):
    g = build(complex5, LEVELS[1], "linear")
    dump(g, tmp_path / "g.json")
    h = load_graph(tmp_path / "g.json")
    assert np.array_equal(g.weights, h.weights)
    assert h.nodes == g.nodes and h.clusters == g.clusters
    assert h.variant == "linear" and h.delta == 5.0
    assert dumps(h) == dumps(g)
    assert any(c is None for c in h.edges.values())


def test_version_mismatch(complex5):
    text = dumps(build(complex5, LEVELS[1], "lite")).replace('"version": 1', '"version": 9', 1)
    with pytest.raises(ParseError):
        loads(text)


def test_parent_child_monotone(complex5):
    coarse = build(complex5, 2.5, "linear")
    fine = build(complex5, 1.25, "linear")
    parent = {}
    for n in fine.nodes[1:-1]:
        parent[n.node_id] = next(m.node_id for m in coarse.nodes[1:-1]
                                 if m.target_id == n.target_id and m.t_lo - 1e-12 <= n.t_lo
                                 and n.t_hi <= m.t_hi + 1e-12)
    parent[fine.depot_out] = coarse.depot_out
    parent[fine.depot_in] = coarse.depot_in
    for u, v in fine.edge_pairs():
        assert fine.weights[u, v] >= coarse.weights[parent[u], parent[v]] - 1e-9


def test_lite_build_is_fast():
    inst = generate(GeneratorConfig(15, "complex", 3))
    t0 = time.perf_counter()
    g = build(inst, LEVELS[4], "lite")
    assert len(g.nodes) == 15 * 32 + 2
    assert time.perf_counter() - t0 < 5.0


def test_threads_env_gives_same_graph(monkeypatch, simple5):
    base = build(simple5, LEVELS[3], "sampling", SamplingParams())
    monkeypatch.setenv("MTBOUND_THREADS", "2")
    par = build(simple5, LEVELS[3], "sampling", SamplingParams())
    assert np.array_equal(base.weights, par.weights)


def test_edge_cost_spot_check(simple5):
    g = build(simple5, LEVELS[3], "linear")
    rng = np.random.default_rng(0)
    pairs = g.edge_pairs()
    for k in rng.choice(len(pairs), 50, replace=False):
        u, v = pairs[k]
        c = edge_cost(g.nodes[u], g.nodes[v], simple5, "linear")
        assert (c is None) == math.isinf(g.weights[u, v])

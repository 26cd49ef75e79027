from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridnet.generators import (
    ConstructionLog,
    GeneratorParams,
    NetworkKind,
    SubnetKind,
    SubnetPlan,
    generate,
    generate_ba,
    generate_network_i,
    generate_network_ii,
    generate_network_iii,
    generate_ws,
    ring_lattice,
)
from hybridnet.graph import GraphError, Origin


def rng(seed=0):
    return np.random.default_rng(seed)


# -- parameters -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(k_ring=3),
        dict(k_ring=0),
        dict(a=1.5),
        dict(a=-0.1),
        dict(p_rewire=1.1),
        dict(m_attach=0),
        dict(rng_seed=-1),
        dict(n_total=0),
    ],
)
def test_params_validation(kwargs):
    with pytest.raises(GraphError):
        GeneratorParams(**{"n_total": 100, **kwargs})


def test_node_budget_split():
    p = GeneratorParams(1000, a=0.9)
    assert (p.n_small_world, p.n_scale_free) == (100, 900)


def test_subnet_plan_rejects_empty_subnet():
    with pytest.raises(GraphError):
        SubnetPlan([3, 0])


# -- small world ------------------------------------------------------------------------


def test_ring_lattice_is_circulant():
    g = generate_ws(10, 4, 0.0, rng())
    assert np.all(g.degrees() == 4)
    for i in range(10):
        assert sorted(g.neighbors(i).tolist()) == sorted({(i + d) % 10 for d in (-2, -1, 1, 2)})


def test_full_rewiring_keeps_count_and_fixed_endpoint():
    for seed in range(20):
        g = generate_ws(10, 4, 1.0, rng(seed))
        assert g.edge_count == 20
        assert g.degrees().min() >= 2


@pytest.mark.parametrize("n,K", [(4, 4), (10, 3), (2, 2)])
def test_ws_preconditions(n, K):
    with pytest.raises(GraphError):
        generate_ws(n, K, 0.1, rng())


@given(st.integers(7, 300), st.sampled_from([2, 4, 6]), st.floats(0, 1), st.integers(0, 2**32))
def test_ws_invariants(n, K, p, seed):
    g = generate_ws(n, K, p, rng(seed))
    assert g.edge_count == n * K // 2
    assert g.degrees().min() >= K // 2
    assert np.all(g.origin == Origin.SMALL_WORLD)


def test_rewiring_matches_lattice_when_p_zero():
    src, dst = ring_lattice(50, 6)
    g = generate_ws(50, 6, 0.0, rng())
    assert set(zip(g.src.tolist(), g.dst.tolist())) == set(zip(np.minimum(src, dst).tolist(), np.maximum(src, dst).tolist()))


# -- scale free -----------------------------------------------------------------------------


def test_ba_triangle_only():
    for m in (1, 2, 5):
        g = generate_ba(3, m, rng())
        assert g.edge_count == 3 and np.all(g.degrees() == 2)


@pytest.mark.parametrize("n,m", [(2, 1), (10, 0)])
def test_ba_preconditions(n, m):
    with pytest.raises(GraphError):
        generate_ba(n, m, rng())


@given(st.integers(3, 400), st.integers(1, 3), st.integers(0, 2**32))
def test_ba_edge_count(n, m, seed):
    # with m <= 3 every new node can place all m edges on the triangle seed
    g = generate_ba(n, m, rng(seed))
    assert g.edge_count == 3 + (n - 3) * m
    assert g.is_connected()


def test_ba_caps_attachments_at_existing_nodes():
    # node 3 sees only three earlier nodes, so it adds three edges rather than five
    g = generate_ba(4, 5, rng())
    assert g.degree(3) == 3


def test_ba_fourth_node_attachment_distribution():
    # oracle: enumerate the outcomes. All three triangle nodes have degree 2, so
    # each of the three possible target pairs has probability 1/3; equivalently
    # each triangle node is the one left out with probability 1/3
    trials = 10_000
    left_out = Counter()
    for seed in range(trials):
        g = generate_ba(4, 2, rng(seed))
        deg = g.degrees()
        assert sorted(deg.tolist()) == [2, 2, 3, 3]
        assert deg[3] == 2
        (skipped,) = [i for i in range(3) if deg[i] == 2]
        left_out[skipped] += 1
    sd = math.sqrt(trials * (1 / 3) * (2 / 3))
    for node in range(3):
        assert abs(left_out[node] - trials / 3) < 3 * sd


def test_ba_attachment_follows_degree_on_unequal_seed():
    # seed graph: a star with centre 0 and leaves 1..3 (degrees 3,1,1,1); one new
    # node with m=1 must pick the centre with probability 3/6
    from hybridnet.graph import HybridGraph

    seed_graph = HybridGraph.from_edges(4, [0, 0, 0], [1, 2, 3])
    trials = 6000
    hits = sum(generate_ba(5, 1, rng(s), seed_graph=seed_graph).has_edge(4, 0) for s in range(trials))
    sd = math.sqrt(trials * 0.25)
    assert abs(hits - trials / 2) < 3 * sd


# -- network I ------------------------------------------------------------------------------------


def test_network_i_with_zero_fraction_equals_ws():
    p = GeneratorParams(300, a=0.0, k_ring=4, p_rewire=0.3, m_attach=4, rng_seed=5)
    g1 = generate(NetworkKind.I, p)
    g2 = generate(NetworkKind.WS, p)
    assert np.array_equal(g1.src, g2.src) and np.array_equal(g1.dst, g2.dst)


def test_network_i_construction_arithmetic():
    g = generate(NetworkKind.I, GeneratorParams(1000, a=0.9, k_ring=4, p_rewire=0.3, m_attach=4, rng_seed=0))
    assert np.count_nonzero(g.origin == Origin.SMALL_WORLD) == 100
    assert np.count_nonzero(g.origin == Origin.SCALE_FREE) == 900
    assert g.edge_count == 200 + 3600


@given(st.integers(50, 500), st.floats(0, 0.95), st.sampled_from([2, 4]), st.integers(1, 4), st.integers(0, 2**32))
def test_network_i_edge_formula(n, a, K, m, seed):
    p = GeneratorParams(n, a, K, 0.3, m, seed)
    if p.n_small_world <= max(K, m):
        return
    g = generate(NetworkKind.I, p)
    assert g.edge_count == p.n_small_world * K // 2 + p.n_scale_free * m


def test_network_i_requires_ring():
    with pytest.raises(GraphError):
        generate(NetworkKind.I, GeneratorParams(10, a=0.9))


# -- network II -------------------------------------------------------------------------------------


def test_network_ii_pure_ba_when_no_small_world_budget():
    g = generate(NetworkKind.II, GeneratorParams(200, a=1.0, rng_seed=3))
    assert np.all(g.origin == Origin.SCALE_FREE)
    assert np.all(g.subnet == 0)
    # node 3 can reach only the three triangle nodes; every later node adds m = 4
    assert g.edge_count == 3 + 3 + 196 * 4


def test_network_ii_every_subnet_bridged():
    for seed in range(20):
        log = ConstructionLog()
        p = GeneratorParams(1000, a=0.5, rng_seed=seed)
        g = generate_network_ii(p, rng(seed), log=log)
        assert np.count_nonzero(g.origin == Origin.SCALE_FREE) == 500
        assert np.all(g.subnet[g.origin == Origin.SCALE_FREE] == 0)
        sizes = np.bincount(g.subnet)[1:]
        assert sizes.sum() == 500 and sizes.min() >= p.k_ring + 1
        core = g.subnet == 0
        for s in range(1, g.subnet.max() + 1):
            members = np.flatnonzero(g.subnet == s)
            bridges = [(i, j) for i, j in zip(g.src.tolist(), g.dst.tolist()) if (g.subnet[i] == s) != (g.subnet[j] == s)]
            assert 1 <= len(bridges) <= math.ceil(0.1 * members.size)
            # each bridge joins a subnet member to the core, from distinct members
            ends = [i if g.subnet[i] == s else j for i, j in bridges]
            assert len(set(ends)) == len(ends)
            assert all(core[j] if g.subnet[i] == s else core[i] for i, j in bridges)
        internal = sum(e["details"]["edges"] for e in log if e["kind"] in ("ba_core", "ws_subnet"))
        assert internal + log.bridge_edges() == g.edge_count


def test_network_ii_requires_core():
    with pytest.raises(GraphError):
        generate(NetworkKind.II, GeneratorParams(100, a=0.02))


# -- network III --------------------------------------------------------------------------------------


def test_network_iii_single_subnet_has_no_bridges():
    p = GeneratorParams(50, a=1.0, m_attach=3, rng_seed=1)
    log = ConstructionLog()
    g = generate_network_iii(p, rng(1), plan=SubnetPlan([50], [SubnetKind.BA]), log=log)
    assert log.bridge_edges() == 0
    assert g.edge_count == 3 + 47 * 3


def test_network_iii_small_subnet_is_complete():
    plan = SubnetPlan([3, 20], [SubnetKind.BA, SubnetKind.WS])
    p = GeneratorParams(23, a=3 / 23, rng_seed=0)
    for kind in (SubnetKind.BA, SubnetKind.WS):
        plan = SubnetPlan([3, 20], [kind, SubnetKind.WS])
        g = generate_network_iii(p, rng(0), plan=plan)
        tri = [(i, j) for i, j in zip(g.src.tolist(), g.dst.tolist()) if i < 3 and j < 3]
        assert sorted(tri) == [(0, 1), (0, 2), (1, 2)]


def test_network_iii_two_edges_per_joined_subnet():
    for seed in range(10):
        log = ConstructionLog()
        p = GeneratorParams(2000, a=0.5, rng_seed=seed)
        g = generate_network_iii(p, rng(seed), log=log)
        n_sub = int(g.subnet.max()) + 1
        cross = np.count_nonzero(g.subnet[g.src] != g.subnet[g.dst])
        assert cross == log.bridge_edges() == 2 * (n_sub - 1)
        internal = sum(e["details"]["edges"] for e in log if e["kind"] in ("ws_subnet", "ba_subnet"))
        assert internal + cross == g.edge_count
        assert np.count_nonzero(g.origin == Origin.SMALL_WORLD) == p.n_small_world


def test_network_iii_plan_must_cover_all_nodes():
    with pytest.raises(GraphError):
        generate_network_iii(GeneratorParams(30, a=0.5), rng(), plan=SubnetPlan([10, 10], [SubnetKind.WS, SubnetKind.BA]))


def test_network_iii_subnet_choice_is_size_proportional():
    # start is random; with two existing subnets of sizes 10 and 30 the third
    # subnet should join the larger one three times as often
    picks = Counter()
    trials = 3000
    for seed in range(trials):
        log = ConstructionLog()
        plan = SubnetPlan([10, 30, 5], [SubnetKind.WS, SubnetKind.WS, SubnetKind.WS])
        generate_network_iii(GeneratorParams(45, a=0.0, rng_seed=seed), rng(seed), plan=plan, log=log)
        start = next(e for e in log if e["kind"] == "start_subnet")["details"]["subnet"]
        if start == 2:
            continue
        third = next(e for e in log if e["kind"] == "bridge" and e["details"]["subnet"] == 2)
        picks[third["details"]["target"]] += 1
    total = picks[0] + picks[1]
    sd = math.sqrt(total * 0.25 * 0.75)
    assert abs(picks[1] - 0.75 * total) < 3 * sd


# -- shared invariants -------------------------------------------------------------------------------


@pytest.mark.parametrize("kind", [NetworkKind.I, NetworkKind.II, NetworkKind.III])
@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
def test_origin_budget(kind, a):
    p = GeneratorParams(1000, a=a, rng_seed=4)
    g = generate(kind, p)
    assert np.count_nonzero(g.origin == Origin.SMALL_WORLD) == round((1 - a) * 1000)
    assert (g.subnet is None) == (kind is NetworkKind.I)


@pytest.mark.parametrize("kind", [NetworkKind.I, NetworkKind.III])
def test_connected_over_seeds(kind):
    for seed in range(20):
        g = generate(kind, GeneratorParams(1000, a=0.5, p_rewire=0.3, rng_seed=seed))
        assert g.is_connected()


@pytest.mark.slow
@pytest.mark.xfail(
    strict=True,
    reason="with size-proportional subnet wiring, Network III hubs stay far below the "
    "Network I hubs (measured ~40-120 vs ~3000-4900); recorded in the decisions ledger",
)
def test_network_iii_max_degree_exceeds_network_i():
    for seed in range(5):
        p = GeneratorParams(10**6, a=0.99, k_ring=4, p_rewire=0.3, m_attach=4, rng_seed=seed)
        assert generate(NetworkKind.III, p).max_degree() > generate(NetworkKind.I, p).max_degree()

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from sinkless.exec_models import RunTrace, make_schedule, run_slocal, run_staged, stage_orders
from sinkless.graph_core import (
    build_multigraph,
    caterpillar_graph,
    complete_graph,
    cycle_graph,
    fixture,
    gnm_graph,
    identity_ids,
    ladder_graph,
    make_ids,
    path_graph,
    random_multigraph,
    random_regular,
    random_tree,
)
from sinkless.slocal_so import (
    Clustering,
    LowDegreeLemmaError,
    assemble_orientation,
    build_cluster_graph,
    check_clustering,
    check_provenance,
    declared_locality,
    fast_pipeline,
    fast_report,
    find_cycle_or_low_degree,
    greedy_high_degree_so,
    greedy_invariant_check,
    orient_cluster,
    orient_inter_cluster,
    orient_intra_cluster,
    pipeline_stages,
    run_clustering,
    run_pipeline_composed,
    sinkless_orientation_slocal,
    t_param,
)
from sinkless.so_validate import threshold, validate_high_degree, validate_sinkless


# ---------------------------------------------------------------- parameters


def test_t_param_values():
    assert t_param(1024) == 4
    assert threshold(10**5) == 17 and t_param(10**5) == 5
    assert threshold(2) == 2 and t_param(2) == 1


def test_declared_locality_is_linear_in_T():
    assert [declared_locality(T) for T in (1, 4, 5)] == [39, 105, 127]
    for n in (7, 100, 1000, 10**5):
        assert sinkless_orientation_slocal().locality(n) == 22 * t_param(n) + 17


# ---------------------------------------------------------------- greedy


def test_three_parallel_edges_hand_trace():
    g = build_multigraph(2, [(0, 1), (0, 1), (0, 1)])
    o = greedy_high_degree_so(g, 2, [0, 1, 2], ids=[1, 2])
    assert o == {0: 0, 1: 1, 2: 0}
    assert validate_high_degree(g, o, 2) == []
    assert greedy_invariant_check(g, 2, [0, 1, 2], ids=[1, 2]).passed
    valid = [
        heads
        for heads in itertools.product((0, 1), repeat=3)
        if not validate_high_degree(g, dict(enumerate(heads)), 2)
    ]
    assert tuple(o[e] for e in range(3)) in valid


def test_low_degree_graph_accepts_anything():
    g = random_regular(30, 3, 2)
    o = greedy_high_degree_so(g, 10**6)
    assert len(o) == g.m and validate_high_degree(g, o, 10**6) == []


def test_empty_graph_passes_vacuously():
    g = build_multigraph(3, [])
    assert greedy_invariant_check(g, 3, []).passed


def test_cluster_sized_multigraph_all_orders():
    for seed in range(20):
        g = random_multigraph(50, 600, seed)
        rng = random.Random(seed)
        for _ in range(5):
            order = list(range(g.m))
            rng.shuffle(order)
            o = greedy_high_degree_so(g, 10**6, order)
            assert validate_high_degree(g, o, 10**6) == []


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 60), st.integers(0, 300), st.integers(0, 10**6), st.integers(1, 200))
def test_greedy_invariant_and_validity(n, m, seed, n_thr):
    g = random_multigraph(n, m, seed) if n > 1 else build_multigraph(1, [])
    rng = random.Random(seed)
    order = list(range(g.m))
    rng.shuffle(order)
    ids = list(range(n))
    rng.shuffle(ids)
    assert greedy_invariant_check(g, n_thr, order, ids).passed
    # validity needs the threshold source to be at least the node count
    src = max(n_thr, n)
    assert validate_high_degree(g, greedy_high_degree_so(g, src, order, ids), src) == []


def test_broken_rule_two_is_detected():
    fails = 0
    for seed in range(10):
        g = random_multigraph(100, 700, seed)
        fails += not greedy_invariant_check(g, 100, rule2="lowest_id").passed
    assert fails > 0


# ---------------------------------------------------------------- clustering


def test_complete_graph_single_cluster():
    g = complete_graph(8)
    sched = make_schedule("random", g, 4)
    for T in (0, 1, 2):
        c = run_clustering(g, identity_ids(8), sched, T)
        assert c.independent == {sched.order[0]}
        assert set(c.owner) == {sched.order[0]}


def test_far_apart_nodes_processed_first_both_join():
    T = 1
    g = path_graph(2 * T + 3)
    order = [0, 2 * T + 2] + list(range(1, 2 * T + 2))
    c = run_clustering(g, identity_ids(g.n), order, T)
    assert {0, 2 * T + 2} <= c.independent


def test_path_clustering_distances():
    g = path_graph(100)
    for seed in range(10):
        c = run_clustering(g, identity_ids(100), make_schedule("random", g, seed), 1)
        chk = check_clustering(g, c)
        assert chk.ok, chk.problems
        assert chk.max_owner_distance <= 3


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(0, 150), st.integers(0, 10**6), st.integers(0, 3))
def test_clustering_invariants(n, m, seed, T):
    g = gnm_graph(n, min(m, n * (n - 1) // 2), seed)
    ids = make_ids("random", g, seed)
    sched = make_schedule("random", g, seed)
    for composed in (True, False):
        c = run_clustering(g, ids, sched, T, composed=composed)
        assert check_clustering(g, c).ok
        assert check_provenance(g, c, build_cluster_graph(g, c))


def test_check_clustering_flags_bad_input():
    g = path_graph(5)
    bad = Clustering(frozenset({0, 1}), (0, 1, 1, 1, 1), 0)
    probs = {p[0] for p in check_clustering(g, bad).problems}
    assert "independent_too_close" in probs and "owner_too_far" in probs


# ---------------------------------------------------------------- cluster graph


def test_cluster_graph_examples():
    g = cycle_graph(5)
    one = build_cluster_graph(g, Clustering(frozenset({0}), (0,) * 5, 2))
    assert one.graph.n == 1 and one.graph.m == 0
    g = build_multigraph(4, [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3)])
    c = Clustering(frozenset({0, 2}), (0, 0, 2, 2), 0)
    cg = build_cluster_graph(g, c)
    assert cg.graph.n == 2 and cg.graph.m == 3 and cg.provenance == (2, 3, 4)
    assert check_provenance(g, c, cg)


def test_provenance_on_large_regular_graph():
    g = random_regular(1000, 3, 8)
    c = run_clustering(g, identity_ids(1000), make_schedule("random", g, 1), composed=False)
    assert check_provenance(g, c, build_cluster_graph(g, c))


# ---------------------------------------------------------------- inter and intra stages


def test_single_cluster_has_no_inter_edges():
    g = complete_graph(5)
    c = Clustering(frozenset({0}), (0,) * 5, 1)
    assert orient_inter_cluster(g, c, identity_ids(5), range(5)) == {}


def test_two_clusters_three_edges():
    g = build_multigraph(6, [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)])
    c = Clustering(frozenset({1, 4}), (1, 1, 1, 4, 4, 4), 1)
    o = orient_inter_cluster(g, c, identity_ids(6), range(6))
    assert set(o) == {4, 5, 6}
    assert all(o[e] in g.edges[e] for e in o)


def test_high_degree_clusters_get_an_outgoing_edge():
    for seed in range(15):
        g = gnm_graph(120, 360, seed)
        ids = make_ids("random", g, seed)
        sched = make_schedule("random", g, seed)
        c = run_clustering(g, ids, sched, 1)
        cg = build_cluster_graph(g, c)
        o = orient_inter_cluster(g, c, ids, sched, cg)
        idx = cg.cluster_index()
        heads = {ce: idx[c.owner[o[e]]] for ce, e in enumerate(cg.provenance)}
        assert validate_high_degree(cg.graph, heads, g.n) == []


def test_find_cycle_or_low_degree_examples():
    assert find_cycle_or_low_degree(build_multigraph(1, [])) == ("node", 0)
    tri_pendant = build_multigraph(4, [(0, 1), (1, 2), (2, 0), (2, 3)])
    kind, cyc = find_cycle_or_low_degree(tri_pendant)
    assert kind == "cycle" and sorted(e for e, _, _ in cyc) == [0, 1, 2]
    assert find_cycle_or_low_degree(path_graph(5)) == ("node", 0)


def test_acyclic_high_degree_subgraph_raises():
    tree = random_tree(10, 1)
    with pytest.raises(LowDegreeLemmaError):
        find_cycle_or_low_degree(tree, degrees=[3] * 10)


def test_path_cluster_oriented_toward_its_outgoing_end():
    members = list(range(5))
    intra = {e: (e, e + 1) for e in range(4)}
    heads = orient_cluster(members, intra, [(9, 4, 7)], lambda x: x, lambda x: 3)
    assert heads == {0: 1, 1: 2, 2: 3, 3: 4}


def test_single_node_cluster():
    assert orient_cluster([3], {}, [], lambda x: x, lambda x: 1) == {}


def test_intra_stage_orientation_via_function():
    g = gnm_graph(60, 150, 5)
    ids = make_ids("random", g, 1)
    sched = make_schedule("bfs", g, 1)
    c = run_clustering(g, ids, sched, 1, composed=False)
    inter = orient_inter_cluster(g, c, ids, sched)
    full = orient_intra_cluster(g, c, inter, ids, sched)
    assert len(full) == g.m and validate_sinkless(g, full) == []


# ---------------------------------------------------------------- pipeline


def test_fig1_path():
    g, _ = fixture("fig1_path")
    run = run_pipeline_composed(g, identity_ids(7), make_schedule("identity", g))
    assert run.report.violations == []
    assert run.report.measured_max_radius <= run.report.declared_locality


@pytest.mark.parametrize("name", ["k6_cover", "pg24", "k55"])
def test_fixtures_composed(name):
    g, _ = fixture(name)
    sched = make_schedule("random", g, 2)
    run = run_pipeline_composed(g, make_ids("random", g, 2), sched)
    assert run.report.violations == []


def test_trees_and_long_graphs_composed():
    for g in (random_tree(80, 3), ladder_graph(40), caterpillar_graph(30)):
        run = run_pipeline_composed(g, make_ids("random", g, 1), make_schedule("interleave", g))
        assert run.report.violations == []
        assert run.report.measured_max_radius <= run.report.declared_locality


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 50), st.integers(0, 120), st.integers(0, 10**6), st.integers(1, 2))
def test_fast_engine_matches_faithful_staged_run(n, m, seed, T):
    g = gnm_graph(n, min(m, n * (n - 1) // 2), seed)
    ids = make_ids("random", g, seed)
    sched = make_schedule(random.Random(seed).choice(["random", "bfs", "degree", "reverse"]), g, seed)
    fr = fast_pipeline(g, ids, sched.order, T=T, strict=False)
    prior = None
    for k, alg in enumerate(pipeline_stages(T=T)):
        trace = RunTrace()
        prior, _ = run_slocal(g, ids, sched, alg, prior=prior, trace=trace)
        for v, r in trace.reach.items():
            assert r <= fr.reach[k][v] <= alg.locality(n)
            if k < 2:
                assert r == fr.reach[k][v]
        if k == 1:
            assert [prior[v][1] for v in range(n)] == fr.owner.tolist()
    assert assemble_orientation(g, prior) == fr.orientation
    assert validate_sinkless(g, fr.orientation) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 90), st.integers(0, 10**6))
def test_composed_pipeline_equals_staged_replay(n, m, seed):
    g = gnm_graph(n, min(m, n * (n - 1) // 2), seed)
    ids = make_ids("random", g, seed)
    sched = make_schedule("random", g, seed)
    run = run_pipeline_composed(g, ids, sched, T=1)
    alg = sinkless_orientation_slocal(T=1)
    staged = run_staged(g, ids, stage_orders(alg, run.states, sched.order))
    assert staged[-1] == run.outputs
    assert run.report.violations == []
    assert run.trace.max_radius <= alg.locality(n)


def test_large_regular_graph_fast_engine():
    g = random_regular(10**4, 3, 3)
    ids = make_ids("random", g, 3)
    run = fast_pipeline(g, ids, make_schedule("random", g, 3).order)
    rep = fast_report(g, run)
    assert rep.violations == [] and rep.lemma_errors == 0
    assert rep.measured_max_radius <= rep.declared_locality == 105

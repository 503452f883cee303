import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from sinkless.graph_core import (
    Color,
    build_graph,
    build_multigraph,
    complete_bipartite,
    cycle_graph,
    gnm_graph,
    path_graph,
    random_multigraph,
    random_regular,
    random_tree,
    star_graph,
)
from sinkless.so_validate import (
    ACTIVE_SINK,
    I,
    O,
    PASSIVE_SINK,
    SINK,
    ValidationError,
    dumps_orientation,
    find_first_cycle,
    global_orientation,
    labeling_to_orientation,
    loads_orientation,
    orientation_to_labeling,
    threshold,
    validate_bipartite,
    validate_high_degree,
    validate_sinkless,
)


def brute_force_sinks(g, o):
    return sorted(v for v in range(g.n) if g.degree(v) >= 3 and all(o[e] == v for e, _ in g.incidence[v]))


# ---------------------------------------------------------------- validate_sinkless


def test_cyclic_triangle_has_no_constraints():
    g = cycle_graph(3)
    assert validate_sinkless(g, {0: 1, 1: 2, 2: 0}) == []


def test_star_all_inward_is_a_sink():
    g = star_graph(3)
    viol = validate_sinkless(g, {e: 0 for e in range(3)})
    assert [(v.node, v.kind, v.degree) for v in viol] == [(0, SINK, 3)]


def test_star_with_one_outward_edge_is_valid():
    g = star_graph(3)
    o = {0: 0, 1: 0, 2: g.edges[2][1]}
    assert validate_sinkless(g, o) == []


def test_partial_orientation_is_rejected():
    with pytest.raises(ValidationError):
        validate_sinkless(star_graph(3), {0: 0})
    with pytest.raises(ValidationError):
        validate_sinkless(path_graph(3), {0: 2, 1: 2})


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 30), st.integers(0, 10**6))
def test_validator_matches_brute_force(n, m, seed):
    g = random_multigraph(n, m, seed)
    rng = random.Random(seed)
    o = {e: rng.choice(g.edges[e]) for e in range(g.m)}
    assert [v.node for v in validate_sinkless(g, o)] == brute_force_sinks(g, o)


# ---------------------------------------------------------------- high degree


def test_threshold_values():
    assert threshold(1024) == 11
    assert threshold(2) == 2
    assert threshold(17) == 5
    assert threshold(1) == 1


def test_high_degree_parallel_edges():
    g = build_multigraph(2, [(0, 1), (0, 1), (0, 1)])
    viol = validate_high_degree(g, {0: 0, 1: 0, 2: 0}, 2)
    assert [v.node for v in viol] == [0]


def test_high_degree_ignores_low_degree_nodes():
    g = random_regular(30, 5, 1)
    rng = random.Random(0)
    o = {e: rng.choice(g.edges[e]) for e in range(g.m)}
    assert validate_high_degree(g, o, 1024) == []


# ---------------------------------------------------------------- bipartite


def k55_all_input():
    g, col = complete_bipartite(5, 5)
    return g, col, set(range(g.m))


def test_all_o_gives_passive_sinks():
    g, col, inp = k55_all_input()
    lab = {(a, e): O for e, (a, b) in enumerate(g.edges)}
    viol = validate_bipartite(g, col, inp, Color.BLACK, lab)
    assert sorted(v.node for v in viol) == [5, 6, 7, 8, 9]
    assert {v.kind for v in viol} == {PASSIVE_SINK}


def test_all_i_gives_active_sinks():
    g, col, inp = k55_all_input()
    lab = {(a, e): I for e, (a, b) in enumerate(g.edges)}
    viol = validate_bipartite(g, col, inp, Color.BLACK, lab)
    assert sorted(v.node for v in viol) == [0, 1, 2, 3, 4]
    assert {v.kind for v in viol} == {ACTIVE_SINK}


def test_perfect_matching_has_no_constraints():
    g, col = complete_bipartite(5, 5)
    inp = [e for e, (a, b) in enumerate(g.edges) if b == a + 5]
    for labels in itertools.product((O, I), repeat=5):
        lab = {(g.edges[e][0], e): x for e, x in zip(inp, labels)}
        assert validate_bipartite(g, col, inp, Color.BLACK, lab) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**25 - 1), st.integers(0, 2**25 - 1))
def test_bipartite_validator_matches_orientation_semantics(mask, labmask):
    g, col = complete_bipartite(5, 5)
    inp = [e for e in range(g.m) if mask >> e & 1]
    lab = {(g.edges[e][0], e): (O if labmask >> e & 1 else I) for e in inp}
    viol = validate_bipartite(g, col, inp, Color.BLACK, lab)
    # independent check: orient, then look for sinks of input-degree >= 3 in H
    o = labeling_to_orientation(g, lab)
    h_inc = {v: [e for e, _ in g.incidence[v] if e in o] for v in range(g.n)}
    want = sorted(v for v in range(g.n) if len(h_inc[v]) >= 3 and all(o[e] == v for e in h_inc[v]))
    assert sorted(v.node for v in viol) == want


# ---------------------------------------------------------------- conversions


def test_single_edge_conversions():
    g = build_graph(2, [(0, 1)])
    from sinkless.graph_core import TwoColoring

    col = TwoColoring((Color.BLACK, Color.WHITE))
    assert labeling_to_orientation(g, {(0, 0): O}) == {0: 1}
    assert labeling_to_orientation(g, {(0, 0): I}) == {0: 0}
    assert orientation_to_labeling(g, {0: 1}, col, Color.BLACK) == {(0, 0): O}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**25 - 1), st.sampled_from([Color.BLACK, Color.WHITE]))
def test_labeling_roundtrip(bits, active):
    g, col = complete_bipartite(5, 5)
    o = {e: g.edges[e][bits >> e & 1] for e in range(g.m)}
    lab = orientation_to_labeling(g, o, col, active)
    assert labeling_to_orientation(g, lab) == o


def test_bad_label_rejected():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValidationError):
        labeling_to_orientation(g, {(0, 0): "X"})


# ---------------------------------------------------------------- reference orientation


def test_path_is_oriented_toward_one_endpoint():
    g = path_graph(4)
    o = global_orientation(g)
    assert set(o.values()) <= {0, 1, 2}
    assert o == {0: 0, 1: 1, 2: 2}
    assert validate_sinkless(g, o) == []


def test_triangle_with_pendant():
    g = build_graph(4, [(0, 1), (1, 2), (2, 0), (2, 3)])
    o = global_orientation(g)
    heads = [o[e] for e in range(3)]
    assert sorted(heads) == [0, 1, 2]
    assert o[3] == 2
    assert validate_sinkless(g, o) == []


def test_large_regular_graph():
    g = random_regular(1000, 3, 5)
    assert validate_sinkless(g, global_orientation(g)) == []


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 60), st.integers(0, 150), st.integers(0, 10**6), st.booleans())
def test_global_orientation_is_sinkless(n, m, seed, multi):
    g = random_multigraph(n, m, seed) if multi and n > 1 else gnm_graph(n, min(m, n * (n - 1) // 2), seed)
    ids = list(range(1, n + 1))
    random.Random(seed).shuffle(ids)
    o = global_orientation(g, ids)
    assert len(o) == g.m
    assert validate_sinkless(g, o) == []


def test_global_orientation_on_trees_has_no_sink():
    for seed in range(20):
        g = random_tree(40, seed)
        assert validate_sinkless(g, global_orientation(g)) == []


def test_find_first_cycle_is_consistent():
    g = random_multigraph(12, 30, 4)
    cyc = find_first_cycle(g, range(g.n))
    assert cyc is not None
    for (e, t, h), (_, t2, _) in zip(cyc, cyc[1:] + cyc[:1]):
        assert set(g.edges[e]) == {t, h} and h == t2
    assert find_first_cycle(random_tree(10, 1), range(10)) is None


def test_orientation_text_roundtrip():
    o = {3: 1, 0: 2, 7: 7}
    assert loads_orientation(dumps_orientation(o)) == o

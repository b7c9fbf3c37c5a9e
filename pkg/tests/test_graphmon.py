import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from graphmonoid import graphmon as gm
from graphmonoid.graphmon import FiniteGraph, FreeElement, GraphError, GraphTemplate, LadderFamily

P = FreeElement.parse


def graph(edges):
    return FiniteGraph.build(edges, {v: P(e) for v, e in edges.items()})


def test_free_element_parse_and_print():
    assert P("v + 2w") == FreeElement.of({"v": 1, "w": 2})
    assert P("3*v_1^2") == FreeElement.of({"v_1^2": 3})
    assert P("0").is_zero() and P("").is_zero()
    assert str(P("w + v + v")) == "2v + w"
    with pytest.raises(GraphError):
        P("v + -w")
    with pytest.raises(GraphError):
        P("v") - P("w")


def test_free_element_arithmetic():
    a, b = P("2v + w"), P("v + 3u")
    assert a + b == P("3v + w + 3u")
    assert a.meet(b) == P("v")
    assert P("v").leq(a) and not b.leq(a)
    assert (a * 2).size == 6


def test_graph_build_rejects_unknown_vertices():
    with pytest.raises(GraphError):
        FiniteGraph.build(["v"], {"v": P("w")})
    with pytest.raises(GraphError):
        FiniteGraph.build(["v"], {"w": P("v")})


def test_equal_found_for_single_rewrite():
    g = graph({"v": "2w", "w": ""})
    res = gm.equal_bounded(g, P("v"), P("2w"))
    assert res.status == "Equal"
    assert res.witness == P("2w")
    assert gm.replay(g, P("v"), res.left) == gm.replay(g, P("2w"), res.right) == res.witness


def test_distinct_sinks_are_unknown():
    g = graph({"v": "", "w": ""})
    assert gm.equal_bounded(g, P("v"), P("w")).status == "Unknown"


def test_equal_on_unknown_vertex_raises():
    with pytest.raises(GraphError):
        gm.equal_bounded(graph({"v": ""}), P("v"), P("x"))


def test_depth_zero_only_trivial():
    g = graph({"v": "v + w", "w": "w"})
    assert gm.equal_bounded(g, P("v"), P("v"), depth=0).equal
    assert not gm.equal_bounded(g, P("v"), P("v + w"), depth=0).equal
    assert gm.equal_bounded(g, P("v"), P("v + w"), depth=1).equal


def test_closure_pulls_in_predecessor():
    g = graph({"v": "w", "w": ""})
    assert gm.hereditary_saturated_closure(g, ["w"]) == {"v", "w"}
    assert gm.enumerate_hereditary_saturated(g) == [frozenset(), frozenset({"v", "w"})]


def test_ideals_example():
    g = graph({"v": "v + w", "w": "w"})
    assert gm.enumerate_hereditary_saturated(g) == [frozenset(), frozenset({"w"}), frozenset({"v", "w"})]


def test_ideal_guard():
    g = FiniteGraph.build([f"u{i}" for i in range(5)], {})
    with pytest.raises(GraphError):
        gm.enumerate_hereditary_saturated(g, guard=4)


def test_restriction_and_quotient():
    g = graph({"v": "v + w", "w": "w"})
    assert gm.restriction(g, ["w"]).vertices == ("w",)
    q = gm.quotient_graph(g, ["w"])
    assert q.vertices == ("v",) and q.r("v") == P("v")
    with pytest.raises(GraphError):
        gm.restriction(g, ["v"])


def test_ladder_truncation():
    t = GraphTemplate(graph({"a": "a"}), (LadderFamily("L", "a", 2),), (("a", "L", 1),))
    g = gm.instantiate(t, 6)
    R = lambda j: f"a^{j}"  # noqa: E731
    assert g.r("a") == P("a") + FreeElement.of({R(1): 1})
    assert g.r(R(1)) == FreeElement.of({"a": 2, R(1): 1, R(3): 1})
    assert g.r(R(2)) == FreeElement.of({R(1): 1, R(2): 1})
    assert g.r(R(3)) == FreeElement.of({R(2): 1, R(3): 1, R(5): 1})
    assert g.r(R(4)) == FreeElement.of({R(3): 1, R(4): 1})
    assert g.is_sink(R(5))
    assert g.r(R(6)) == FreeElement.of({R(5): 1, R(6): 1})
    for bad in (3, 5, 2):
        with pytest.raises(GraphError):
            gm.instantiate(t, bad)


def test_template_json_roundtrip():
    t = GraphTemplate(graph({"a": "2a + b", "b": ""}), (LadderFamily("L", "a", 3),), (("a", "L", 1),))
    data = t.to_json()
    assert gm.template_from_json(data).to_json() == data
    with pytest.raises(GraphError):
        gm.template_from_json({"core_vertices": ["a"], "edges": [{"from": "a", "to": "a", "mult": 0}]})
    with pytest.raises(GraphError):
        gm.template_from_json({"edges": []})


def test_dot_export():
    g = graph({"v": "2w", "w": ""})
    text = gm.export_dot(g)
    assert text == gm.export_dot(g)
    assert '"v" -> "w" [label="2"];' in text
    assert gm.export_dot(g, expand=True).count('"v" -> "w";') == 2
    assert gm.export_dot(FiniteGraph.build([], {})) == "digraph { }\n"


# -- properties ---------------------------------------------------------------

names = ["a", "b", "c", "d"]
small_graphs = st.lists(st.lists(st.sampled_from(names), max_size=3), min_size=4, max_size=4).map(
    lambda outs: FiniteGraph.build(names, {v: FreeElement.of(o) for v, o in zip(names, outs)}))
elements = st.lists(st.sampled_from(names), min_size=1, max_size=3).map(FreeElement.of)


def with_loops(g):
    return FiniteGraph.build(g.vertices, {v: (e + FreeElement.of([v]) if not e.is_zero() else e)
                                          for v, e in zip(g.vertices, g.out)})


@settings(max_examples=60, deadline=None)
@given(small_graphs, elements, elements)
def test_equal_witness_replays(g, a, b):
    res = gm.equal_bounded(g, a, b, depth=4, size_cap=12)
    if res.equal:
        assert gm.replay(g, a, res.left) == res.witness == gm.replay(g, b, res.right)
        assert len(res.left) <= 4 and len(res.right) <= 4 and res.witness.size <= 12


@settings(max_examples=60, deadline=None)
@given(small_graphs, elements, elements)
def test_ilp_and_bfs_agree_on_looped_graphs(g, a, b):
    g = with_loops(g)
    ilp = gm.equal_bounded(g, a, b, depth=3, size_cap=12, method="ilp")
    bfs = gm.equal_bounded(g, a, b, depth=3, size_cap=12, method="bfs")
    assert ilp.equal == bfs.equal


def brute_force_ideals(g):
    out = []
    for k in range(len(g.vertices) + 1):
        for H in itertools.combinations(g.vertices, k):
            if gm.is_hereditary(g, H) and gm.is_saturated(g, H):
                out.append(frozenset(H))
    return sorted(out, key=lambda s: (len(s), sorted(s)))


@settings(max_examples=80, deadline=None)
@given(small_graphs)
def test_hereditary_saturated_enumeration_matches_brute_force(g):
    assert gm.enumerate_hereditary_saturated(g) == brute_force_ideals(g)


@settings(max_examples=60, deadline=None)
@given(small_graphs, st.sets(st.sampled_from(names)))
def test_closure_is_least_hereditary_saturated_superset(g, X):
    H = gm.hereditary_saturated_closure(g, X)
    assert X <= H and gm.is_hereditary(g, H) and gm.is_saturated(g, H)
    assert all(H <= K for K in brute_force_ideals(g) if X <= K)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_refinement_probe_never_fails(seed):
    g = gm.random_graph(random.Random(seed))
    rep = gm.refinement_probe(g, trials=5, depth=6, seed=seed)
    assert not rep.failures
    for r in rep.records:
        if r.outcome == "refined":
            z11, z12, z21, z22 = r.matrix
            for x, y in [(r.a, z11 + z12), (r.b, z21 + z22), (r.c, z11 + z21), (r.d, z12 + z22)]:
                assert gm.equal_bounded(g, x, y, depth=6, size_cap=60).equal


def test_refine_explicit():
    g = graph({"v": "v + w", "w": "w"})
    rec = gm.refine(g, P("v"), P("w"), P("v"), P("2w"))
    assert rec.outcome == "refined"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_merge_preserves_edge_count(seed):
    g = gm.random_graph(random.Random(seed))
    m = g.merge({v: "z" for v in g.vertices[:2]})
    assert m.edge_count() == g.edge_count()

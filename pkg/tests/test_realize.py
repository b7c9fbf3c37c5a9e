import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from graphmonoid import builtins as B
from graphmonoid import graphmon as gm
from graphmonoid import isystem as I
from graphmonoid import realize as R
from graphmonoid.fgab import FGAbelianGroup, GroupHom
from graphmonoid.graphmon import FreeElement

from helpers import random_regular_system

P = FreeElement.parse


def core_edges(synthesis):
    t = synthesis.template
    return {v: str(e) for v, e in zip(t.core.vertices, t.core.out)}


def test_decide_examples():
    d = R.decide(B.nographpab())
    assert d.overall == R.NOT_REALIZABLE
    c = d.certificate("p")
    assert c.kernel_type == "noncyclic" and c.kernel_structure == "Z^2"
    assert R.decide(B.examfree(3, 2)).realizable
    assert not R.decide(B.examfree(3, 1, 2)).realizable
    assert R.decide(B.easy(3)).realizable
    assert R.decide(B.zplusinf()).realizable


def test_decide_rejects_invalid_system():
    with pytest.raises(R.InvalidSystem):
        R.decide(B.examfree(2, 2))
    with pytest.raises(ValueError):
        R.decide(B.easy(), policy="other")


def test_cone_ab_certificate_witness():
    c = R.decide(B.cone_ab()).certificate("b")
    assert c.verdict == "pass" and c.kernel_type == "Z"
    assert c.positive_generator == (2,)
    assert c.witness == (("a", (2,)),)


def test_decision_json_shape():
    data = R.decide(B.nographpab()).to_json()
    assert data["overall"] == "not_realizable"
    assert set(data["primes"][-1]) == {"prime", "surjective", "kernel", "cyclic", "generator_tried",
                                       "positive_generator", "witness", "verdict", "note"}
    json.dumps(data)


def test_trivial_kernel_policy():
    # free p over a regular q, all groups trivial: the kernel is trivial
    T = FGAbelianGroup(0)
    sys = I.ISystem.build([("q", I.REGULAR, T), ("p", I.FREE, T)], [("q", "p")],
                          {("q", "p"): I.ConnectingMap(GroupHom.zero(T, T))})
    lit = R.decide(sys, policy=R.LITERAL).certificate("p")
    vac = R.decide(sys, policy=R.VACUOUS).certificate("p")
    assert lit.kernel_type == "trivial" and vac.kernel_type == "trivial"
    assert lit.verdict == vac.verdict == "pass"
    assert lit.positive_generator == () and vac.positive_generator is None


def test_antisymmetric_oracle_refuses_groups():
    with pytest.raises(ValueError):
        R.antisymmetric_oracle(B.en(1))


def test_synth_en_graph():
    for n in range(0, 4):
        e = core_edges(R.synth(B.en(n)))
        assert e == {"v_1": "2v_1 + v_2", "v_2": "v_1 + 2v_2",
                     "w_1": f"v_2 + {n + 2}w_1 + w_2", "w_2": "w_1 + 2w_2"}


def test_synth_easy_graph():
    s = R.synth(B.easy(2))
    assert core_edges(s) == {"p": "p + 2q", "q": "q"}
    assert not s.template.ladders


def test_synth_rejects_unrealizable():
    with pytest.raises(R.NotRealizable):
        R.synth(B.nographpab())


def test_synth_empty_system():
    sys = I.ISystem.build([], [], {})
    s = R.synth(sys)
    assert s.template.core.vertices == ()
    assert R.verify(sys, s.template, s.genmap).ok


def test_synth_group_gives_group():
    t, gmap = R.synth_group(FGAbelianGroup(0, (3,)))
    g = gm.instantiate(t)
    x = gmap.forward["x1[v]"]
    # three copies of the generator are neutral: 3x + x = x
    assert gm.equal_bounded(g, x * 4, x).equal


def test_positivity_witness_expansion():
    sys = B.cone_ab()
    assert R.positivity_witness_expansion(sys, "b", [("a", (1,))]) == {"a": {"n": 1, "coeffs": {}}}
    Zsys = I.ISystem.build([("v", I.REGULAR, FGAbelianGroup(1))], [], {})
    out = R.positivity_witness_expansion(Zsys, "v", [("v", (-3,))])
    assert out == {"v": {"coeffs": {"x1[v]": 0, "x2[v]": 3}}}
    zero = R.positivity_witness_expansion(Zsys, "v", [("v", (0,))])
    assert zero == {"v": {"coeffs": {"x1[v]": 0, "x2[v]": 0}}}


def test_verify_builtins():
    for sys in [B.zplusinf(), B.en(2), B.f_system(), B.easy(2), B.examfree(2, 1, 2), B.cone_ab()]:
        s = R.synth(sys)
        rep = R.verify(sys, s.template, s.genmap)
        assert rep.ok, [c.to_json() for c in rep.checks if c.outcome != "pass"]


def test_verify_detects_corrupted_map():
    sys = B.en(2)
    s = R.synth(sys)
    data = s.genmap.to_json()
    for entry in data["vertices"]:
        if entry["vertex"] == "w_1":
            entry["coords"] = [entry["coords"][0] + 1]
    bad = R.genmap_from_json(data)
    rep = R.verify(sys, s.template, bad)
    assert rep.count("fail") > 0 and not rep.ok


def test_verify_detects_missing_edge():
    sys = B.en(2)
    s = R.synth(sys)
    data = s.template.to_json()
    data["edges"] = [e for e in data["edges"] if not (e["from"] == "w_1" and e["to"] == "v_2")]
    rep = R.verify(sys, gm.template_from_json(data), s.genmap)
    assert rep.count("fail") > 0


def test_verify_depth_zero_is_inconclusive():
    sys = B.en(2)
    s = R.synth(sys)
    rep = R.verify(sys, s.template, s.genmap, depth=0)
    assert rep.count("fail") == 0 and rep.count("inconclusive") > 0


def test_genmap_json_roundtrip():
    s = R.synth(B.f_system())
    data = s.genmap.to_json()
    assert R.genmap_from_json(json.loads(json.dumps(data))).to_json() == data
    # ladder rungs stand for the neutral element of their prime
    assert s.genmap.delta("v_1^3") == ("v", (0,))
    assert s.genmap.delta("v_1") == ("v", (1,))


def test_delta_of_respects_edges():
    sys = B.f_system()
    s = R.synth(sys)
    g = gm.instantiate(s.template)
    for v, rv in gm.relations_of(g):
        assert R.delta_of(sys, s.genmap, P(v)) == R.delta_of(sys, s.genmap, rv)


# -- properties ---------------------------------------------------------------

seeds = st.integers(0, 100_000)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_regular_systems_always_realizable(seed):
    sys = random_regular_system(random.Random(seed))
    d = R.decide(sys)
    assert d.realizable and d.certificates == []


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_synthesized_graph_respects_inverse_map(seed):
    sys = random_regular_system(random.Random(seed))
    s = R.synth(sys)
    rep = R.verify(sys, s.template, s.genmap, depth=0)
    assert all(c.outcome == "pass" for c in rep.checks if c.direction == "graph->monoid")


def renamed(data, prefix):
    ren = lambda n: prefix + n  # noqa: E731
    return {
        "primes": [dict(p, name=ren(p["name"])) for p in data["primes"]],
        "order": [[ren(a), ren(b)] for a, b in data["order"]],
        "maps": [dict(m, **{"from": ren(m["from"]), "to": ren(m["to"])}) for m in data["maps"]],
    }


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 4), st.integers(1, 3), st.sampled_from(["nographpab", "easy", "zplusinf"]))
def test_decide_is_local(r, s, k, other):
    # the verdict of a free prime depends only on the system below it
    if s > r:
        return
    left = I.to_json(B.examfree(r, s, k))
    right = I.to_json(B.get(other))
    a, b = renamed(left, "L"), renamed(right, "R")
    union = I.from_json({key: a[key] + b[key] for key in a})
    d = R.decide(union, check=False)
    for part, prefix in [(left, "L"), (right, "R")]:
        sub = R.decide(I.from_json(part), check=False)
        for c in sub.certificates:
            assert d.certificate(prefix + c.prime).verdict == c.verdict


def test_verify_trivial_layer_without_hub():
    # a trivial group padded to three factors has no hub vertex
    G = FGAbelianGroup(0, (2, 2, 2))
    T = FGAbelianGroup(0)
    sys = I.ISystem.build([("a", I.REGULAR, G), ("b", I.REGULAR, T)], [("a", "b")],
                          {("a", "b"): I.ConnectingMap(GroupHom.zero(G, T))})
    s = R.synth(sys)
    assert s.components["b"].hub is None and len(s.components["b"].gens) == 3
    rep = R.verify(sys, s.template, s.genmap)
    assert rep.ok, [c.to_json() for c in rep.checks if c.outcome != "pass"]


def test_verify_rejects_layer_without_loops():
    sys = B.en(2)
    s = R.synth(sys)
    data = s.template.to_json()
    data["edges"] = [e for e in data["edges"] if not (e["from"] == "w_2" and e["to"] == "w_2")]
    rep = R.verify(sys, gm.template_from_json(data), s.genmap)
    reasons = [c.stats.get("reason", "") for c in rep.checks if c.outcome == "fail"]
    assert any("strongly connected" in r for r in reasons)


def test_layer_identities_cover_torsion_neutral_and_rungs():
    s = R.synth(B.f_system())
    g = gm.instantiate(s.template)
    layer = R._layers(B.f_system(), s.template, s.genmap, g)["w"]
    names = [n for n, _ in R._layer_identities(layer)]
    assert names == ["2w_1=0", "e=0", "w_1^1=0"]


def random_generator_word(rng, sys):
    out = []
    for _ in range(rng.randint(1, 3)):
        q = rng.choice(sys.primes)
        out.append((q, rng.randint(1, sys.group[q].dim + 1), rng.randint(1, 2)))
    return out


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_equal_modulo_agrees_with_monoid(seed):
    rng = random.Random(seed)
    sys = random_regular_system(rng)
    s = R.synth(sys)
    g = gm.instantiate(s.template)
    assert R.verify(sys, s.template, s.genmap).ok
    layers = R._layers(sys, s.template, s.genmap, g)
    top = sys.poset.linear_extension()[-1]
    own = (top, {**layers[top].values, **{r: (0,) * sys.group[top].dim for r in layers[top].rungs}})
    lower = {}
    for p in sys.poset.below(top):
        lower.update({v: (p, c) for v, c in layers[p].values.items()})
    gamma = lambda w: sum((s.genmap.forward[R._gen_key(q, j)] * m for q, j, m in w), FreeElement())  # noqa: E731
    for _ in range(5):
        a, b = random_generator_word(rng, sys), random_generator_word(rng, sys)
        res = R.equal_modulo(sys, g, gamma(a), gamma(b), own, lower, depth=4, size_cap=40, budget=5000)
        if res.equal:
            assert R._monoid_value(sys, a) == R._monoid_value(sys, b)

import itertools

from hypothesis import given, settings, strategies as st

from graphmonoid.fgab import FGAbelianGroup
from graphmonoid.intfeas import FEASIBLE, INFEASIBLE, nat_span_member


def combine(group, vectors, n):
    out = [sum(k * v[r] for k, v in zip(n, vectors)) for r in range(group.dim)]
    return group.element(out)


def test_simple_cases():
    Z = FGAbelianGroup(1)
    r = nat_span_member(Z, [[2], [3]], [7])
    assert r.status == FEASIBLE and combine(Z, [[2], [3]], r.solution).coords == (7,)
    assert nat_span_member(Z, [[2], [3]], [1]).status == INFEASIBLE
    assert nat_span_member(Z, [[2]], [3]).status == INFEASIBLE
    assert nat_span_member(Z, [], [0]).status == FEASIBLE


def test_torsion_wraps_around():
    Z3 = FGAbelianGroup(0, (3,))
    r = nat_span_member(Z3, [[1]], [2], lower=[1])
    assert r.ok and combine(Z3, [[1]], r.solution).coords == (2,)
    assert nat_span_member(Z3, [[0]], [1]).status == INFEASIBLE


def test_lower_bounds_respected():
    Z = FGAbelianGroup(1)
    assert nat_span_member(Z, [[1]], [0], lower=[1]).status == INFEASIBLE
    r = nat_span_member(Z, [[1], [-1]], [0], lower=[1, 1])
    assert r.ok and all(k >= 1 for k in r.solution)


def brute(group, vectors, target, lower, box):
    t = group.element(target)
    for n in itertools.product(*[range(lo, lo + box) for lo in lower]):
        if combine(group, vectors, n) == t:
            return True
    return False


groups = st.sampled_from([FGAbelianGroup(1), FGAbelianGroup(0, (4,)), FGAbelianGroup(1, (2,)),
                          FGAbelianGroup(0, (2, 2))])


@settings(max_examples=80, deadline=None)
@given(groups, st.data())
def test_agrees_with_brute_force(G, data):
    k = data.draw(st.integers(1, 3))
    vecs = [data.draw(st.lists(st.integers(-3, 3), min_size=G.dim, max_size=G.dim)) for _ in range(k)]
    target = data.draw(st.lists(st.integers(-4, 4), min_size=G.dim, max_size=G.dim))
    lower = data.draw(st.lists(st.integers(0, 1), min_size=k, max_size=k))
    r = nat_span_member(G, vecs, target, lower=lower)
    if r.ok:
        assert all(n >= lo for n, lo in zip(r.solution, lower))
        assert combine(G, vecs, r.solution) == G.element(target)
    elif r.status == INFEASIBLE:
        assert not brute(G, vecs, target, lower, 12)
    if brute(G, vecs, target, lower, 6):
        assert r.ok

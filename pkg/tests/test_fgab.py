import itertools
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from graphmonoid.fgab import (
    FGAbelianGroup,
    GroupHom,
    IntMatrix,
    cokernel,
    cyclic_generators,
    element_decompose,
    image,
    integer_kernel,
    is_surjective,
    kernel,
    quotient,
    recompose,
    snf,
    solve_integer,
    subgroup,
    subgroup_is_cyclic,
)

Z = FGAbelianGroup(1)
Z2 = FGAbelianGroup(2)


def determinantal_divisors(rows):
    """Invariant factors from gcds of k x k minors; independent of any reduction."""
    m, n = len(rows), len(rows[0]) if rows else 0
    out, prev = [], 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for rs in itertools.combinations(range(m), k):
            for cs in itertools.combinations(range(n), k):
                g = gcd(g, IntMatrix.from_rows([[rows[r][c] for c in cs] for r in rs]).det())
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def diag_of(A):
    return snf(A).diagonal


matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=m, max_size=m)))


def test_snf_identity():
    r = snf(IntMatrix.identity(2))
    assert r.D == IntMatrix.identity(2)
    assert r.U == IntMatrix.identity(2) and r.V == IntMatrix.identity(2)


def test_snf_two_by_two_example():
    A = IntMatrix.from_rows([[2, 4], [6, 8]])
    assert determinantal_divisors(A.to_lists()) == [2, 4]
    assert diag_of(A) == [2, 4]


def test_snf_zero():
    r = snf(IntMatrix.from_rows([[0]]))
    assert r.D.to_lists() == [[0]]
    assert r.U.to_lists() == [[1]] and r.V.to_lists() == [[1]]


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_invariants(rows):
    A = IntMatrix.from_rows(rows)
    r = snf(A)
    assert r.U @ A @ r.V == r.D
    assert abs(r.U.det()) == 1 and abs(r.V.det()) == 1
    for i in range(r.D.rows):
        for j in range(r.D.cols):
            if i != j:
                assert r.D[i, j] == 0
    d = [x for x in r.diagonal if x]
    assert all(x > 0 for x in d)
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
    assert d == determinantal_divisors(rows)


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_integer_kernel_is_kernel(rows):
    A = IntMatrix.from_rows(rows)
    basis = integer_kernel(A)
    for v in basis:
        assert not any(A.apply(v))
    # every small kernel vector is an integer combination of the basis
    B = IntMatrix.from_columns(basis, A.cols) if basis else IntMatrix.zeros(A.cols, 0)
    for v in itertools.product(range(-2, 3), repeat=A.cols):
        if not any(A.apply(v)):
            assert solve_integer(B, v) is not None


def test_kernel_examples():
    k = kernel(GroupHom(Z2, Z, IntMatrix.from_rows([[1, 1]])))
    grp, gens = k.structure()
    assert grp == FGAbelianGroup(1)
    assert gens[0].coords in {(1, -1), (-1, 1)}

    grp, gens = kernel(GroupHom.zero(Z2, FGAbelianGroup(0))).structure()
    assert grp == FGAbelianGroup(2)
    assert subgroup_is_cyclic(gens, Z2) == (False, None)

    grp, gens = kernel(GroupHom(Z, FGAbelianGroup(0, (2,)), IntMatrix.from_rows([[1]]))).structure()
    assert grp == FGAbelianGroup(1)
    members = {n for n in range(-6, 7) if n % 2 == 0}
    assert {n for n in range(-6, 7) if k_contains(gens, n)} == members


def k_contains(gens, n):
    return subgroup(Z, gens).contains(Z.element([n]))


def test_cokernel_examples():
    assert cokernel(GroupHom(Z, Z, IntMatrix.from_rows([[3]])))[0] == FGAbelianGroup(0, (3,))
    assert cokernel(GroupHom.zero(FGAbelianGroup(0), Z))[0] == FGAbelianGroup(1)
    D = GroupHom(Z2, Z2, IntMatrix.from_rows([[2, 0], [0, 4]]))
    assert cokernel(D)[0] == FGAbelianGroup(0, (2, 4))


def test_is_surjective_examples():
    Z_2 = FGAbelianGroup(0, (2,))
    assert is_surjective(GroupHom.identity(Z_2))
    assert not is_surjective(GroupHom(Z, Z, IntMatrix.from_rows([[2]])))
    G = FGAbelianGroup(0, (2, 3))
    f = GroupHom.from_columns(Z2, G, [(1, 1), (0, 1)])
    hit = {f((a, b)).coords for a in range(6) for b in range(6)}
    assert len(hit) == 6
    assert is_surjective(f)


def test_subgroup_is_cyclic_examples():
    assert subgroup_is_cyclic([Z2.element((1, -1))], Z2) == (True, 0)
    assert subgroup_is_cyclic([Z2.element((1, 0)), Z2.element((0, 1))], Z2) == (False, None)
    Z4 = FGAbelianGroup(0, (4,))
    assert {(x * k).coords for x in [Z4.element((2,))] for k in range(4)} == {(0,), (2,)}
    assert subgroup_is_cyclic([Z4.element((2,))], Z4) == (True, 2)


def test_cyclic_generators_examples():
    gens = cyclic_generators([Z2.element((1, -1))], Z2)
    assert {g.coords for g in gens} == {(1, -1), (-1, 1)}
    Z4 = FGAbelianGroup(0, (4,))
    assert [g.coords for g in cyclic_generators([Z4.element((1,))], Z4)] == [(1,), (3,)]
    assert [g.coords for g in cyclic_generators([], Z4)] == [(0,)]


def test_element_decompose_examples():
    assert element_decompose(Z.element((-3,))) == (0, 3)
    assert element_decompose(FGAbelianGroup(1, (2,)).element((1, 1))) == (1, 1, 0)
    a = element_decompose(Z2.element((-1, 2)))
    assert a == (0, 3, 1)
    assert (0 * 1 + 3 * 0 - 1, 0 * 0 + 3 * 1 - 1) == (-1, 2)


finite_groups = st.lists(st.integers(1, 6), max_size=3).map(lambda t: FGAbelianGroup(0, tuple(t)))
groups = st.tuples(st.integers(0, 2), st.lists(st.integers(1, 6), max_size=2)).map(
    lambda p: FGAbelianGroup(p[0], tuple(p[1])))


@settings(max_examples=100, deadline=None)
@given(groups, st.data())
def test_element_decompose_roundtrip(G, data):
    x = G.element(data.draw(st.lists(st.integers(-9, 9), min_size=G.dim, max_size=G.dim)))
    a = element_decompose(x)
    assert all(c >= 0 for c in a)
    assert recompose(G, a) == x


@settings(max_examples=60, deadline=None)
@given(finite_groups, finite_groups, st.data())
def test_kernel_cokernel_brute_force(G, H, data):
    if (G.order() or 1) * (H.order() or 1) > 200 * 200:
        return
    cols = []
    for n in G.torsion:
        ok = [h for h in H.elements() if (h * n).is_zero()]
        cols.append(data.draw(st.sampled_from(ok)).coords)
    f = GroupHom.from_columns(G, H, cols)
    assert f.is_well_defined()
    ker = {x.coords for x in G.elements() if f(x).is_zero()}
    K = kernel(f)
    assert {x.coords for x in G.elements() if K.contains(x)} == ker
    grp, _ = K.structure()
    assert grp.order() == len(ker)
    img = {f(x).coords for x in G.elements()}
    cok, proj = cokernel(f)
    assert cok.order() * len(img) == H.order()
    assert is_surjective(f) == (len(img) == H.order())
    assert {x.coords for x in H.elements() if proj(x).is_zero()} == img
    assert subgroup(H, [f.image_column(j) for j in range(G.dim)]).generators == image(f).generators


@settings(max_examples=60, deadline=None)
@given(groups, st.data())
def test_cyclic_generators_generate_the_same_subgroup(G, data):
    x = G.element(data.draw(st.lists(st.integers(-4, 4), min_size=G.dim, max_size=G.dim)))
    cyc, d = subgroup_is_cyclic([x], G)
    assert cyc
    S = subgroup(G, [x])
    for g in cyclic_generators([x], G):
        T = subgroup(G, [g])
        assert T.contains(x) and S.contains(g)


def test_quotient_presentation_roundtrip():
    rel = IntMatrix.from_rows([[2, 0], [0, 3]])
    P = quotient(2, rel)
    assert P.group == FGAbelianGroup(0, (6,))
    for v in itertools.product(range(4), repeat=2):
        assert P.project(P.lift(P.project(v))) == P.project(v)


def test_group_validation():
    with pytest.raises(ValueError):
        FGAbelianGroup(-1)
    with pytest.raises(ValueError):
        FGAbelianGroup(0, (0,))
    assert FGAbelianGroup(0, (2, 4)).is_canonical()
    assert not FGAbelianGroup(0, (1, 2)).is_canonical()
    assert FGAbelianGroup(0, (1, 1)).is_trivial()

"""I-systems of abelian groups and the refinement monoid they define.

An I-system is a finite poset of primes, each marked free or regular,
with a finitely generated abelian group ``G_i`` per prime and connecting
semigroup maps ``phi_ji: M_i -> G_j`` for ``i < j``. Here ``M_i = G_i`` for
regular primes and ``M_i = N x G_i`` (``N`` starting at 1) for free ones.

Each connecting map is stored through its group extension
``phi^_ji: Z x G_i -> G_j``, ``(n, g) -> n*c + h(g)``. Maps are given on
covering pairs; longer ones are composed.

Elements of the monoid are pairs (lower set ``a``, class in ``G~_a``) where
``G~_a = H^_a / U_a``. Since ``M_a`` embeds in ``G~_a``, comparing canonical
coordinates decides the word problem exactly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterable, Mapping, Sequence

from . import intfeas
from .fgab import (
    FGAbelianGroup,
    GroupElement,
    GroupHom,
    IntMatrix,
    Presentation,
    cokernel,
    is_surjective,
    quotient,
    solve_integer,
)

FREE = "free"
REGULAR = "regular"


class ISystemError(ValueError):
    """Structurally malformed input (bad shapes, unknown primes, cycles)."""


# ---------------------------------------------------------------------------
# posets


@dataclass(frozen=True)
class Poset:
    elements: tuple[str, ...]
    less: frozenset[tuple[str, str]]

    @classmethod
    def build(cls, elements: Iterable[str], pairs: Iterable[Sequence[str]]) -> "Poset":
        elements = list(elements)
        els = tuple(sorted(set(elements)))
        if len(els) != len(elements):
            raise ISystemError("duplicate prime names")
        known = set(els)
        rel: set[tuple[str, str]] = set()
        for lo, hi in pairs:
            if lo not in known or hi not in known:
                raise ISystemError(f"order mentions unknown prime {lo!r} or {hi!r}")
            if lo == hi:
                raise ISystemError(f"order pair {lo!r} < {hi!r} is reflexive")
            rel.add((lo, hi))
        changed = True
        while changed:
            changed = False
            for a, b in list(rel):
                for c, d in list(rel):
                    if b == c and (a, d) not in rel:
                        rel.add((a, d))
                        changed = True
        for a, b in rel:
            if a == b or (b, a) in rel:
                raise ISystemError(f"order has a cycle through {a!r}")
        return cls(els, frozenset(rel))

    def lt(self, a: str, b: str) -> bool:
        return (a, b) in self.less

    def below(self, p: str) -> list[str]:
        return [q for q in self.elements if (q, p) in self.less]

    def above(self, p: str) -> list[str]:
        return [q for q in self.elements if (p, q) in self.less]

    def lower_cover(self, p: str) -> list[str]:
        bel = self.below(p)
        return [q for q in bel if not any(self.lt(q, r) for r in bel)]

    def is_cover(self, a: str, b: str) -> bool:
        return self.lt(a, b) and a in self.lower_cover(b)

    def down_closure(self, xs: Iterable[str]) -> frozenset[str]:
        out = set(xs)
        for x in list(out):
            out.update(self.below(x))
        return frozenset(out)

    def is_lower_set(self, xs: Iterable[str]) -> bool:
        s = set(xs)
        return all(q in s for x in s for q in self.below(x))

    def maximal(self, xs: Iterable[str]) -> list[str]:
        s = set(xs)
        return sorted(x for x in s if not any(self.lt(x, y) for y in s))

    def linear_extension(self) -> list[str]:
        """Deterministic topological order (minimal first, ties by name)."""
        done: list[str] = []
        left = set(self.elements)
        while left:
            nxt = min(x for x in left if all(q in done for q in self.below(x)))
            done.append(nxt)
            left.remove(nxt)
        return done

    def lower_sets(self) -> list[frozenset[str]]:
        """All lower sets, ordered by size then by sorted names."""
        out = {frozenset()}
        for x in self.linear_extension():
            out |= {s | {x} for s in out if all(q in s for q in self.below(x))}
        return sorted(out, key=lambda s: (len(s), sorted(s)))


# ---------------------------------------------------------------------------
# the system


@dataclass(frozen=True)
class ConnectingMap:
    """``phi_ji`` given by the group part ``h`` and, for free ``i``, ``c``."""

    h: GroupHom
    c: GroupElement | None = None

    def extended(self) -> GroupHom:
        """Matrix of ``phi^_ji`` on ``Z x G_i`` (or ``G_i`` if regular)."""
        if self.c is None:
            return self.h
        dom = FGAbelianGroup(self.h.domain.rank + 1, self.h.domain.torsion)
        # Z coordinate goes first; the group's own free coordinates follow.
        cols = [self.c.coords] + [self.h.matrix.column(j) for j in range(self.h.domain.dim)]
        return GroupHom.from_columns(dom, self.h.codomain, cols)


@dataclass
class ValidationReport:
    ok: bool
    issues: list[dict[str, Any]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {"schema": 1, "valid": self.ok, "issues": self.issues}


class ISystem:
    """Finite I-system. Build with :meth:`build` or :func:`from_json`."""

    def __init__(self, poset: Poset, kind: Mapping[str, str], group: Mapping[str, FGAbelianGroup],
                 given: Mapping[tuple[str, str], ConnectingMap]):
        self.poset = poset
        self.kind = dict(kind)
        self.group = dict(group)
        self.given = dict(given)
        self._ext: dict[tuple[str, str], GroupHom] = {}
        self._derive()
        self._cache: dict[Any, Any] = {}
        self._lock = threading.Lock()

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, primes: Sequence[tuple[str, str, FGAbelianGroup]], order: Iterable[Sequence[str]],
              maps: Mapping[tuple[str, str], ConnectingMap]) -> "ISystem":
        names = [p[0] for p in primes]
        if len(set(names)) != len(names):
            raise ISystemError("duplicate prime names")
        for name, kind, _ in primes:
            if kind not in (FREE, REGULAR):
                raise ISystemError(f"prime {name!r}: kind must be free or regular")
        poset = Poset.build(names, order)
        kind = {n: k for n, k, _ in primes}
        group = {n: g for n, _, g in primes}
        return cls(poset, kind, group, maps)

    def _derive(self) -> None:
        P = self.poset
        for (i, j), cm in self.given.items():
            if not P.lt(i, j):
                raise ISystemError(f"map {i}->{j} given but {i} < {j} does not hold")
            if cm.h.domain != self.group[i] or cm.h.codomain != self.group[j]:
                raise ISystemError(f"map {i}->{j}: matrix shape does not match the groups")
            if (cm.c is None) != (self.kind[i] == REGULAR):
                raise ISystemError(f"map {i}->{j}: c must be present exactly when {i} is free")
            if cm.c is not None and cm.c.group != self.group[j]:
                raise ISystemError(f"map {i}->{j}: c lives in the wrong group")
        for j in P.elements:
            for i in P.lower_cover(j):
                if (i, j) not in self.given:
                    raise ISystemError(f"missing map for covering pair {i} < {j}")
                self._ext[(i, j)] = self.given[(i, j)].extended()
        # compose along a canonical route: through the smallest-named cover element
        pending = sorted((a, b) for (a, b) in P.less if not P.is_cover(a, b))
        while pending:
            rest = []
            for i, k in pending:
                mids = [j for j in P.lower_cover(k) if P.lt(i, j) and (i, j) in self._ext]
                if not mids:
                    rest.append((i, k))
                    continue
                j = min(mids)
                self._ext[(i, k)] = self._compose(k, j, i)
            if len(rest) == len(pending):
                raise ISystemError("could not derive composite maps")
            pending = rest

    def _compose(self, k: str, j: str, i: str, use: Mapping[tuple[str, str], GroupHom] | None = None) -> GroupHom:
        """``phi^_kj o phi^_ji`` as a map ``G^_i -> G_k``."""
        use = self._ext if use is None else use
        outer = use[(j, k)]
        inner = use[(i, j)]
        if self.kind[j] == FREE:
            # G_j sits inside Z x G_j with Z-coordinate 0
            rows = [[0] * inner.domain.dim] + [list(r) for r in inner.matrix.entries]
            inner_mat = IntMatrix.from_rows(rows, inner.domain.dim)
        else:
            inner_mat = inner.matrix
        return GroupHom(inner.domain, outer.codomain, outer.matrix @ inner_mat)

    # -- accessors ------------------------------------------------------------

    @property
    def primes(self) -> tuple[str, ...]:
        return self.poset.elements

    def is_free(self, p: str) -> bool:
        return self.kind[p] == FREE

    def hat_group(self, p: str) -> FGAbelianGroup:
        g = self.group[p]
        return FGAbelianGroup(g.rank + 1, g.torsion) if self.is_free(p) else g

    def ext(self, i: str, j: str) -> GroupHom:
        """``phi^_ji : G^_i -> G_j``."""
        return self._ext[(i, j)]

    def phi(self, i: str, j: str, x: Sequence[int]) -> GroupElement:
        """``phi_ji`` applied to coordinates of ``G^_i`` (``(n, g)`` for free ``i``)."""
        return self._ext[(i, j)](tuple(x))

    def canonical_group_generators(self, q: str) -> list[GroupElement]:
        """``x_1 .. x_{N+1}`` of a regular prime's group."""
        g = self.group[q]
        gens = g.generators()
        last = g.element([-1] * g.rank + [0] * len(g.torsion))
        return gens + [last]

    def cached(self, key: Any, fn):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        val = fn()
        with self._lock:
            return self._cache.setdefault(key, val)

    def __repr__(self) -> str:
        return f"ISystem({', '.join(f'{p}:{self.kind[p]}:{self.group[p]}' for p in self.primes)})"


# ---------------------------------------------------------------------------
# (c2): semigroup coverage


@dataclass(frozen=True)
class Source:
    """Contribution of one prime below: its image subgroup and, if free, ``c``."""

    name: str
    subgroup_gens: tuple[tuple[int, ...], ...]
    c: tuple[int, ...] | None = None


@dataclass(frozen=True)
class CoverResult:
    status: str  # "true" | "false" | "inconclusive"
    detail: str = ""

    @property
    def covers(self) -> bool:
        return self.status == "true"


def semigroup_covers_group(G: FGAbelianGroup, sources: Sequence[Source], bound: int | None = None) -> CoverResult:
    """Does ``sum over sources of (n_k c_k + h_k(G_k))`` (``n_k >= 1``) exhaust ``G``?

    The image is a subsemigroup ``S`` containing 0. ``S = G`` exactly when
    the subgroup generated by everything is ``G`` and each ``-c_k`` lies in
    ``S``. Each membership test runs over the support patterns of free
    sources and is an integer feasibility problem in ``G / H_F``.
    """
    dim = G.dim
    every = [list(c) for s in sources for c in s.subgroup_gens] + [list(s.c) for s in sources if s.c is not None]
    allcols = IntMatrix.from_columns(every, dim) if every else IntMatrix.zeros(dim, 0)
    if not is_surjective(GroupHom(FGAbelianGroup(len(every)), G, allcols)):
        return CoverResult("false", "the sources do not even generate the group")
    free = [s for s in sources if s.c is not None]
    regular_gens = [c for s in sources if s.c is None for c in s.subgroup_gens]
    unsure = []
    for s in free:
        target = G.element([-x for x in s.c]).coords
        found = False
        for size in range(len(free) + 1):
            for F in combinations(free, size):
                hgens = regular_gens + [c for t in F for c in t.subgroup_gens]
                rel = G.relation_matrix()
                extra = IntMatrix.from_columns(hgens, dim) if hgens else IntMatrix.zeros(dim, 0)
                pres = quotient(dim, rel.hstack(extra))
                vecs = [pres.project(t.c).coords for t in F]
                res = intfeas.nat_span_member(pres.group, vecs, pres.project(target).coords,
                                              lower=[1] * len(F), bound=bound)
                if res.ok:
                    found = True
                    break
                if res.status == intfeas.INCONCLUSIVE:
                    unsure.append(s.name)
            if found:
                break
        if not found:
            if s.name in unsure:
                return CoverResult("inconclusive", f"could not settle -c for source {s.name}")
            return CoverResult("false", f"-c of source {s.name} is not reachable")
    return CoverResult("true")


def covering_sources(sys: ISystem, p: str) -> list[Source]:
    out = []
    for k in sys.poset.below(p):
        e = sys.ext(k, p)
        if sys.is_free(k):
            out.append(Source(k, tuple(e.matrix.column(j) for j in range(1, e.domain.dim)), e.matrix.column(0)))
        else:
            out.append(Source(k, tuple(e.matrix.column(j) for j in range(e.domain.dim))))
    return out


def validate(sys: ISystem, bound: int | None = None) -> ValidationReport:
    issues: list[dict[str, Any]] = []
    P = sys.poset
    for (i, j), cm in sorted(sys.given.items()):
        if not cm.h.is_well_defined():
            issues.append({"condition": "well-defined", "pair": [i, j],
                           "message": f"h_{j}{i} does not respect torsion of G_{i}"})
    # (c1): every triple, plus explicit long-range maps
    for (i, k) in sorted(P.less):
        for j in P.elements:
            if P.lt(i, j) and P.lt(j, k):
                comp = sys._compose(k, j, i)
                if not comp.equals(sys.ext(i, k)):
                    issues.append({"condition": "c1", "triple": [i, j, k],
                                   "message": f"phi_{k}{j} o phi_{j}{i} != phi_{k}{i}"})
        if (i, k) in sys.given and not P.is_cover(i, k):
            if not sys.given[(i, k)].extended().equals(sys.ext(i, k)):
                issues.append({"condition": "c1", "pair": [i, k],
                               "message": f"given phi_{k}{i} differs from the composite"})
    for p in P.elements:
        if not sys.is_free(p):
            continue
        res = semigroup_covers_group(sys.group[p], covering_sources(sys, p), bound)
        if not res.covers:
            issues.append({"condition": "c2", "prime": p, "status": res.status, "message": res.detail
                           or "the primes below do not cover the group"})
    return ValidationReport(not issues, issues)


def restrict(sys: ISystem, J: Iterable[str]) -> ISystem:
    J = set(J)
    if not sys.poset.is_lower_set(J):
        raise ISystemError("restriction needs a lower set")
    primes = [(p, sys.kind[p], sys.group[p]) for p in sys.primes if p in J]
    order = [(a, b) for a, b in sys.poset.less if a in J and b in J]
    maps = {k: v for k, v in sys.given.items() if k[0] in J and k[1] in J}
    # covering pairs of the restriction are covering pairs of the original
    return ISystem.build(primes, order, maps)


# ---------------------------------------------------------------------------
# H^_a, U_a and G~_a


@dataclass(frozen=True)
class HatH:
    """Block layout of ``H^_a``: blocks in name order, free blocks start with Z."""

    lower_set: frozenset[str]
    blocks: tuple[tuple[str, int, int], ...]  # (prime, offset, size)
    relation_matrix: IntMatrix  # torsion relations of the blocks

    @property
    def dim(self) -> int:
        return sum(b[2] for b in self.blocks)

    def offset(self, p: str) -> int:
        for q, off, _ in self.blocks:
            if q == p:
                return off
        raise KeyError(p)

    def block(self, v: Sequence[int], p: str) -> tuple[int, ...]:
        for q, off, size in self.blocks:
            if q == p:
                return tuple(v[off: off + size])
        raise KeyError(p)

    def chi(self, p: str, u: Sequence[int]) -> list[int]:
        v = [0] * self.dim
        off = self.offset(p)
        for t, x in enumerate(u):
            v[off + t] = int(x)
        return v


def hat_h(sys: ISystem, a: Iterable[str]) -> HatH:
    a = frozenset(a)

    def make() -> HatH:
        blocks, off, rels = [], 0, []
        for p in sorted(a):
            g = sys.hat_group(p)
            blocks.append((p, off, g.dim))
            for t, n in enumerate(g.torsion):
                rels.append((off + g.rank + t, n))
            off += g.dim
        cols = []
        for pos, n in rels:
            c = [0] * off
            c[pos] = n
            cols.append(c)
        R = IntMatrix.from_columns(cols, off) if cols else IntMatrix.zeros(off, 0)
        return HatH(a, tuple(blocks), R)

    return sys.cached(("hat", a), make)


def u_generators(sys: ISystem, a: Iterable[str]) -> list[list[int]]:
    """``chi(a,i,u) - chi(a,j,phi^_ji(u))`` for ``i < j``, ``j`` maximal, ``u`` a generator."""
    H = hat_h(sys, a)
    out = []
    for j in sys.poset.maximal(H.lower_set):
        for i in sorted(H.lower_set):
            if not sys.poset.lt(i, j):
                continue
            e = sys.ext(i, j)
            for t in range(e.domain.dim):
                u = [0] * e.domain.dim
                u[t] = 1
                img = list(e.matrix.column(t))
                if sys.is_free(j):
                    img = [0] + img
                v = H.chi(i, u)
                w = H.chi(j, img)
                out.append([x - y for x, y in zip(v, w)])
    return out


@dataclass(frozen=True)
class GrothGroup:
    """``G~_a`` with the projection from ``H^_a`` coordinates."""

    lower_set: frozenset[str]
    hat: HatH
    presentation: Presentation
    free_max_images: tuple[tuple[str, GroupElement], ...]

    @property
    def group(self) -> FGAbelianGroup:
        return self.presentation.group

    def project(self, v: Sequence[int]) -> GroupElement:
        return self.presentation.project(v)

    def lift(self, x: GroupElement | Sequence[int]) -> tuple[int, ...]:
        return self.presentation.lift(x)


def groth_group(sys: ISystem, a: Iterable[str]) -> GrothGroup:
    a = frozenset(a)

    def make() -> GrothGroup:
        H = hat_h(sys, a)
        U = u_generators(sys, a)
        Umat = IntMatrix.from_columns(U, H.dim) if U else IntMatrix.zeros(H.dim, 0)
        pres = quotient(H.dim, H.relation_matrix.hstack(Umat))
        marks = []
        for p in sys.poset.maximal(a):
            if sys.is_free(p):
                v = [0] * H.dim
                v[H.offset(p)] = 1
                marks.append((p, pres.project(v)))
        return GrothGroup(a, H, pres, tuple(marks))

    return sys.cached(("groth", a), make)


# ---------------------------------------------------------------------------
# monoid elements


@dataclass(frozen=True, order=True)
class MonoidElement:
    """Lower set plus canonical coordinates in ``G~_a``."""

    support: tuple[str, ...]
    coords: tuple[int, ...]

    @property
    def lower_set(self) -> frozenset[str]:
        return frozenset(self.support)

    def is_zero(self) -> bool:
        return not self.support

    def to_json(self) -> dict[str, Any]:
        return {"lower_set": list(self.support), "coords": list(self.coords)}


def zero() -> MonoidElement:
    return MonoidElement((), ())


def check_generator(sys: ISystem, p: str, x: Sequence[int]) -> tuple[int, ...]:
    if p not in sys.group:
        raise ISystemError(f"unknown prime {p!r}")
    g = sys.hat_group(p)
    if len(x) != g.dim:
        raise ISystemError(f"generator of {p} needs {g.dim} coordinates, got {len(x)}")
    if sys.is_free(p) and int(x[0]) < 1:
        raise ISystemError(f"generator of free prime {p} needs N-coordinate >= 1")
    return tuple(int(t) for t in x)


def _element(sys: ISystem, a: frozenset[str], v: Sequence[int]) -> MonoidElement:
    if not a:
        return zero()
    G = groth_group(sys, a)
    return MonoidElement(tuple(sorted(a)), G.project(v).coords)


def normal_form(sys: ISystem, word: Iterable[tuple[str, Sequence[int]]]) -> MonoidElement:
    """Canonical form of a formal sum of generators ``chi_i(x)``."""
    word = [(p, check_generator(sys, p, x)) for p, x in word]
    a = sys.poset.down_closure(p for p, _ in word)
    if not a:
        return zero()
    H = hat_h(sys, a)
    v = [0] * H.dim
    for p, x in word:
        for t, c in enumerate(H.chi(p, x)):
            v[t] += c
    return _element(sys, a, v)


def chi(sys: ISystem, p: str, x: Sequence[int]) -> MonoidElement:
    return normal_form(sys, [(p, x)])


def representative(sys: ISystem, x: MonoidElement) -> tuple[int, ...]:
    """Some vector of ``H^_a`` in the class of ``x``."""
    if x.is_zero():
        return ()
    return groth_group(sys, x.lower_set).lift(x.coords)


def _push(sys: ISystem, x: MonoidElement, b: frozenset[str]) -> list[int]:
    Hb = hat_h(sys, b)
    out = [0] * Hb.dim
    if x.is_zero():
        return out
    Ha = hat_h(sys, x.lower_set)
    v = representative(sys, x)
    for p, off, size in Ha.blocks:
        ob = Hb.offset(p)
        for t in range(size):
            out[ob + t] += v[off + t]
    return out


def add(sys: ISystem, x: MonoidElement, y: MonoidElement) -> MonoidElement:
    b = x.lower_set | y.lower_set
    if not b:
        return zero()
    u, w = _push(sys, x, b), _push(sys, y, b)
    return _element(sys, b, [s + t for s, t in zip(u, w)])


def add_many(sys: ISystem, xs: Iterable[MonoidElement]) -> MonoidElement:
    acc = zero()
    for x in xs:
        acc = add(sys, acc, x)
    return acc


def scale(sys: ISystem, x: MonoidElement, k: int) -> MonoidElement:
    if k < 0:
        raise ValueError("monoid elements can only be scaled by k >= 0")
    return add_many(sys, [x] * k)


def equals(x: MonoidElement, y: MonoidElement) -> bool:
    return x == y


# ---------------------------------------------------------------------------
# strictly positive cone, phi_p, canonical generators


@dataclass(frozen=True)
class ConeResult:
    status: str  # "member" | "not_member" | "inconclusive"
    witness: tuple[tuple[str, tuple[int, ...]], ...] | None = None
    reason: str = ""

    @property
    def member(self) -> bool:
        return self.status == "member"

    def __iter__(self):
        yield self.member
        yield self.witness


def positive_cone_member(sys: ISystem, a: Iterable[str], x: GroupElement | Sequence[int],
                         bound: int | None = None) -> ConeResult:
    """Is ``x`` in the image of ``M_a`` inside ``G~_a``?

    Looks for ``sum over free max (n_i, g_i) + sum over regular max g_i`` with
    ``n_i >= 1``. The witness lists ``(prime, coords)`` per maximal prime.
    """
    a = frozenset(a)
    G = groth_group(sys, a)
    xc = tuple(x.coords if isinstance(x, GroupElement) else x)
    G.group.element(xc)
    if not a:
        return ConeResult("member", ())
    H = G.hat
    maxs = sys.poset.maximal(a)
    free_max = [p for p in maxs if sys.is_free(p)]
    unit_cols = []
    for p in maxs:
        off = H.offset(p)
        size = sys.hat_group(p).dim
        start = 1 if sys.is_free(p) else 0
        for t in range(start, size):
            c = [0] * H.dim
            c[off + t] = 1
            unit_cols.append(c)
    Umat = IntMatrix.from_columns(u_generators(sys, a), H.dim) if u_generators(sys, a) else IntMatrix.zeros(H.dim, 0)
    base = H.relation_matrix.hstack(Umat)
    extra = IntMatrix.from_columns(unit_cols, H.dim) if unit_cols else IntMatrix.zeros(H.dim, 0)
    Q = quotient(H.dim, base.hstack(extra))
    lifted = G.lift(xc)
    zcols = []
    for p in free_max:
        c = [0] * H.dim
        c[H.offset(p)] = 1
        zcols.append(c)
    res = intfeas.nat_span_member(Q.group, [Q.project(c).coords for c in zcols], Q.project(lifted).coords,
                                  lower=[1] * len(zcols), bound=bound if bound is not None else intfeas.default_bound(xc))
    if res.status == intfeas.INFEASIBLE:
        return ConeResult("not_member", reason=res.reason)
    if res.status == intfeas.INCONCLUSIVE:
        return ConeResult("inconclusive", reason=res.reason)
    n = res.solution
    resid = list(lifted)
    for k, c in zip(n, zcols):
        resid = [r - k * t for r, t in zip(resid, c)]
    A = extra.hstack(base)
    sol = solve_integer(A, resid)
    if sol is None:  # cannot happen when the quotient test passed
        return ConeResult("inconclusive", reason="group part could not be recovered")
    v = [0] * H.dim
    for k, c in zip(n, zcols):
        v = [s + k * t for s, t in zip(v, c)]
    for k, c in zip(sol[: len(unit_cols)], unit_cols):
        v = [s + k * t for s, t in zip(v, c)]
    wit = []
    for p in maxs:
        blk = list(H.block(v, p))
        g = sys.group[p]
        if sys.is_free(p):
            wit.append((p, (blk[0],) + g.reduce(blk[1:])))
        else:
            wit.append((p, g.reduce(blk)))
    assert G.project(v).coords == xc
    return ConeResult("member", tuple(wit))


def witness_vector(sys: ISystem, a: Iterable[str], witness: Sequence[tuple[str, Sequence[int]]]) -> tuple[int, ...]:
    H = hat_h(sys, frozenset(a))
    v = [0] * H.dim
    for p, u in witness:
        for t, c in enumerate(H.chi(p, u)):
            v[t] += c
    return tuple(v)


def j_p(sys: ISystem, p: str) -> frozenset[str]:
    """Lower set generated by the lower cover of ``p``."""
    return sys.poset.down_closure(sys.poset.lower_cover(p))


def phi_p(sys: ISystem, p: str) -> GroupHom:
    """``G(phi_p): G~_{J_p} -> G_p``; block ``i`` acts by ``phi^_pi``."""
    if not sys.is_free(p):
        raise ISystemError(f"{p} is not a free prime")
    a = j_p(sys, p)
    Gp = sys.group[p]
    if not a:
        return GroupHom.zero(FGAbelianGroup(0), Gp)
    G = groth_group(sys, a)
    H = G.hat

    def on_hat(v: Sequence[int]) -> tuple[int, ...]:
        acc = Gp.zero()
        for q, off, size in H.blocks:
            acc = acc + sys.ext(q, p)(tuple(v[off: off + size]))
        return acc.coords

    for col in list(H.relation_matrix.columns()) + u_generators(sys, a):
        if any(on_hat(col)):
            raise ISystemError(f"phi_{p} does not factor through U (system violates functoriality)")
    cols = [on_hat(G.presentation.section_matrix.column(k)) for k in range(G.group.dim)]
    return GroupHom.from_columns(G.group, Gp, cols)


@dataclass(frozen=True)
class SemigroupGenerator:
    """``phi_{p,q}(g)``: ``g`` is ``q`` itself (free ``q``) or ``x^q_index`` (regular ``q``)."""

    prime: str
    index: int | None
    value: GroupElement

    def describe(self) -> str:
        return self.prime if self.index is None else f"x{self.index}[{self.prime}]"


def canonical_semigroup_generators(sys: ISystem, p: str) -> list[SemigroupGenerator]:
    if not sys.is_free(p):
        raise ISystemError(f"{p} is not a free prime")
    out = []
    for q in sys.poset.below(p):
        e = sys.ext(q, p)
        if sys.is_free(q):
            u = [1] + [0] * sys.group[q].dim
            out.append(SemigroupGenerator(q, None, e(u)))
        else:
            for idx, x in enumerate(sys.canonical_group_generators(q), start=1):
                out.append(SemigroupGenerator(q, idx, e(x.coords)))
    return out


def semigroup_generates(G: FGAbelianGroup, gens: Sequence[GroupElement], bound: int | None = None) -> CoverResult:
    srcs = [Source(f"g{k}", (), g.coords) for k, g in enumerate(gens)]
    return semigroup_covers_group(G, srcs, bound)


def decompose_over(G: FGAbelianGroup, gens: Sequence[GroupElement], x: GroupElement,
                   bound: int | None = None) -> intfeas.Feasibility:
    """Non-negative integers ``a`` with ``x = sum a_k gens_k``."""
    return intfeas.nat_span_member(G, [g.coords for g in gens], x.coords, bound=bound)


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True)
class LowerSetLattice:
    elements: tuple[frozenset[str], ...]

    def leq(self, a: frozenset[str], b: frozenset[str]) -> bool:
        return a <= b

    def covers(self) -> list[tuple[frozenset[str], frozenset[str]]]:
        out = []
        for a in self.elements:
            for b in self.elements:
                if a < b and not any(a < c < b for c in self.elements):
                    out.append((a, b))
        return out

    def __len__(self) -> int:
        return len(self.elements)


def ideal_lattice(sys: ISystem) -> LowerSetLattice:
    return LowerSetLattice(tuple(sys.poset.lower_sets()))


# ---------------------------------------------------------------------------
# JSON


def _group_json(g: FGAbelianGroup) -> dict[str, Any]:
    return {"rank": g.rank, "torsion": list(g.torsion)}


def to_json(sys: ISystem) -> dict[str, Any]:
    P = sys.poset
    covers = sorted((a, b) for a, b in P.less if P.is_cover(a, b))
    maps = []
    for (i, j) in sorted(sys.given):
        cm = sys.given[(i, j)]
        entry: dict[str, Any] = {"from": i, "to": j, "h": cm.h.matrix.to_lists()}
        if cm.c is not None:
            entry["c"] = list(cm.c.coords)
        maps.append(entry)
    return {
        "schema": 1,
        "primes": [{"name": p, "kind": sys.kind[p], "group": _group_json(sys.group[p])} for p in P.elements],
        "order": [list(x) for x in covers],
        "maps": maps,
    }


def from_json(data: Mapping[str, Any]) -> ISystem:
    try:
        if data.get("schema", 1) != 1:
            raise ISystemError("unsupported schema version")
        primes = []
        for entry in data["primes"]:
            g = entry.get("group", {"rank": 0, "torsion": []})
            primes.append((str(entry["name"]), str(entry["kind"]),
                           FGAbelianGroup(int(g.get("rank", 0)), tuple(int(t) for t in g.get("torsion", [])))))
        groups = {n: g for n, _, g in primes}
        kinds = {n: k for n, k, _ in primes}
        order = [(str(a), str(b)) for a, b in data.get("order", [])]
        maps = {}
        for m in data.get("maps", []):
            i, j = str(m["from"]), str(m["to"])
            if i not in groups or j not in groups:
                raise ISystemError(f"map {i}->{j} mentions an unknown prime")
            gi, gj = groups[i], groups[j]
            rows = m.get("h", [])
            if gj.dim and len(rows) != gj.dim:
                raise ISystemError(f"map {i}->{j}: h needs {gj.dim} rows")
            H = IntMatrix.from_rows(rows, gi.dim) if gj.dim else IntMatrix.zeros(0, gi.dim)
            if H.cols != gi.dim:
                raise ISystemError(f"map {i}->{j}: h needs {gi.dim} columns")
            h = GroupHom(gi, gj, H)
            c = None
            if kinds[i] == FREE:
                if "c" not in m:
                    raise ISystemError(f"map {i}->{j}: c is required because {i} is free")
                c = gj.element(m["c"])
            elif "c" in m and m["c"] is not None:
                raise ISystemError(f"map {i}->{j}: c given for regular {i}")
            maps[(i, j)] = ConnectingMap(h, c)
        return ISystem.build(primes, order, maps)
    except (KeyError, TypeError) as exc:
        raise ISystemError(f"malformed I-system: {exc}") from exc


def parse_word(text: str) -> list[tuple[str, tuple[int, ...]]]:
    """Parse ``"a(2) + b(1,1)"`` into generator terms."""
    out = []
    for term in [t.strip() for t in text.split("+") if t.strip()]:
        if "(" in term:
            name, rest = term.split("(", 1)
            coords = tuple(int(c) for c in rest.rstrip(")").split(",") if c.strip())
        else:
            name, coords = term, ()
        out.append((name.strip(), coords))
    return out

"""Row-finite graphs and their graph monoids.

The monoid ``M(E)`` is the free commutative monoid on the vertices modulo
``v = r(v)`` for every vertex that emits edges, where ``r(v)`` is the multiset
of ranges of its out-edges. Two elements are equal exactly when they rewrite
to a common multiset, so equality is searched for by bounded rewriting.

Graphs with infinite ladder families are kept as templates and made finite
with :func:`instantiate`.
"""

from __future__ import annotations

import random
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

DEFAULT_JMAX = 8
DEFAULT_DEPTH = 12
DEFAULT_SIZE_CAP = 60
DEFAULT_STATE_BUDGET = 200_000


class GraphError(ValueError):
    pass


# ---------------------------------------------------------------------------
# multisets of vertices


@dataclass(frozen=True, order=True)
class FreeElement:
    """Finite multiset of vertex names, stored as sorted ``(vertex, mult)`` pairs."""

    items: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if any(m <= 0 for _, m in self.items):
            raise GraphError("multiplicities must be positive")

    @classmethod
    def of(cls, data: Mapping[str, int] | Iterable[str] | None = None) -> "FreeElement":
        if data is None:
            return cls()
        c = Counter(data) if not isinstance(data, Mapping) else Counter(dict(data))
        return cls(tuple(sorted((v, int(m)) for v, m in c.items() if m > 0)))

    @classmethod
    def parse(cls, text: str) -> "FreeElement":
        """``"v + 2w"``, ``"3*v_1^2"``; ``"0"`` or an empty string is zero."""
        text = text.strip()
        if text in ("", "0"):
            return cls()
        c: Counter[str] = Counter()
        for term in text.split("+"):
            m = re.fullmatch(r"\s*(\d*)\s*\*?\s*([A-Za-z][\w^]*)\s*", term)
            if not m:
                raise GraphError(f"cannot parse term {term!r}")
            c[m.group(2)] += int(m.group(1)) if m.group(1) else 1
        return cls.of(c)

    def counter(self) -> Counter[str]:
        return Counter(dict(self.items))

    def __getitem__(self, v: str) -> int:
        return dict(self.items).get(v, 0)

    def __add__(self, other: "FreeElement") -> "FreeElement":
        return FreeElement.of(self.counter() + other.counter())

    def __sub__(self, other: "FreeElement") -> "FreeElement":
        c = self.counter()
        c.subtract(other.counter())
        if any(m < 0 for m in c.values()):
            raise GraphError("multiset difference would be negative")
        return FreeElement.of(c)

    def __mul__(self, k: int) -> "FreeElement":
        return FreeElement.of({v: m * k for v, m in self.items})

    def leq(self, other: "FreeElement") -> bool:
        o = dict(other.items)
        return all(o.get(v, 0) >= m for v, m in self.items)

    def meet(self, other: "FreeElement") -> "FreeElement":
        o = dict(other.items)
        return FreeElement.of({v: min(m, o.get(v, 0)) for v, m in self.items})

    @property
    def size(self) -> int:
        return sum(m for _, m in self.items)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.items)

    def is_zero(self) -> bool:
        return not self.items

    def __str__(self) -> str:
        if not self.items:
            return "0"
        return " + ".join(v if m == 1 else f"{m}{v}" for v, m in self.items)


# ---------------------------------------------------------------------------
# finite graphs


@dataclass(frozen=True)
class FiniteGraph:
    """Vertices plus, per vertex, the multiset of ranges of its out-edges."""

    vertices: tuple[str, ...]
    out: tuple[FreeElement, ...]

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Mapping[str, Mapping[str, int] | FreeElement] | None = None
              ) -> "FiniteGraph":
        vs = sorted(set(vertices))
        edges = edges or {}
        known = set(vs)
        out = []
        for v in vs:
            e = edges.get(v, FreeElement())
            e = e if isinstance(e, FreeElement) else FreeElement.of(e)
            bad = e.support - known
            if bad:
                raise GraphError(f"edge from {v} to unknown vertex {sorted(bad)[0]}")
            out.append(e)
        for v in edges:
            if v not in known:
                raise GraphError(f"edges given for unknown vertex {v}")
        return cls(tuple(vs), tuple(out))

    def _index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def r(self, v: str) -> FreeElement:
        try:
            return self.out[self.vertices.index(v)]
        except ValueError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def edges(self) -> dict[str, FreeElement]:
        return dict(zip(self.vertices, self.out))

    def is_sink(self, v: str) -> bool:
        return self.r(v).is_zero()

    def successors(self, v: str) -> frozenset[str]:
        return self.r(v).support

    def edge_count(self) -> int:
        return sum(e.size for e in self.out)

    def reach(self, xs: Iterable[str]) -> frozenset[str]:
        """Vertices reachable from ``xs`` (including ``xs``)."""
        E = self.edges()
        seen = set(xs)
        stack = list(seen)
        while stack:
            v = stack.pop()
            for w in E[v].support:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(seen)

    def merge(self, groups: Mapping[str, str]) -> "FiniteGraph":
        """Identify each vertex ``v`` with ``groups.get(v, v)``; out-edges are pooled."""
        name = lambda v: groups.get(v, v)  # noqa: E731
        verts = {name(v) for v in self.vertices}
        pooled: dict[str, Counter[str]] = {v: Counter() for v in verts}
        for v, e in zip(self.vertices, self.out):
            for w, m in e.items:
                pooled[name(v)][name(w)] += m
        return FiniteGraph.build(verts, {v: FreeElement.of(c) for v, c in pooled.items()})

    def to_json(self) -> dict[str, Any]:
        return GraphTemplate(self, (), ()).to_json()


def relations_of(g: FiniteGraph) -> list[tuple[str, FreeElement]]:
    return [(v, e) for v, e in zip(g.vertices, g.out) if not e.is_zero()]


def rewrite_one(g: FiniteGraph, alpha: FreeElement, at: str) -> FreeElement:
    """Replace one occurrence of ``at`` by ``r(at)``."""
    if alpha[at] == 0:
        raise GraphError(f"vertex {at!r} does not occur in {alpha}")
    rv = g.r(at)
    if rv.is_zero():
        raise GraphError(f"vertex {at!r} is a sink")
    return alpha - FreeElement.of({at: 1}) + rv


# ---------------------------------------------------------------------------
# ladders and templates


@dataclass(frozen=True, order=True)
class LadderFamily:
    id: str
    anchor: str
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphError("ladder multiplicity must be >= 1")

    def rung(self, j: int) -> str:
        return f"{self.anchor}^{j}"


@dataclass(frozen=True)
class GraphTemplate:
    core: FiniteGraph
    ladders: tuple[LadderFamily, ...]
    core_to_ladder: tuple[tuple[str, str, int], ...]  # (from, ladder id, rung)

    def ladder(self, lid: str) -> LadderFamily:
        for L in self.ladders:
            if L.id == lid:
                return L
        raise GraphError(f"unknown ladder {lid!r}")

    def ladder_vertices(self, J_max: int) -> dict[str, str]:
        """Rung vertex -> anchor."""
        return {L.rung(j): L.anchor for L in self.ladders for j in range(1, J_max + 1)}

    def to_json(self) -> dict[str, Any]:
        edges = [{"from": v, "to": w, "mult": m} for v, e in zip(self.core.vertices, self.core.out) for w, m in e.items]
        return {
            "schema": 1,
            "core_vertices": list(self.core.vertices),
            "edges": edges,
            "ladders": [{"id": L.id, "anchor": L.anchor, "n": L.n} for L in sorted(self.ladders)],
            "core_to_ladder_edges": [{"from": f, "ladder": lid, "rung": k} for f, lid, k in sorted(self.core_to_ladder)],
        }


def template_from_json(data: Mapping[str, Any]) -> GraphTemplate:
    try:
        if data.get("schema", 1) != 1:
            raise GraphError("unsupported schema version")
        verts = [str(v) for v in data["core_vertices"]]
        edges: dict[str, Counter[str]] = {v: Counter() for v in verts}
        for e in data.get("edges", []):
            m = int(e.get("mult", 1))
            if m < 1:
                raise GraphError("edge multiplicity must be >= 1")
            if str(e["from"]) not in edges:
                raise GraphError(f"edge from unknown vertex {e['from']!r}")
            edges[str(e["from"])][str(e["to"])] += m
        core = FiniteGraph.build(verts, {v: FreeElement.of(c) for v, c in edges.items()})
        ladders = tuple(sorted(LadderFamily(str(L["id"]), str(L["anchor"]), int(L["n"])) for L in data.get("ladders", [])))
        for L in ladders:
            if L.anchor not in verts:
                raise GraphError(f"ladder {L.id} anchored at unknown vertex {L.anchor}")
        c2l = tuple(sorted((str(x["from"]), str(x["ladder"]), int(x.get("rung", 1)))
                           for x in data.get("core_to_ladder_edges", [])))
        t = GraphTemplate(core, ladders, c2l)
        for f, lid, _ in c2l:
            t.ladder(lid)
            if f not in verts:
                raise GraphError(f"core-to-ladder edge from unknown vertex {f}")
        return t
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph: {exc}") from exc


def template_of(g: FiniteGraph) -> GraphTemplate:
    return GraphTemplate(g, (), ())


def instantiate(t: GraphTemplate | FiniteGraph, J_max: int = DEFAULT_JMAX) -> FiniteGraph:
    """Finite graph with ladder rungs ``1..J_max``.

    Odd rungs whose relation needs a rung beyond ``J_max`` keep no
    out-edges, so every derivation in the result is one of the infinite graph.
    """
    if isinstance(t, FiniteGraph):
        return t
    if not t.ladders:
        return t.core
    if J_max < 4 or J_max % 2:
        raise GraphError("J_max must be an even number >= 4")
    edges: dict[str, Counter[str]] = {v: e.counter() for v, e in zip(t.core.vertices, t.core.out)}
    for L in t.ladders:
        R = L.rung
        for j in range(1, J_max + 1):
            edges[R(j)] = Counter()
        edges[R(1)].update({L.anchor: L.n, R(1): 1, R(3): 1})
        for j in range(2, J_max + 1, 2):
            edges[R(j)].update({R(j - 1): 1, R(j): 1})
        for j in range(3, J_max + 1, 2):
            if j + 2 <= J_max:
                edges[R(j)].update({R(j - 1): 1, R(j): 1, R(j + 2): 1})
    for f, lid, k in t.core_to_ladder:
        L = t.ladder(lid)
        if k > J_max:
            raise GraphError("core-to-ladder edge beyond the truncation")
        edges[f][L.rung(k)] += 1
    return FiniteGraph.build(edges, {v: FreeElement.of(c) for v, c in edges.items()})


def export_dot(g: GraphTemplate | FiniteGraph, J_max: int = DEFAULT_JMAX, expand: bool = False) -> str:
    """Deterministic DOT text; parallel edges are labeled with their count unless ``expand``."""
    g = instantiate(g, J_max)
    if not g.vertices:
        return "digraph { }\n"
    lines = ["digraph {"]
    lines += [f'  "{v}";' for v in g.vertices]
    for v, e in zip(g.vertices, g.out):
        for w, m in e.items:
            if expand:
                lines += [f'  "{v}" -> "{w}";'] * m
            elif m > 1:
                lines.append(f'  "{v}" -> "{w}" [label="{m}"];')
            else:
                lines.append(f'  "{v}" -> "{w}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bounded equality


@dataclass(frozen=True)
class EqualResult:
    """``Equal`` with a common descendant and both derivations, or ``Unknown``."""

    equal: bool
    witness: FreeElement | None = None
    left: tuple[str, ...] = ()
    right: tuple[str, ...] = ()
    stats: Mapping[str, Any] = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "Equal" if self.equal else "Unknown"

    def __bool__(self) -> bool:
        return self.equal


def replay(g: FiniteGraph, alpha: FreeElement, steps: Sequence[str]) -> FreeElement:
    for v in steps:
        alpha = rewrite_one(g, alpha, v)
    return alpha


def all_loops(g: FiniteGraph, verts: Iterable[str]) -> bool:
    E = g.edges()
    return all(E[v].is_zero() or E[v][v] >= 1 for v in verts)


def equal_bounded(g: FiniteGraph, alpha: FreeElement, beta: FreeElement, depth: int = DEFAULT_DEPTH,
                  size_cap: int = DEFAULT_SIZE_CAP, method: str = "auto",
                  state_budget: int = DEFAULT_STATE_BUDGET) -> EqualResult:
    """Search for ``gamma`` with ``alpha ->* gamma`` and ``beta ->* gamma``.

    At most ``depth`` rewrites per side and total multiplicity at most
    ``size_cap``. ``Unknown`` means no common descendant was found within
    these bounds (or the BFS state budget ran out, which the stats record).
    """
    for v in alpha.support | beta.support:
        g.r(v)
    if alpha == beta:
        return EqualResult(True, alpha, (), (), {"method": "trivial", "depth": depth, "size_cap": size_cap})
    if method == "auto":
        near = g.reach(alpha.support | beta.support)
        method = "ilp" if all_loops(g, near) else "bfs"
    if method == "ilp":
        return _equal_ilp(g, alpha, beta, depth, size_cap)
    return _equal_bfs(g, alpha, beta, depth, size_cap, state_budget)


def _equal_bfs(g: FiniteGraph, alpha: FreeElement, beta: FreeElement, depth: int, size_cap: int,
               budget: int) -> EqualResult:
    idx = g._index()
    n = len(g.vertices)
    deltas = []
    for v, e in zip(g.vertices, g.out):
        d = [0] * n
        for w, m in e.items:
            d[idx[w]] += m
        d[idx[v]] -= 1
        deltas.append(None if e.is_zero() else tuple(d))

    def vec(x: FreeElement) -> tuple[int, ...]:
        out = [0] * n
        for v, m in x.items:
            out[idx[v]] = m
        return tuple(out)

    def elem(s: tuple[int, ...]) -> FreeElement:
        return FreeElement.of({g.vertices[i]: m for i, m in enumerate(s) if m})

    starts = [vec(alpha), vec(beta)]
    if sum(starts[0]) > size_cap or sum(starts[1]) > size_cap:
        return EqualResult(False, None, (), (), {"method": "bfs", "explored": 0, "reason": "start exceeds size_cap",
                                                 "depth": depth, "size_cap": size_cap})
    parents: list[dict[tuple[int, ...], tuple[tuple[int, ...], int] | None]] = [{starts[0]: None}, {starts[1]: None}]
    frontiers = [[starts[0]], [starts[1]]]
    explored = 2
    exhausted = False

    def path(side: int, s: tuple[int, ...]) -> tuple[str, ...]:
        steps = []
        while parents[side][s] is not None:
            prev, i = parents[side][s]
            steps.append(g.vertices[i])
            s = prev
        return tuple(reversed(steps))

    def meet() -> tuple[int, ...] | None:
        common = parents[0].keys() & parents[1].keys()
        return min(common) if common else None

    for level in range(depth + 1):
        hit = meet()
        if hit is not None:
            return EqualResult(True, elem(hit), path(0, hit), path(1, hit),
                               {"method": "bfs", "explored": explored, "depth": depth, "size_cap": size_cap})
        if level == depth or exhausted:
            break
        for side in (0, 1):
            nxt = []
            for s in frontiers[side]:
                for i, m in enumerate(s):
                    if not m or deltas[i] is None:
                        continue
                    t = tuple(a + b for a, b in zip(s, deltas[i]))
                    if sum(t) > size_cap or t in parents[side]:
                        continue
                    parents[side][t] = (s, i)
                    nxt.append(t)
                    explored += 1
                    if explored > budget:
                        exhausted = True
                        break
                if exhausted:
                    break
            nxt.sort()
            frontiers[side] = nxt
    hit = meet()
    if hit is not None:
        return EqualResult(True, elem(hit), path(0, hit), path(1, hit),
                           {"method": "bfs", "explored": explored, "depth": depth, "size_cap": size_cap})
    return EqualResult(False, None, (), (), {"method": "bfs", "explored": explored, "budget_exhausted": exhausted,
                                             "depth": depth, "size_cap": size_cap})


def _equal_ilp(g: FiniteGraph, alpha: FreeElement, beta: FreeElement, depth: int, size_cap: int) -> EqualResult:
    """Exact bounded search for graphs whose rewritable vertices all carry a loop.

    Rewriting ``v`` then adds ``r(v) - v >= 0``, so the support only grows and
    a derivation is a count ``d_v`` per vertex plus an order in which each
    rewritten vertex has already appeared. Both are encoded in one MILP.
    """
    stats = {"method": "ilp", "depth": depth, "size_cap": size_cap}
    if alpha.size > size_cap or beta.size > size_cap:
        return EqualResult(False, None, (), (), {**stats, "reason": "start exceeds size_cap"})
    E = g.edges()
    sides = [alpha, beta]
    reach = [g.reach(s.support) for s in sides]
    verts = sorted(reach[0] | reach[1])
    vidx = {v: i for i, v in enumerate(verts)}
    nv = len(verts)
    cols: list[tuple] = []  # (kind, side, data)
    for s in (0, 1):
        U = sorted(v for v in reach[s] if not E[v].is_zero())
        for v in U:
            cols.append(("d", s, v))
        for v in U:
            cols.append(("y", s, v))
        for v in U:
            cols.append(("o", s, v))
        for v in U:
            if v in sides[s].support:
                continue
            for u in U:
                if u != v and E[u][v] > 0:
                    cols.append(("z", s, (u, v)))
    col = {c: k for k, c in enumerate(cols)}
    nc = len(cols)
    A_rows, lo, hi = [], [], []

    def row() -> list[float]:
        return [0.0] * nc

    # alpha + sum d Delta = beta + sum d' Delta
    eq = [row() for _ in range(nv)]
    rhs = [float(beta[v] - alpha[v]) for v in verts]
    for (kind, s, v), k in col.items():
        if kind != "d":
            continue
        sign = 1.0 if s == 0 else -1.0
        for w, m in E[v].items:
            eq[vidx[w]][k] += sign * m
        eq[vidx[v]][k] -= sign
    for r_, b in zip(eq, rhs):
        A_rows.append(r_)
        lo.append(b)
        hi.append(b)
    for s in (0, 1):
        dep, size = row(), row()
        for (kind, s2, v), k in col.items():
            if kind == "d" and s2 == s:
                dep[k] = 1.0
                size[k] = float(E[v].size - 1)
        A_rows += [dep, size]
        lo += [-np.inf, -np.inf]
        hi += [float(depth), float(size_cap - sides[s].size)]
    L = float(nv + 1)
    for (kind, s, v), k in list(col.items()):
        if kind == "d":
            yk = col[("y", s, v)]
            r1 = row(); r1[k] = 1.0; r1[yk] = -float(depth)  # noqa: E702
            r2 = row(); r2[yk] = 1.0; r2[k] = -1.0  # noqa: E702
            A_rows += [r1, r2]
            lo += [-np.inf, -np.inf]
            hi += [0.0, 0.0]
            if v not in sides[s].support:
                r3 = row()
                r3[yk] = 1.0
                for (kind2, s2, uv), k2 in col.items():
                    if kind2 == "z" and s2 == s and uv[1] == v:
                        r3[k2] = -1.0
                A_rows.append(r3)
                lo.append(-np.inf)
                hi.append(0.0)
        elif kind == "z":
            u, w = v
            r4 = row(); r4[k] = 1.0; r4[col[("y", s, u)]] = -1.0  # noqa: E702
            r5 = row()
            r5[col[("o", s, w)]] = 1.0
            r5[col[("o", s, u)]] = -1.0
            r5[k] = -L
            A_rows += [r4, r5]
            lo += [-np.inf, 1.0 - L]
            hi += [0.0, np.inf]
    c = np.array([1.0 if cc[0] == "d" else 0.0 for cc in cols])
    lb = np.zeros(nc)
    ub = np.array([float(depth) if cc[0] == "d" else (L if cc[0] == "o" else 1.0) for cc in cols])
    integ = np.array([0 if cc[0] == "o" else 1 for cc in cols])
    if nc == 0:
        return EqualResult(False, None, (), (), {**stats, "reason": "nothing can be rewritten"})
    res = milp(c, constraints=[LinearConstraint(np.array(A_rows), np.array(lo), np.array(hi))],
               integrality=integ, bounds=Bounds(lb, ub))
    if res.status != 0 or res.x is None:
        if res.status == 2:
            return EqualResult(False, None, (), (), {**stats, "reason": "no common descendant within bounds"})
        # solver trouble: fall back to plain search
        out = _equal_bfs(g, alpha, beta, depth, size_cap, DEFAULT_STATE_BUDGET)
        return EqualResult(out.equal, out.witness, out.left, out.right, {**out.stats, "ilp_status": int(res.status)})
    counts = [{}, {}]
    for (kind, s, v), k in col.items():
        if kind == "d":
            val = int(round(res.x[k]))
            if val:
                counts[s][v] = val
    steps = [_order(g, sides[s], counts[s]) for s in (0, 1)]
    if steps[0] is None or steps[1] is None:
        return EqualResult(False, None, (), (), {**stats, "reason": "solver order could not be replayed"})
    ga, gb = replay(g, alpha, steps[0]), replay(g, beta, steps[1])
    if ga != gb or ga.size > size_cap:
        return EqualResult(False, None, (), (), {**stats, "reason": "solver witness failed replay"})
    return EqualResult(True, ga, tuple(steps[0]), tuple(steps[1]), stats)


def _order(g: FiniteGraph, start: FreeElement, counts: Mapping[str, int]) -> list[str] | None:
    pending = dict(counts)
    cur = start
    steps: list[str] = []
    while pending:
        ready = sorted(v for v in pending if cur[v] > 0)
        if not ready:
            return None
        v = ready[0]
        cur = rewrite_one(g, cur, v)
        steps.append(v)
        pending[v] -= 1
        if not pending[v]:
            del pending[v]
    return steps


# ---------------------------------------------------------------------------
# hereditary and saturated sets


def is_hereditary(g: FiniteGraph, H: Iterable[str]) -> bool:
    H = set(H)
    return all(g.successors(v) <= H for v in H)


def is_saturated(g: FiniteGraph, H: Iterable[str]) -> bool:
    H = set(H)
    return not any(v not in H and not g.is_sink(v) and g.successors(v) <= H for v in g.vertices)


def hereditary_saturated_closure(g: FiniteGraph, X: Iterable[str]) -> frozenset[str]:
    H = set(g.reach(X))
    changed = True
    while changed:
        changed = False
        for v in g.vertices:
            if v not in H and not g.is_sink(v) and g.successors(v) <= H:
                H.add(v)
                changed = True
    return frozenset(H)


def strong_components(g: FiniteGraph) -> list[frozenset[str]]:
    """Strongly connected components, each listed once, in name order."""
    reach = {v: g.reach([v]) for v in g.vertices}
    comps, seen = [], set()
    for v in g.vertices:
        if v in seen:
            continue
        c = frozenset(w for w in reach[v] if v in reach[w])
        comps.append(c)
        seen |= c
    return comps


def enumerate_hereditary_saturated(g: FiniteGraph, guard: int = 20) -> list[frozenset[str]]:
    """All hereditary saturated subsets, smallest first."""
    if len(g.vertices) > guard:
        raise GraphError(f"graph has {len(g.vertices)} vertices; the guard is {guard}")
    comps = strong_components(g)
    succ = []
    for c in comps:
        targets = set().union(*(g.successors(v) for v in c)) - c
        succ.append({k for k, d in enumerate(comps) if d & targets})
    found: set[frozenset[int]] = set()

    def grow(chosen: frozenset[int], k: int) -> None:
        if k == len(comps):
            found.add(chosen)
            return
        grow(chosen, k + 1)
        grow(chosen | {k}, k + 1)

    # Hereditary sets are exactly successor-closed unions of components.
    def closed(ks: frozenset[int]) -> bool:
        return all(succ[k] <= ks for k in ks)

    if len(comps) <= 16:
        grow(frozenset(), 0)
        cands = [ks for ks in found if closed(ks)]
    else:  # fall back to closures of single components
        cands = {frozenset()}
        frontier = [frozenset()]
        while frontier:
            nxt = []
            for ks in frontier:
                for k in range(len(comps)):
                    if k in ks:
                        continue
                    grown = set(ks) | {k}
                    stack = [k]
                    while stack:
                        a = stack.pop()
                        for b in succ[a]:
                            if b not in grown:
                                grown.add(b)
                                stack.append(b)
                    fz = frozenset(grown)
                    if fz not in cands:
                        cands.add(fz)
                        nxt.append(fz)
            frontier = nxt
    out = set()
    for ks in cands:
        H = frozenset().union(*(comps[k] for k in ks)) if ks else frozenset()
        if is_saturated(g, H):
            out.add(H)
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def restriction(g: FiniteGraph, H: Iterable[str]) -> FiniteGraph:
    H = set(H)
    if not is_hereditary(g, H):
        raise GraphError("restriction needs a hereditary set")
    E = g.edges()
    return FiniteGraph.build(H, {v: E[v] for v in H})


def quotient_graph(g: FiniteGraph, H: Iterable[str]) -> FiniteGraph:
    H = set(H)
    if not (is_hereditary(g, H) and is_saturated(g, H)):
        raise GraphError("quotient needs a hereditary saturated set")
    keep = [v for v in g.vertices if v not in H]
    E = g.edges()
    return FiniteGraph.build(keep, {v: FreeElement.of({w: m for w, m in E[v].items if w not in H}) for v in keep})


# ---------------------------------------------------------------------------
# refinement


@dataclass
class RefinementRecord:
    a: FreeElement
    b: FreeElement
    c: FreeElement
    d: FreeElement
    outcome: str  # "refined" | "failure" | "inconclusive"
    matrix: tuple[FreeElement, FreeElement, FreeElement, FreeElement] | None = None
    note: str = ""


@dataclass
class RefinementReport:
    records: list[RefinementRecord]

    @property
    def failures(self) -> list[RefinementRecord]:
        return [r for r in self.records if r.outcome == "failure"]

    @property
    def inconclusive(self) -> list[RefinementRecord]:
        return [r for r in self.records if r.outcome == "inconclusive"]

    def to_json(self) -> dict[str, Any]:
        return {"schema": 1, "trials": len(self.records), "failures": len(self.failures),
                "inconclusive": len(self.inconclusive),
                "records": [{"a": str(r.a), "b": str(r.b), "c": str(r.c), "d": str(r.d), "outcome": r.outcome,
                             "matrix": [str(x) for x in r.matrix] if r.matrix else None, "note": r.note}
                            for r in self.records]}


def _split_derivation(g: FiniteGraph, a: FreeElement, b: FreeElement, steps: Sequence[str]
                      ) -> tuple[FreeElement, FreeElement, list[str], list[str]]:
    """Follow a derivation of ``a + b`` and track which summand each rewrite hits."""
    sa, sb = [], []
    for v in steps:
        if a[v] > 0:
            a = rewrite_one(g, a, v)
            sa.append(v)
        else:
            b = rewrite_one(g, b, v)
            sb.append(v)
    return a, b, sa, sb


def refine(g: FiniteGraph, a: FreeElement, b: FreeElement, c: FreeElement, d: FreeElement,
           depth: int = DEFAULT_DEPTH, size_cap: int = DEFAULT_SIZE_CAP) -> RefinementRecord:
    """Refinement matrix for ``a + b = c + d`` built from a common descendant.

    The four identities ``a = z11 + z12`` and so on are confirmed by replaying
    the part of the derivation that acts on each summand.
    """
    if a + b == c + d:
        res = EqualResult(True, a + b)
    else:
        res = equal_bounded(g, a + b, c + d, depth, size_cap)
    if not res.equal:
        return RefinementRecord(a, b, c, d, "inconclusive", note="identity not confirmed within bounds")
    a1, b1, sa, sb = _split_derivation(g, a, b, res.left)
    c1, d1, sc, sd = _split_derivation(g, c, d, res.right)
    z11 = a1.meet(c1)
    z12 = a1 - z11
    z21 = c1 - z11
    try:
        z22 = b1 - z21
    except GraphError:
        return RefinementRecord(a, b, c, d, "failure", note="multiset refinement broke")
    m = (z11, z12, z21, z22)
    checks = [(a, sa, z11 + z12), (b, sb, z21 + z22), (c, sc, z11 + z21), (d, sd, z12 + z22)]
    for x, steps, y in checks:
        if replay(g, x, steps) != y:
            return RefinementRecord(a, b, c, d, "failure", m, note=f"{x} does not rewrite to {y}")
    return RefinementRecord(a, b, c, d, "refined", m)


def refinement_probe(g: FiniteGraph, trials: int = 20, depth: int = 10, size_cap: int = DEFAULT_SIZE_CAP,
                     seed: int = 0) -> RefinementReport:
    """Sample identities ``a + b = c + d`` by random rewriting and refine each one."""
    rng = random.Random(seed)
    verts = list(g.vertices)
    records = []
    if not verts:
        return RefinementReport(records)
    for _ in range(trials):
        alpha = FreeElement.of(Counter(rng.choice(verts) for _ in range(rng.randint(1, 4))))
        beta = alpha
        for _ in range(rng.randint(0, 3)):
            movable = [v for v in beta.support if not g.is_sink(v)]
            if not movable or beta.size > size_cap // 2:
                break
            beta = rewrite_one(g, beta, rng.choice(sorted(movable)))
        a, b = _random_split(rng, alpha)
        c, d = _random_split(rng, beta)
        records.append(refine(g, a, b, c, d, depth, size_cap))
    return RefinementReport(records)


def _random_split(rng: random.Random, x: FreeElement) -> tuple[FreeElement, FreeElement]:
    left: Counter[str] = Counter()
    for v, m in x.items:
        left[v] = rng.randint(0, m)
    a = FreeElement.of(left)
    return a, x - a


def random_graph(rng: random.Random, max_vertices: int = 5, max_out: int = 3) -> FiniteGraph:
    n = rng.randint(1, max_vertices)
    names = [f"u{i}" for i in range(n)]
    edges = {v: FreeElement.of(Counter(rng.choice(names) for _ in range(rng.randint(0, max_out)))) for v in names}
    return FiniteGraph.build(names, edges)

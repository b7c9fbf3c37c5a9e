"""Deciding, building and checking graph realizations of I-system monoids.

A finitely generated conical refinement monoid is a graph monoid exactly
when, for every free prime ``p``, the induced map ``G~_{J_p} -> G_p`` is
onto with a cyclic kernel generated by a strictly positive element.
:func:`decide` checks this prime by prime. :func:`synth` builds the graph by
order induction over the primes. :func:`verify` checks the result in both
directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import graphmon as gm
from . import isystem as isy
from .fgab import (
    FGAbelianGroup,
    GroupElement,
    cyclic_generators,
    element_decompose,
    integer_kernel,
    IntMatrix,
    is_surjective,
    kernel,
    subgroup_is_cyclic,
)
from .graphmon import FreeElement, GraphTemplate, LadderFamily

LITERAL = "literal"
VACUOUS = "vacuous"
POLICIES = (LITERAL, VACUOUS)

REALIZABLE = "realizable"
NOT_REALIZABLE = "not_realizable"
INCONCLUSIVE = "inconclusive"


class InvalidSystem(ValueError):
    def __init__(self, report: isy.ValidationReport):
        super().__init__("; ".join(i["message"] for i in report.issues))
        self.report = report


class NotRealizable(ValueError):
    pass


class SynthesisInconclusive(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# decision


@dataclass
class PrimeCertificate:
    prime: str
    surjective: bool
    kernel_type: str  # "Z" | "Z_d" | "trivial" | "noncyclic"
    kernel_d: int | None
    kernel_structure: str
    cyclic: bool
    generators_tried: list[tuple[int, ...]] = field(default_factory=list)
    positive_generator: tuple[int, ...] | None = None
    witness: tuple[tuple[str, tuple[int, ...]], ...] | None = None
    verdict: str = "fail"
    note: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "prime": self.prime,
            "surjective": self.surjective,
            "kernel": {"type": self.kernel_type, "d": self.kernel_d, "structure": self.kernel_structure},
            "cyclic": self.cyclic,
            "generator_tried": [list(g) for g in self.generators_tried],
            "positive_generator": None if self.positive_generator is None else list(self.positive_generator),
            "witness": None if self.witness is None else [{"prime": q, "coords": list(c)} for q, c in self.witness],
            "verdict": self.verdict,
            "note": self.note,
        }


@dataclass
class Decision:
    overall: str
    certificates: list[PrimeCertificate]
    policy: str = LITERAL

    @property
    def realizable(self) -> bool:
        return self.overall == REALIZABLE

    def certificate(self, p: str) -> PrimeCertificate:
        for c in self.certificates:
            if c.prime == p:
                return c
        raise KeyError(p)

    def to_json(self) -> dict[str, Any]:
        return {"schema": 1, "overall": self.overall, "policy": self.policy,
                "primes": [c.to_json() for c in self.certificates]}


def _group_str(g: FGAbelianGroup) -> str:
    return str(g)


def certify_prime(sys: isy.ISystem, p: str, policy: str = LITERAL, bound: int | None = None) -> PrimeCertificate:
    J = isy.j_p(sys, p)
    try:
        phi = isy.phi_p(sys, p)
    except isy.ISystemError as exc:
        return PrimeCertificate(p, False, "noncyclic", None, "?", False, note=str(exc))
    surj = is_surjective(phi)
    K = kernel(phi)
    grp, gens = K.structure()
    cyclic, d = subgroup_is_cyclic(gens, phi.domain)
    ktype = "noncyclic" if not cyclic else ("Z" if d == 0 else ("trivial" if d == 1 else "Z_d"))
    cert = PrimeCertificate(p, surj, ktype, d if cyclic else None, _group_str(grp), cyclic)
    if not surj:
        cert.note = "induced map is not onto"
        return cert
    if not cyclic:
        cert.note = f"kernel {grp} is not cyclic"
        return cert
    if not J:
        cert.verdict = "pass"
        cert.note = "minimal free prime"
        return cert
    if ktype == "trivial" and policy == VACUOUS:
        cert.verdict = "pass"
        cert.note = "trivial kernel accepted without a positivity check"
        return cert
    unsure = False
    for g in cyclic_generators(gens, phi.domain):
        cert.generators_tried.append(g.coords)
        res = isy.positive_cone_member(sys, J, g, bound)
        if res.member:
            cert.positive_generator = g.coords
            cert.witness = res.witness
            cert.verdict = "pass"
            if ktype == "trivial":
                cert.note = "trivial kernel; 0 is strictly positive"
            return cert
        unsure = unsure or res.status == "inconclusive"
    cert.verdict = "inconclusive" if unsure else "fail"
    cert.note = "no kernel generator is strictly positive" + (" (search bound hit)" if unsure else "")
    return cert


def decide(sys: isy.ISystem, policy: str = LITERAL, check: bool = True, bound: int | None = None) -> Decision:
    """Per-free-prime almost-isomorphism test."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if check:
        rep = isy.validate(sys, bound)
        if not rep.ok:
            raise InvalidSystem(rep)
    certs = [certify_prime(sys, p, policy, bound) for p in sys.poset.linear_extension() if sys.is_free(p)]
    verdicts = {c.verdict for c in certs}
    overall = NOT_REALIZABLE if "fail" in verdicts else (INCONCLUSIVE if "inconclusive" in verdicts else REALIZABLE)
    return Decision(overall, certs, policy)


def antisymmetric_oracle(sys: isy.ISystem) -> Decision:
    """Independent test for systems with all groups trivial: at most one free prime per lower cover."""
    if not all(sys.group[p].is_trivial() for p in sys.primes):
        raise ValueError("the system has a nontrivial group")
    certs = []
    for p in sys.poset.linear_extension():
        if not sys.is_free(p):
            continue
        free_below = [q for q in sys.poset.lower_cover(p) if sys.is_free(q)]
        ok = len(free_below) <= 1
        certs.append(PrimeCertificate(p, True, "Z" if free_below else "trivial", 0 if free_below else 1,
                                      f"Z^{len(free_below)}", ok, verdict="pass" if ok else "fail",
                                      note=f"{len(free_below)} free primes in the lower cover"))
    overall = REALIZABLE if all(c.verdict == "pass" for c in certs) else NOT_REALIZABLE
    return Decision(overall, certs)


# ---------------------------------------------------------------------------
# realized components


@dataclass
class Component:
    """Vertices realizing one prime.

    For a regular prime ``gens[j-1]`` is the vertex of ``x_j`` in the padded
    presentation ``group``; ``hub`` realizes ``x_{N+1}`` and may be omitted
    when the padded group is a product of trivial factors.
    """

    prime: str
    kind: str
    group: FGAbelianGroup | None = None
    original_dim: int = 0
    gens: tuple[str, ...] = ()
    hub: str | None = None
    vertex: str | None = None  # free primes

    @property
    def N(self) -> int:
        return len(self.gens)

    def vertices(self) -> list[str]:
        if self.kind == isy.FREE:
            return [self.vertex]
        return list(self.gens) + ([self.hub] if self.hub else [])

    def neutral(self) -> FreeElement:
        if self.kind == isy.FREE:
            raise ValueError("free components have no neutral element")
        if self.N == 0:
            return FreeElement.of({self.hub: 1})
        mult = [1] * self.group.rank + list(self.group.torsion)
        c = {v: m for v, m in zip(self.gens, mult)}
        if self.hub:
            c[self.hub] = 1
        return FreeElement.of(c)

    def pad(self, coords: Sequence[int]) -> tuple[int, ...]:
        return tuple(coords) + (0,) * (self.group.dim - len(coords))

    def word(self, g: GroupElement | Sequence[int]) -> FreeElement:
        """Vertices adding up to ``g`` (given in the prime's own coordinates)."""
        coords = g.coords if isinstance(g, GroupElement) else tuple(g)
        if self.N == 0:
            return self.neutral()
        dec = element_decompose(self.group.element(self.pad(coords)))
        c = {self.gens[j]: a for j, a in enumerate(dec[:-1]) if a}
        if dec[-1]:
            c[self.hub] = c.get(self.hub, 0) + dec[-1]
        out = FreeElement.of(c)
        return out if not out.is_zero() else self.neutral()

    def generator_word(self, j: int) -> FreeElement:
        """Image of the canonical semigroup generator ``x_j`` (1-based, ``j = N+1`` is the last)."""
        if j <= self.original_dim:
            return FreeElement.of({self.gens[j - 1]: 1})
        return FreeElement.of({self.hub: 1}) if self.hub else self.neutral()


def _gen_key(prime: str, index: int | None) -> str:
    return prime if index is None else f"x{index}[{prime}]"


@dataclass
class GeneratorMap:
    """Generator words (monoid -> graph) and vertex values (graph -> monoid)."""

    forward: dict[str, FreeElement]
    inverse: dict[str, tuple[str, tuple[int, ...]]]  # vertex -> (prime, coords in G^_prime)
    ladder_values: dict[str, tuple[str, tuple[int, ...]]] = field(default_factory=dict)  # ladder id -> value

    def delta(self, v: str) -> tuple[str, tuple[int, ...]]:
        if v in self.inverse:
            return self.inverse[v]
        if "^" in v:
            base = v.split("^", 1)[0]
            if base in self.ladder_values:
                return self.ladder_values[base]
        raise KeyError(v)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": 1,
            "generators": [{"generator": k, "word": str(w)} for k, w in sorted(self.forward.items())],
            "vertices": [{"vertex": v, "prime": q, "coords": list(c)} for v, (q, c) in sorted(self.inverse.items())],
            "ladders": [{"ladder": v, "prime": q, "coords": list(c)} for v, (q, c) in sorted(self.ladder_values.items())],
        }


def genmap_from_json(data: Mapping[str, Any]) -> GeneratorMap:
    try:
        if data.get("schema", 1) != 1:
            raise ValueError("unsupported schema version")
        fwd = {str(e["generator"]): FreeElement.parse(str(e["word"])) for e in data["generators"]}
        inv = {str(e["vertex"]): (str(e["prime"]), tuple(int(x) for x in e["coords"])) for e in data["vertices"]}
        lad = {str(e["ladder"]): (str(e["prime"]), tuple(int(x) for x in e["coords"])) for e in data.get("ladders", [])}
        return GeneratorMap(fwd, inv, lad)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed generator map: {exc}") from exc


@dataclass
class Synthesis:
    template: GraphTemplate
    genmap: GeneratorMap
    components: dict[str, Component]


class _Builder:
    def __init__(self, sys: isy.ISystem):
        self.sys = sys
        self.vertices: list[str] = []
        self.edges: dict[str, FreeElement] = {}
        self.ladders: list[LadderFamily] = []
        self.c2l: list[tuple[str, str, int]] = []
        self.comps: dict[str, Component] = {}

    # -- helpers -------------------------------------------------------------

    def gamma(self, prime: str, index: int | None) -> FreeElement:
        comp = self.comps[prime]
        if index is None:
            return FreeElement.of({comp.vertex: 1})
        return comp.generator_word(index)

    def _regular_layer(self, p: str, group: FGAbelianGroup, original_dim: int,
                       extra: Mapping[int, FreeElement], coeff: Mapping[int, Mapping[int, int]] | None = None
                       ) -> Component:
        """Vertices and edges for a regular prime on a padded presentation.

        ``coeff[i][j]`` shifts the multiplicity of ``v_j`` in the relation of
        ``v_i`` (matrix encoding of connecting maps); ``extra[i]`` is appended.
        Indices are 1-based.
        """
        t, tors = group.rank, group.torsion
        N = group.dim
        names = [f"{p}_{j}" for j in range(1, N + 1)]
        omit_hub = t == 0 and N >= 1 and all(m == 1 for m in tors)
        hub = None if omit_hub else f"{p}_{N + 1}"
        comp = Component(p, isy.REGULAR, group, original_dim, tuple(names), hub)
        mult = [1] * t + list(tors)  # coefficient of v_j in the neutral element
        coeff = coeff or {}
        self.vertices += comp.vertices()
        if hub:
            c = {hub: 2}
            for j in range(N):
                c[names[j]] = c.get(names[j], 0) + mult[j]
            self.edges[hub] = FreeElement.of(c)
        for i in range(1, N + 1):
            col = coeff.get(i, {})
            c: dict[str, int] = {}

            def bump(v: str, k: int) -> None:
                c[v] = c.get(v, 0) + k

            for j in range(1, N + 1):
                a = col.get(j, 0)
                base = (2 if j == i else 1) if j <= t else (mult[j - 1] + (1 if j == i else 0))
                if j <= t and a < 0:
                    # a w_j is replaced by (-a) copies of the inverse of w_j
                    bump(names[j - 1], base)
                    for k in range(1, t + 1):
                        if k != j:
                            bump(names[k - 1], -a)
                    bump(hub, -a)
                else:
                    bump(names[j - 1], base + a)
            if hub:
                bump(hub, 1)
            if i > t:
                lid = names[i - 1]
                self.ladders.append(LadderFamily(lid, lid, tors[i - t - 1]))
                self.c2l.append((names[i - 1], lid, 1))
            for v, m in extra.get(i, FreeElement()).items:
                bump(v, m)
            self.edges[names[i - 1]] = FreeElement.of(c)
        if N == 0:
            hub = f"{p}_1"
            comp.hub = hub
            self.vertices.append(hub)
            self.edges[hub] = FreeElement.of({hub: 2})
        self.comps[p] = comp
        return comp

    def _link(self, comp: Component, lower: Sequence[str]) -> None:
        """Make sure the new component reaches every regular prime of its lower cover."""
        mine = comp.vertices()
        for q in lower:
            qc = self.comps[q]
            if qc.kind != isy.REGULAR:
                continue
            theirs = set(qc.vertices())
            if any(self.edges[v].support & theirs for v in mine):
                continue
            target = comp.hub or comp.gens[0]
            self.edges[target] = self.edges[target] + qc.neutral()

    # -- steps ---------------------------------------------------------------

    def minimal_regular(self, p: str) -> None:
        g = self.sys.group[p]
        self._regular_layer(p, g, g.dim, {})

    def minimal_free(self, p: str) -> None:
        self.comps[p] = Component(p, isy.FREE, vertex=p)
        self.vertices.append(p)
        self.edges[p] = FreeElement.of({p: 1})

    def regular_over_regular(self, p: str, lower: Sequence[str]) -> None:
        """Matrix encoding: column ``i`` is the image of the ``i``-th lower generator."""
        sys = self.sys
        G = sys.group[p]
        columns: list[tuple[str, int]] = []
        for q in lower:
            columns += [(q, j) for j in range(1, sys.group[q].dim + 1)]
        pad = max(0, len(columns) - G.dim)
        Gp = FGAbelianGroup(G.rank, G.torsion + (1,) * pad)
        t = Gp.rank
        coeff: dict[int, dict[int, int]] = {}
        extra: dict[int, FreeElement] = {}
        for i, (q, j) in enumerate(columns, start=1):
            x = sys.canonical_group_generators(q)[j - 1]
            img = tuple(sys.ext(q, p)(x.coords).coords) + (0,) * pad
            col = {}
            for row, a in enumerate(img, start=1):
                if row > t:
                    m = Gp.torsion[row - t - 1]
                    a = a % m or m
                col[row] = a
            coeff[i] = col
            extra[i] = self.comps[q].word((-x).coords)
        comp = self._regular_layer(p, Gp, G.dim, extra, coeff)
        self._link(comp, lower)

    def regular_over_mixed(self, p: str, lower: Sequence[str]) -> None:
        """Encoding through the torsion relations when a free prime sits below."""
        sys = self.sys
        entries: list[tuple[GroupElement, FreeElement]] = []
        free_lower = [q for q in lower if sys.is_free(q)]
        reg_lower = [q for q in lower if not sys.is_free(q)]
        for q in free_lower:
            entries.append((sys.ext(q, p)([1] + [0] * sys.group[q].dim), self.gamma(q, None)))
        for q in free_lower:
            for sg in isy.canonical_semigroup_generators(sys, q):
                h = [1] + [0] * sys.group[sg.prime].dim if sg.index is None else \
                    sys.canonical_group_generators(sg.prime)[sg.index - 1].coords
                entries.append((sys.ext(sg.prime, p)(h), self.gamma(sg.prime, sg.index)))
        for q in reg_lower:
            for j, x in enumerate(sys.canonical_group_generators(q)[:-1], start=1):
                entries.append((sys.ext(q, p)(x.coords), self.gamma(q, j)))
        G = sys.group[p]
        pad = max(0, len(entries) - len(G.torsion))
        Gp = FGAbelianGroup(G.rank, G.torsion + (1,) * pad)
        t = Gp.rank
        probe = Component(p, isy.REGULAR, Gp, G.dim, tuple(f"{p}_{j}" for j in range(1, Gp.dim + 1)),
                          None if (t == 0 and Gp.dim >= 1 and all(m == 1 for m in Gp.torsion)) else f"{p}_{Gp.dim + 1}")
        extra = {}
        for k, (value, vi) in enumerate(entries):
            neg = element_decompose(Gp.element(probe.pad((-value).coords)))
            c = {probe.gens[j]: a for j, a in enumerate(neg[:-1]) if a}
            if neg[-1]:
                c[probe.hub] = neg[-1]
            extra[t + 1 + k] = FreeElement.of(c) + vi
        comp = self._regular_layer(p, Gp, G.dim, extra)
        self._link(comp, lower)

    def free_over(self, p: str, cert: PrimeCertificate, bound: int | None) -> None:
        if cert.witness is None:
            raise SynthesisInconclusive(f"no positive kernel generator recorded for {p}")
        word = FreeElement.of({p: 1})
        for q, coords in cert.witness:
            word = word + self.expand(q, coords, bound)
        self.comps[p] = Component(p, isy.FREE, vertex=p)
        self.vertices.append(p)
        self.edges[p] = word

    def expand(self, q: str, coords: Sequence[int], bound: int | None) -> FreeElement:
        """Graph word for ``chi_q(coords)`` using the realized primes below."""
        sys = self.sys
        if not sys.is_free(q):
            return self.comps[q].word(coords)
        n, g = coords[0], sys.group[q].element(coords[1:])
        word = FreeElement.of({self.comps[q].vertex: n})
        for sg, a in expand_free(sys, q, g, bound):
            word = word + self.gamma(sg.prime, sg.index) * a
        return word


def expand_free(sys: isy.ISystem, q: str, g: GroupElement, bound: int | None = None
                ) -> list[tuple[isy.SemigroupGenerator, int]]:
    """``g`` in ``G_q`` as a non-negative combination of the canonical semigroup generators."""
    gens = isy.canonical_semigroup_generators(sys, q)
    if g.is_zero():
        return []
    res = isy.decompose_over(sys.group[q], [s.value for s in gens], g, bound)
    if not res.ok:
        raise SynthesisInconclusive(f"could not write {g.coords} over the generators of {q}: {res.reason}")
    return [(s, a) for s, a in zip(gens, res.solution) if a]


def positivity_witness_expansion(sys: isy.ISystem, p: str, witness: Sequence[tuple[str, Sequence[int]]],
                                 bound: int | None = None) -> dict[str, dict[str, Any]]:
    """Coefficients behind the free-prime relation: per lower-cover prime, ``n`` and generator counts."""
    out: dict[str, dict[str, Any]] = {}
    for q, coords in witness:
        if sys.is_free(q):
            g = sys.group[q].element(coords[1:])
            out[q] = {"n": coords[0], "coeffs": {s.describe(): a for s, a in expand_free(sys, q, g, bound)}}
        else:
            dec = element_decompose(sys.group[q].element(coords))
            out[q] = {"coeffs": {f"x{j}[{q}]": a for j, a in enumerate(dec, start=1)}}
    return out


def synth_group(G: FGAbelianGroup, name: str = "v") -> tuple[GraphTemplate, GeneratorMap]:
    """Graph whose nonzero monoid elements form ``G``."""
    sys = isy.ISystem.build([(name, isy.REGULAR, G)], [], {})
    s = synth(sys, decide(sys))
    return s.template, s.genmap


def synth(sys: isy.ISystem, decision: Decision | None = None, bound: int | None = None) -> Synthesis:
    """Row-finite graph template realizing ``M(sys)``."""
    if decision is None:
        decision = decide(sys)
    if not decision.realizable:
        raise NotRealizable(f"system is {decision.overall}")
    b = _Builder(sys)
    for p in sys.poset.linear_extension():
        lower = sys.poset.lower_cover(p)
        if sys.is_free(p):
            if not lower:
                b.minimal_free(p)
            else:
                b.free_over(p, decision.certificate(p), bound)
        elif not lower:
            b.minimal_regular(p)
        elif any(sys.is_free(q) for q in lower):
            b.regular_over_mixed(p, lower)
        else:
            b.regular_over_regular(p, lower)
    core = gm.FiniteGraph.build(b.vertices, b.edges)
    template = GraphTemplate(core, tuple(sorted(b.ladders)), tuple(sorted(b.c2l)))
    return Synthesis(template, _genmap(sys, b.comps), b.comps)


def _genmap(sys: isy.ISystem, comps: Mapping[str, Component]) -> GeneratorMap:
    fwd: dict[str, FreeElement] = {}
    inv: dict[str, tuple[str, tuple[int, ...]]] = {}
    lad: dict[str, tuple[str, tuple[int, ...]]] = {}
    for p, comp in comps.items():
        G = sys.group[p]
        if comp.kind == isy.FREE:
            fwd[_gen_key(p, None)] = FreeElement.of({comp.vertex: 1})
            inv[comp.vertex] = (p, (1,) + (0,) * G.dim)
            continue
        xs = sys.canonical_group_generators(p)
        for j in range(1, len(xs) + 1):
            fwd[_gen_key(p, j)] = comp.generator_word(j)
        zero = (0,) * G.dim
        for j, v in enumerate(comp.gens, start=1):
            inv[v] = (p, xs[j - 1].coords if j <= G.dim else zero)
            if j > comp.group.rank:
                lad[v] = (p, zero)
        if comp.hub:
            inv[comp.hub] = (p, xs[-1].coords if comp.N else zero)
    return GeneratorMap(fwd, inv, lad)


# ---------------------------------------------------------------------------
# verification


@dataclass
class Check:
    direction: str  # "monoid->graph" | "graph->monoid"
    relation: str
    outcome: str  # "pass" | "inconclusive" | "fail"
    stats: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"direction": self.direction, "relation": self.relation, "outcome": self.outcome,
                "stats": dict(self.stats)}


@dataclass
class VerificationReport:
    checks: list[Check]
    depth: int
    J_max: int
    size_cap: int

    def count(self, outcome: str) -> int:
        return sum(c.outcome == outcome for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.count("fail") == 0 and self.count("inconclusive") == 0

    def to_json(self) -> dict[str, Any]:
        return {"schema": 1, "depth": self.depth, "J_max": self.J_max, "size_cap": self.size_cap,
                "passed": self.count("pass"), "inconclusive": self.count("inconclusive"),
                "failed": self.count("fail"), "checks": [c.to_json() for c in self.checks]}


Word = list  # list of (prime, index-or-None, multiplicity)


def _monoid_value(sys: isy.ISystem, word: Word) -> isy.MonoidElement:
    terms = []
    for q, j, m in word:
        u = _generator_coords(sys, q, j)
        terms += [(q, u)] * m
    return isy.normal_form(sys, terms)


def _generator_coords(sys: isy.ISystem, q: str, j: int | None) -> tuple[int, ...]:
    if j is None:
        return (1,) + (0,) * sys.group[q].dim
    return sys.canonical_group_generators(q)[j - 1].coords


def _regular_word(sys: isy.ISystem, q: str, g: GroupElement) -> Word:
    dec = element_decompose(g)
    return [(q, j, a) for j, a in enumerate(dec, start=1) if a] or _neutral_word(sys, q)


def _neutral_word(sys: isy.ISystem, q: str) -> Word:
    """``x_{N+1} + sum of free x_k + sum of n_k x_k`` over torsion ``k``."""
    G = sys.group[q]
    mult = [1] * G.rank + list(G.torsion)
    return [(q, G.dim + 1, 1)] + [(q, k, m) for k, m in enumerate(mult, start=1)]


def _free_word(sys: isy.ISystem, q: str, g: GroupElement, bound: int | None) -> Word:
    return [(s.prime, s.index, a) for s, a in expand_free(sys, q, g, bound)]


Relation = tuple[str, str, list[tuple[Word, Word]]]


def monoid_relations(sys: isy.ISystem, bound: int | None = None) -> list[Relation]:
    """A defining set of relations of ``M(sys)`` over the canonical generators.

    Entries are ``(name, owner, instances)``. The owner is the largest prime
    involved and the relations owned by a lower set of primes present the
    monoid of that lower set. Instances are interchangeable; one of them
    suffices. For a regular ``j`` above ``i`` the relation
    ``x + y = x + phi_ji(y)`` is needed for a single ``x`` in the group
    ``M_j`` only, since the group relations of ``M_j`` carry it over to every
    other ``x``.
    """
    rels: list[Relation] = []
    for q in sys.poset.linear_extension():
        G = sys.group[q]
        if not sys.is_free(q):
            eps = _neutral_word(sys, q)
            for j in range(1, G.dim + 2):
                rels.append((f"neutral+x{j}[{q}]", q, [(eps + [(q, j, 1)], [(q, j, 1)])]))
            for k, n in enumerate(G.torsion):
                j = G.rank + k + 1
                # every generator occurs in eps, so with eps + x = x in place
                # n x_j + x = x for any one generator x already gives n x_j = eps
                alts = [([(q, j, n)], eps)] + [([(q, j, n), (q, m, 1)], [(q, m, 1)]) for m in range(1, G.dim + 2)]
                rels.append((f"{n}x{j}[{q}]=neutral", q, alts))
            continue
        gens = isy.canonical_semigroup_generators(sys, q)
        for k, sg in enumerate(gens):
            back = _free_word(sys, q, -sg.value, bound)
            rels.append((f"{q}+{sg.describe()}+inverse", q,
                         [([(q, None, 1), (sg.prime, sg.index, 1)] + back, [(q, None, 1)])]))
        if gens:
            A = IntMatrix.from_columns([s.value.coords for s in gens], G.dim).hstack(G.relation_matrix())
            for z in integer_kernel(A):
                z = z[: len(gens)]
                if not any(z):
                    continue
                pos = [(s.prime, s.index, a) for s, a in zip(gens, z) if a > 0]
                neg = [(s.prime, s.index, -a) for s, a in zip(gens, z) if a < 0]
                rels.append((f"{q}+kernel{list(z)}", q, [([(q, None, 1)] + pos, [(q, None, 1)] + neg)]))
    # relations along covering pairs imply the others by composing connecting maps
    for i, j in sorted(sys.poset.less):
        if not sys.poset.is_cover(i, j):
            continue
        ys = [None] if sys.is_free(i) else list(range(1, sys.group[i].dim + 2))
        for y in ys:
            img = sys.phi(i, j, _generator_coords(sys, i, y))
            name = f"{_gen_key(i, y)}@{j}"
            if sys.is_free(j):
                rels.append((name, j, [([(j, None, 1), (i, y, 1)], [(j, None, 1)] + _free_word(sys, j, img, bound))]))
                continue
            alts = []
            for k, x in enumerate(sys.canonical_group_generators(j), start=1):
                alts.append(([(j, k, 1), (i, y, 1)], _regular_word(sys, j, x + img)))
            alts.append((_neutral_word(sys, j) + [(i, y, 1)], _regular_word(sys, j, img)))
            rels.append((name, j, alts))
    return rels


def _word_str(word: Word) -> str:
    return " + ".join((f"{m}" if m > 1 else "") + _gen_key(q, j) for q, j, m in word) or "0"


def _parse_gen_key(key: str) -> tuple[str, int | None]:
    if key.startswith("x") and "[" in key and key.endswith("]"):
        j, q = key[1:-1].split("[", 1)
        if j.isdigit():
            return q, int(j)
    return key, None


@dataclass
class _Layer:
    """The vertices of one regular prime read off a template and a map.

    ``values`` gives each core vertex its group element. It is only filled
    when the vertices have the shape of the group construction (free
    generators, torsion generators anchoring ladders, an optional hub) and
    the values and generator words agree with it.
    """

    prime: str
    verts: list[str]
    torsion: dict[str, int]
    hub: str | None
    neutral: FreeElement
    rungs: dict[str, str]  # first rung -> anchor
    values: dict[str, tuple[int, ...]] | None
    problem: str = ""


def _layers(sys: isy.ISystem, template: GraphTemplate, genmap: GeneratorMap, g: gm.FiniteGraph) -> dict[str, _Layer]:
    out = {}
    for q in sys.primes:
        if sys.is_free(q):
            continue
        G = sys.group[q]
        xs = sys.canonical_group_generators(q)
        verts = sorted(v for v, (p, _) in genmap.inverse.items() if p == q and v in g.vertices)
        torsion = {L.anchor: L.n for L in template.ladders if L.anchor in verts}
        rungs = {L.rung(1): L.anchor for L in template.ladders if L.anchor in verts and L.rung(1) in g.vertices}
        last = genmap.forward.get(_gen_key(q, G.dim + 1), FreeElement())
        hub = next(iter(last.support)) if last.size == 1 and last.support <= set(verts) else None
        if hub in torsion:
            hub = None
        free = [v for v in verts if v not in torsion and v != hub]
        neutral = FreeElement.of({v: 1 for v in free + ([hub] if hub else [])}) + FreeElement.of(torsion)
        layer = _Layer(q, verts, torsion, hub, neutral, rungs, None)
        out[q] = layer
        val = {v: genmap.inverse[v][1] for v in verts}
        unit = {x.coords for x in xs[:G.rank]}
        tors = sorted((x.coords, n) for x, n in zip(xs[G.rank:G.dim], G.torsion))
        E = g.edges()
        comp = set(verts) | set(rungs)
        if not verts:
            layer.problem = "no vertices carry this prime"
        elif any(E[v][v] < 1 or not comp <= g.reach([v]) for v in comp):
            layer.problem = "vertices do not form one strongly connected part with loops"
        elif len(free) != G.rank or sorted(val[v] for v in free) != sorted(unit):
            layer.problem = "free generators do not match the group"
        elif sorted((val[v], n) for v, n in torsion.items() if n > 1) != tors or any(
                any(val[v]) for v, n in torsion.items() if n == 1):
            layer.problem = "torsion generators do not match the group"
        elif (hub is None and G.rank > 0) or (hub is not None and val[hub] != xs[-1].coords):
            layer.problem = "last generator does not match the group"
        else:
            for k, x in enumerate(xs, start=1):
                word = genmap.forward.get(_gen_key(q, k), FreeElement())
                if word.is_zero() or not word.support <= set(verts) or \
                        _sum_coords(G, [val[v] for v, m in word.items for _ in range(m)]) != x.coords:
                    layer.problem = f"generator word of {_gen_key(q, k)} has the wrong value"
                    break
            else:
                layer.values = val
    return out


def _sum_coords(G: FGAbelianGroup, parts: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return G.element([sum(c) for c in zip(*parts)] if parts else [0] * G.dim).coords


def _layer_identities(layer: _Layer) -> list[tuple[str, list[tuple[FreeElement, FreeElement]]]]:
    """Identities making the vertices of ``layer`` a copy of its group.

    The vertices and first rungs of a layer lie in one strongly connected
    component where every vertex has a loop, so their nonempty sums form a
    group inside the graph monoid. In a group ``x + u = u`` already forces
    ``x`` to be the identity. So it suffices that ``n v`` for each torsion
    vertex ``v`` of order ``n``, the neutral word ``e`` (hub, free vertices
    and ``n v`` over the torsion vertices) and each first rung add to some
    vertex ``u`` without changing it. Any ``u`` will do. With the torsion
    part settled, the hub plus the free vertices may stand in for ``e``,
    and ``e`` is implied outright when there is neither. ``v^1 = e`` serves
    for a rung as well.
    """
    e, one = layer.neutral, (lambda v: FreeElement.of([v]))
    absorbs = lambda x: [(x + one(u), one(u)) for u in layer.verts]  # noqa: E731
    out = [(f"{n}{v}=0", absorbs(one(v) * n)) for v, n in sorted(layer.torsion.items())]
    rest = FreeElement.of([v for v in layer.verts if v not in layer.torsion])
    if not rest.is_zero():
        out.append(("e=0", absorbs(e) + absorbs(rest)))
    out += [(f"{r}=0", absorbs(one(r)) + [(one(r), e)]) for r in sorted(layer.rungs)]
    return out


@dataclass
class _Task:
    name: str
    owner: str
    phase: int  # 0 layer identities, 1 relations of the owner alone or over its lower set, 2 covering pairs
    relation: str
    instances: list[tuple[str, FreeElement, FreeElement]]
    error: str = ""


def _tasks(sys: isy.ISystem, genmap: GeneratorMap, layers: Mapping[str, _Layer], g: gm.FiniteGraph,
           bound: int | None) -> list[_Task]:
    def gamma(word: Word) -> FreeElement | None:
        out = FreeElement()
        for q, j, m in word:
            key = _gen_key(q, j)
            if key not in genmap.forward:
                return None
            out = out + genmap.forward[key] * m
        return out

    tasks = []
    for q, layer in layers.items():
        if layer.values is None:
            tasks.append(_Task(f"layer[{q}]", q, 0, f"vertices of {q}", [], layer.problem))
            continue
        for name, pairs in _layer_identities(layer):
            rel = " | ".join(f"{a} = {b}" for a, b in pairs)
            tasks.append(_Task(name, q, 0, rel, [(f"{a} = {b}", a, b) for a, b in pairs]))
    for name, owner, alts in monoid_relations(sys, bound):
        rel = " | ".join(f"{_word_str(lhs)} = {_word_str(rhs)}" for lhs, rhs in alts)
        phase = 2 if "@" in name else 1
        images = [(gamma(lhs), gamma(rhs)) for lhs, rhs in alts]
        error = ""
        if any(_monoid_value(sys, lhs) != _monoid_value(sys, rhs) for lhs, rhs in alts):
            error = "relation does not hold in the monoid"
        elif any(a is None or b is None for a, b in images):
            error = "generator missing from the map"
        elif any(not (a.support | b.support) <= set(g.vertices) for a, b in images):
            error = "word uses unknown vertices"
        insts = [] if error else [(f"{_word_str(l)} = {_word_str(r)}", a, b)
                                  for (l, r), (a, b) in zip(alts, images)]
        tasks.append(_Task(name, owner, phase, rel, insts, error))
    order = {q: k for k, q in enumerate(sys.poset.linear_extension())}
    return sorted(tasks, key=lambda t: (order[t.owner], t.phase))


def _run_task(sys, g, task: _Task, own, lower, depth, size_cap) -> Check:
    if task.error:
        return Check("monoid->graph", task.relation, "fail", {"reason": task.error})
    first = None
    for attempt in (["classes", "plain"] if own or lower else ["plain"]):
        for label, a, b in task.instances:
            if attempt == "classes":
                res = equal_modulo(sys, g, a, b, own, lower, depth, size_cap)
            else:
                res = gm.equal_bounded(g, a, b, depth, size_cap)
            stats = dict(res.stats)
            stats.update({"instance": label, "lhs": str(a), "rhs": str(b), "steps": len(res.left) + len(res.right)})
            if res.equal:
                return Check("monoid->graph", task.relation, "pass", stats)
            first = first or Check("monoid->graph", task.relation, "inconclusive", stats)
    return first


def equal_modulo(sys: isy.ISystem, g: gm.FiniteGraph, alpha: FreeElement, beta: FreeElement,
                 own: tuple[str, Mapping[str, tuple[int, ...]]] | None,
                 lower: Mapping[str, tuple[str, tuple[int, ...]]], depth: int = gm.DEFAULT_DEPTH,
                 size_cap: int = gm.DEFAULT_SIZE_CAP, budget: int = gm.DEFAULT_STATE_BUDGET) -> gm.EqualResult:
    """Bounded search for a common descendant up to identities already derived.

    ``own = (q, values)`` names vertices forming a copy of the group of
    ``q``: nonempty sums of them are equal exactly when their values are.
    Such a part is kept as its value, and any of its vertices may be
    rewritten as long as the part is nonempty. ``lower`` sends vertices to
    monoid generators whose relations already hold in the graph; what lands
    there is kept as a monoid value and never rewritten. The remaining
    vertices are matched exactly and ``size_cap`` bounds them. Each side
    takes at most ``depth`` steps.
    """
    q, vals = own if own else (None, {})
    G = sys.group[q] if q else None
    verts = [v for v in g.vertices if v not in vals and v not in lower]
    idx = {v: i for i, v in enumerate(verts)}
    E = g.edges()

    def split(x: FreeElement) -> tuple[tuple[int, ...], tuple[int, ...] | None, isy.MonoidElement]:
        vec = [0] * len(verts)
        mine, terms = [], []
        for v, m in x.items:
            if v in vals:
                mine += [vals[v]] * m
            elif v in lower:
                terms += [lower[v]] * m
            else:
                vec[idx[v]] = m
        return tuple(vec), (_sum_coords(G, mine) if mine else None), isy.normal_form(sys, terms)

    # rewriting v: exact change, value added to the own part, value added below
    moves = {}
    for v in verts + sorted(vals):
        if E[v].is_zero():
            continue
        vec, mine, low = split(E[v])
        vec = list(vec)
        if v in idx:
            vec[idx[v]] -= 1
        elif mine is not None:
            mine = _sum_coords(G, [mine, [-c for c in vals[v]]])
        else:
            mine = _sum_coords(G, [[-c for c in vals[v]]])
        moves[v] = (tuple(vec), mine, low)
    sums: dict[tuple[isy.MonoidElement, str], isy.MonoidElement] = {}

    def step(s, v):
        vec, mine, low = s
        dvec, dmine, dlow = moves[v]
        if v in vals:
            mine = _sum_coords(G, [mine, dmine])
        elif dmine is not None:
            mine = dmine if mine is None else _sum_coords(G, [mine, dmine])
        if (low, v) not in sums:
            sums[low, v] = isy.add(sys, low, dlow)
        return tuple(a + b for a, b in zip(vec, dvec)), mine, sums[low, v]

    stats: dict[str, Any] = {"method": "bfs-modulo", "depth": depth, "size_cap": size_cap}
    starts = [split(alpha), split(beta)]
    if any(sum(s[0]) > size_cap for s in starts):
        return gm.EqualResult(False, None, (), (), dict(stats, explored=0, reason="start exceeds size_cap"))
    parents: list[dict[Any, Any]] = [{starts[0]: None}, {starts[1]: None}]
    frontiers = [[starts[0]], [starts[1]]]
    explored = 2

    def path(side: int, s: Any) -> tuple[str, ...]:
        steps = []
        while parents[side][s] is not None:
            s, v = parents[side][s]
            steps.append(v)
        return tuple(reversed(steps))

    for level in range(depth + 1):
        common = parents[0].keys() & parents[1].keys()
        if common:
            hit = min(common, key=lambda s: (s[0], s[1] or (), s[2].support, s[2].coords))
            witness = FreeElement.of({verts[i]: m for i, m in enumerate(hit[0]) if m})
            return gm.EqualResult(True, witness, path(0, hit), path(1, hit),
                                  dict(stats, explored=explored, own_value=hit[1], lower_value=str(hit[2])))
        if level == depth:
            break
        for side in (0, 1):
            nxt = []
            for s in frontiers[side]:
                cands = [verts[i] for i, m in enumerate(s[0]) if m] + (sorted(vals) if s[1] is not None else [])
                for v in cands:
                    if v not in moves:
                        continue
                    t = step(s, v)
                    if sum(t[0]) > size_cap or t in parents[side]:
                        continue
                    parents[side][t] = (s, v)
                    nxt.append(t)
                    explored += 1
                    if explored > budget:
                        return gm.EqualResult(False, None, (), (), dict(stats, explored=explored,
                                                                        reason="state budget exhausted"))
            frontiers[side] = nxt
        if not frontiers[0] and not frontiers[1]:
            break
    return gm.EqualResult(False, None, (), (), dict(stats, explored=explored))


def verify(sys: isy.ISystem, template: GraphTemplate, genmap: GeneratorMap, depth: int = gm.DEFAULT_DEPTH,
           J_max: int = gm.DEFAULT_JMAX, size_cap: int = gm.DEFAULT_SIZE_CAP, bound: int | None = None
           ) -> VerificationReport:
    """Check that the generator map and its inverse respect all defining relations.

    Checks run prime by prime along a linear extension. Once the identities
    of a regular prime's vertices hold, later checks of that prime compare
    its vertices by value; once every check below a prime passed, its checks
    compare what lands below by value too. See :func:`equal_modulo`.
    """
    g = gm.instantiate(template, J_max)
    checks: list[Check] = []
    layers = _layers(sys, template, genmap, g)
    free_vertex = {}
    for q in sys.primes:
        word = genmap.forward.get(q, FreeElement())
        if sys.is_free(q) and word.size == 1:
            free_vertex[next(iter(word.support))] = (q, (1,) + (0,) * sys.group[q].dim)
    passed: dict[tuple[str, int], bool] = {}
    for task in _tasks(sys, genmap, layers, g, bound):
        below = sys.poset.below(task.owner)
        own, lower = None, {}
        layer = layers.get(task.owner)
        if task.phase > 0 and layer and layer.values and passed.get((task.owner, 0), True):
            vals = dict(layer.values)
            vals.update({r: (0,) * sys.group[task.owner].dim for r in layer.rungs})
            own = (task.owner, vals)
        if below and all(passed.get((p, k), True) for p in below for k in range(3)):
            for p in below:
                if p in layers and layers[p].values:
                    lower.update({v: (p, c) for v, c in layers[p].values.items()})
                    lower.update({r: (p, (0,) * sys.group[p].dim) for r in layers[p].rungs})
            lower.update({v: t for v, t in free_vertex.items() if t[0] in below})
        check = _run_task(sys, g, task, own, lower, depth, size_cap)
        key = (task.owner, task.phase)
        passed[key] = passed.get(key, True) and check.outcome == "pass"
        checks.append(check)

    def delta(v: str) -> tuple[str, tuple[int, ...]] | None:
        try:
            return genmap.delta(v)
        except KeyError:
            return None

    for v, rv in gm.relations_of(g):
        rel = f"{v} = {rv}"
        terms = [delta(w) for w, m in rv.items for _ in range(m)]
        lhs_t = delta(v)
        if lhs_t is None or any(t is None for t in terms):
            checks.append(Check("graph->monoid", rel, "fail", {"reason": "vertex without an assigned value"}))
            continue
        try:
            lhs = isy.normal_form(sys, [lhs_t])
            rhs = isy.normal_form(sys, terms)
        except isy.ISystemError as exc:
            checks.append(Check("graph->monoid", rel, "fail", {"reason": str(exc)}))
            continue
        checks.append(Check("graph->monoid", rel, "pass" if lhs == rhs else "fail"))
    return VerificationReport(checks, depth, J_max, size_cap)


def delta_of(sys: isy.ISystem, genmap: GeneratorMap, x: FreeElement) -> isy.MonoidElement:
    """Image of a vertex multiset under the inverse assignment."""
    return isy.normal_form(sys, [genmap.delta(v) for v, m in x.items for _ in range(m)])


def component_of(synthesis: Synthesis, J_max: int) -> dict[str, str]:
    """Vertex -> prime for the instantiated graph."""
    out = {}
    for p, comp in synthesis.components.items():
        for v in comp.vertices():
            out[v] = p
    for L in synthesis.template.ladders:
        for j in range(1, J_max + 1):
            out[L.rung(j)] = out[L.anchor]
    return out

"""Finitely generated abelian groups and exact integer linear algebra.

Groups are written as ``Z^r + Z_{n_1} + ... + Z_{n_s}``. Coordinates list
the free part first, then the torsion part. Torsion entries equal to 1 are
allowed (the trivial factor used for padding) and are kept as given until
:meth:`FGAbelianGroup.canonical` is asked for.

Everything works on Python ints, so there is no overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import gcd
from typing import Iterable, Iterator, Sequence


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix stored as a tuple of rows."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows:
            raise ValueError("row count does not match entries")
        for r in self.entries:
            if len(r) != self.cols:
                raise ValueError("matrix is not rectangular")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rs = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(rs[0]) if rs else 0
        return cls(len(rs), cols, rs)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        cols = [list(c) for c in columns]
        return cls(rows, len(cols), tuple(tuple(c[i] for c in cols) for i in range(rows)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_columns(self.entries, self.cols) if self.rows else IntMatrix.zeros(self.cols, 0)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        ocols = other.columns()
        return IntMatrix(
            self.rows,
            other.cols,
            tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in ocols) for r in self.entries),
        )

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise ValueError("vector length does not match matrix")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.entries)

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return IntMatrix(self.rows, self.cols + other.cols,
                         tuple(a + b for a, b in zip(self.entries, other.entries)))

    def det(self) -> int:
        """Determinant by fraction-free Bareiss elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(r) for r in self.entries]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


def _ident(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class SNFResult:
    """``D = U * A * V`` with ``U``, ``V`` unimodular and ``D`` diagonal."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix = field(repr=False, compare=False)
    V_inv: IntMatrix = field(repr=False, compare=False)

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i, i] for i in range(min(self.D.rows, self.D.cols))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def snf(A: IntMatrix) -> SNFResult:
    """Smith normal form with unimodular transforms.

    The pivot is always the entry of smallest nonzero absolute value in the
    remaining block, ties broken by row-major position, so ``U`` and ``V``
    are reproducible.
    """
    m, n = A.rows, A.cols
    D = [list(r) for r in A.entries]
    U, Ui = _ident(m), _ident(m)
    V, Vi = _ident(n), _ident(n)

    # Row op  row_i += q*row_k  on D and U; inverse tracked as col_k -= q*col_i on Ui.
    def row_add(i: int, k: int, q: int) -> None:
        if q == 0:
            return
        for M_ in (D, U):
            rk, ri = M_[k], M_[i]
            for c in range(len(ri)):
                ri[c] += q * rk[c]
        for r in Ui:
            r[k] -= q * r[i]

    def col_add(j: int, k: int, q: int) -> None:
        # col_j += q*col_k on D and V; inverse: row_k -= q*row_j on Vi
        if q == 0:
            return
        for M_ in (D, V):
            for r in M_:
                r[j] += q * r[k]
        rj, rk = Vi[j], Vi[k]
        for c in range(len(rk)):
            rk[c] -= q * rj[c]

    def row_swap(i: int, k: int) -> None:
        if i == k:
            return
        for M_ in (D, U):
            M_[i], M_[k] = M_[k], M_[i]
        for r in Ui:
            r[i], r[k] = r[k], r[i]

    def col_swap(j: int, k: int) -> None:
        if j == k:
            return
        for M_ in (D, V):
            for r in M_:
                r[j], r[k] = r[k], r[j]
        Vi[j], Vi[k] = Vi[k], Vi[j]

    def row_neg(i: int) -> None:
        for M_ in (D, U):
            M_[i] = [-x for x in M_[i]]
        for r in Ui:
            r[i] = -r[i]

    for t in range(min(m, n)):
        while True:
            piv = None
            for i in range(t, m):
                for j in range(t, n):
                    x = D[i][j]
                    if x and (piv is None or abs(x) < abs(D[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                break
            row_swap(t, piv[0])
            col_swap(t, piv[1])
            p = D[t][t]
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    row_add(i, t, -(D[i][t] // p))
                    clean = clean and D[i][t] == 0
            for j in range(t + 1, n):
                if D[t][j]:
                    col_add(j, t, -(D[t][j] // p))
                    clean = clean and D[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % p), None)
            if bad is None:
                break
            row_add(t, bad, 1)
        if D[t][t] < 0:
            row_neg(t)
        if all(D[i][j] == 0 for i in range(t, m) for j in range(t, n)):
            break

    def mk(M_: list[list[int]], r: int, c: int) -> IntMatrix:
        return IntMatrix(r, c, tuple(tuple(row) for row in M_))

    return SNFResult(mk(U, m, m), mk(D, m, n), mk(V, n, n), mk(Ui, m, m), mk(Vi, n, n))


def integer_kernel(A: IntMatrix) -> list[tuple[int, ...]]:
    """A basis of the integer null space ``{x in Z^n : A x = 0}``."""
    res = snf(A)
    k = res.rank
    return [res.V.column(j) for j in range(k, A.cols)]


def solve_integer(A: IntMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    """One integer solution of ``A x = b`` or None if there is none."""
    res = snf(A)
    c = res.U.apply(b)
    y = [0] * A.cols
    for i, ci in enumerate(c):
        d = res.D[i, i] if i < A.cols else 0
        if d == 0:
            if ci != 0:
                return None
        else:
            if ci % d:
                return None
            y[i] = ci // d
    return res.V.apply(y)


# ---------------------------------------------------------------------------
# groups and elements


@dataclass(frozen=True)
class FGAbelianGroup:
    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "torsion", tuple(int(t) for t in self.torsion))
        if self.rank < 0:
            raise ValueError("rank must be non-negative")
        if any(t < 1 for t in self.torsion):
            raise ValueError("torsion entries must be >= 1")

    @property
    def dim(self) -> int:
        return self.rank + len(self.torsion)

    @property
    def moduli(self) -> tuple[int, ...]:
        """Per-coordinate modulus, 0 for free coordinates."""
        return (0,) * self.rank + self.torsion

    def is_canonical(self) -> bool:
        ts = self.torsion
        return all(t > 1 for t in ts) and all(ts[i + 1] % ts[i] == 0 for i in range(len(ts) - 1))

    def is_trivial(self) -> bool:
        return self.rank == 0 and all(t == 1 for t in self.torsion)

    def order(self) -> int | None:
        if self.rank:
            return None
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def relation_matrix(self) -> IntMatrix:
        """Columns ``n_i e_i`` presenting the group as a quotient of ``Z^dim``."""
        cols = []
        for i, t in enumerate(self.torsion):
            c = [0] * self.dim
            c[self.rank + i] = t
            cols.append(c)
        return IntMatrix.from_columns(cols, self.dim)

    def canonical(self) -> "Presentation":
        """Canonical form together with the coordinate change to it."""
        return quotient(self.dim, self.relation_matrix())

    def reduce(self, coords: Sequence[int]) -> tuple[int, ...]:
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(coords)}")
        return tuple(int(c) % m if m else int(c) for c, m in zip(coords, self.moduli))

    def element(self, coords: Sequence[int]) -> "GroupElement":
        return GroupElement(self, self.reduce(coords))

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.dim)

    def generators(self) -> list["GroupElement"]:
        out = []
        for i in range(self.dim):
            c = [0] * self.dim
            c[i] = 1
            out.append(self.element(c))
        return out

    def elements(self) -> Iterator["GroupElement"]:
        if self.rank:
            raise ValueError("cannot enumerate an infinite group")
        for c in product(*(range(t) for t in self.torsion)):
            yield GroupElement(self, tuple(c))

    def __str__(self) -> str:
        parts = ([f"Z^{self.rank}"] if self.rank > 1 else ["Z"] if self.rank else [])
        parts += [f"Z_{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class GroupElement:
    group: FGAbelianGroup
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if len(self.coords) != self.group.dim:
            raise ValueError("coordinate length does not match group dimension")
        for c, m in zip(self.coords, self.group.moduli):
            if m and not 0 <= c < m:
                raise ValueError("torsion coordinate out of range")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._same(other)
        return self.group.element([a + b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "GroupElement":
        return self.group.element([-a for a in self.coords])

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def __mul__(self, k: int) -> "GroupElement":
        return self.group.element([k * a for a in self.coords])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def _same(self, other: "GroupElement") -> None:
        if self.group != other.group:
            raise ValueError("elements live in different groups")


# ---------------------------------------------------------------------------
# quotients of Z^n


@dataclass(frozen=True)
class Presentation:
    """Canonical form of ``Z^n / L`` with maps in both directions.

    ``project`` sends a vector of ``Z^n`` to canonical coordinates and
    ``section`` sends canonical generator ``k`` back to a representative.
    """

    ambient_dim: int
    group: FGAbelianGroup
    project_matrix: IntMatrix  # group.dim x ambient_dim
    section_matrix: IntMatrix  # ambient_dim x group.dim

    def project(self, v: Sequence[int]) -> GroupElement:
        return self.group.element(self.project_matrix.apply(v))

    def lift(self, x: GroupElement | Sequence[int]) -> tuple[int, ...]:
        coords = x.coords if isinstance(x, GroupElement) else tuple(x)
        return self.section_matrix.apply(coords)


def quotient(n: int, relations: IntMatrix) -> Presentation:
    """Canonical decomposition of ``Z^n`` modulo the column span of ``relations``."""
    if relations.rows != n:
        raise ValueError("relation matrix must have n rows")
    res = snf(relations)
    diag = res.diagonal
    nz = [i for i, d in enumerate(diag) if d != 0]
    tors_idx = [i for i in nz if diag[i] > 1]
    free_idx = list(range(len(nz), n))
    keep = free_idx + tors_idx
    group = FGAbelianGroup(len(free_idx), tuple(diag[i] for i in tors_idx))
    P = IntMatrix.from_rows([res.U.entries[i] for i in keep], n)
    S = IntMatrix.from_columns([res.U_inv.column(i) for i in keep], n) if keep else IntMatrix.zeros(n, 0)
    return Presentation(n, group, P, S)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism given by a codomain-coordinates x domain-generators matrix."""

    domain: FGAbelianGroup
    codomain: FGAbelianGroup
    matrix: IntMatrix

    def __post_init__(self) -> None:
        if self.matrix.rows != self.codomain.dim or self.matrix.cols != self.domain.dim:
            raise ValueError("matrix shape does not match domain/codomain")

    @classmethod
    def from_columns(cls, domain: FGAbelianGroup, codomain: FGAbelianGroup,
                     columns: Sequence[Sequence[int]]) -> "GroupHom":
        return cls(domain, codomain, IntMatrix.from_columns(columns, codomain.dim))

    @classmethod
    def zero(cls, domain: FGAbelianGroup, codomain: FGAbelianGroup) -> "GroupHom":
        return cls(domain, codomain, IntMatrix.zeros(codomain.dim, domain.dim))

    @classmethod
    def identity(cls, g: FGAbelianGroup) -> "GroupHom":
        return cls(g, g, IntMatrix.identity(g.dim))

    def __call__(self, x: GroupElement | Sequence[int]) -> GroupElement:
        coords = x.coords if isinstance(x, GroupElement) else tuple(x)
        return self.codomain.element(self.matrix.apply(coords))

    def is_well_defined(self) -> bool:
        for j, n in enumerate(self.domain.moduli):
            if n and not self.codomain.element([n * a for a in self.matrix.column(j)]).is_zero():
                return False
        return True

    def compose(self, first: "GroupHom") -> "GroupHom":
        """``self o first``."""
        if first.codomain != self.domain:
            raise ValueError("cannot compose: codomain/domain mismatch")
        return GroupHom(first.domain, self.codomain, self.matrix @ first.matrix)

    def image_column(self, j: int) -> GroupElement:
        return self.codomain.element(self.matrix.column(j))

    def equals(self, other: "GroupHom") -> bool:
        if (self.domain, self.codomain) != (other.domain, other.codomain):
            return False
        return all(self.image_column(j) == other.image_column(j) for j in range(self.domain.dim))


# ---------------------------------------------------------------------------
# subgroups


@dataclass(frozen=True)
class Subgroup:
    """Subgroup of ``ambient`` generated by ``generators``.

    ``relations`` has one row per generator; its columns span the integer
    relations among the generators, so the subgroup is abstractly
    ``Z^k / column span``.
    """

    ambient: FGAbelianGroup
    generators: tuple[GroupElement, ...]
    relations: IntMatrix

    def structure(self) -> tuple[FGAbelianGroup, list[GroupElement]]:
        """Canonical isomorphism type and matching generators."""
        k = len(self.generators)
        pres = quotient(k, self.relations)
        gens = []
        for j in range(pres.group.dim):
            lam = pres.section_matrix.column(j)
            acc = self.ambient.zero()
            for c, g in zip(lam, self.generators):
                acc = acc + g * c
            gens.append(acc)
        return pres.group, gens

    def contains(self, x: GroupElement) -> bool:
        return membership_coefficients(self.ambient, self.generators, x) is not None


def _gens_matrix(ambient: FGAbelianGroup, gens: Sequence[GroupElement]) -> IntMatrix:
    return IntMatrix.from_columns([g.coords for g in gens], ambient.dim) if gens else IntMatrix.zeros(ambient.dim, 0)


def subgroup(ambient: FGAbelianGroup, gens: Iterable[GroupElement]) -> Subgroup:
    gens = tuple(gens)
    K = _gens_matrix(ambient, gens)
    big = K.hstack(ambient.relation_matrix())
    rel = [v[: len(gens)] for v in integer_kernel(big)]
    rel = [v for v in rel if any(v)]
    R = IntMatrix.from_columns(rel, len(gens)) if rel else IntMatrix.zeros(len(gens), 0)
    return Subgroup(ambient, gens, R)


def membership_coefficients(ambient: FGAbelianGroup, gens: Sequence[GroupElement],
                            x: GroupElement) -> tuple[int, ...] | None:
    """Integers ``l`` with ``sum l_i gens_i = x``, or None."""
    K = _gens_matrix(ambient, gens).hstack(ambient.relation_matrix())
    sol = solve_integer(K, x.coords)
    return None if sol is None else sol[: len(gens)]


def kernel(f: GroupHom) -> Subgroup:
    """Kernel of ``f`` as a subgroup of the domain."""
    A = f.matrix.hstack(f.codomain.relation_matrix())
    gens = []
    for v in integer_kernel(A):
        g = f.domain.element(v[: f.domain.dim])
        if not g.is_zero() and g not in gens:
            gens.append(g)
    sub = subgroup(f.domain, gens)
    grp, cgens = sub.structure()
    # Re-present on the canonical generators so callers get a tidy list.
    return subgroup(f.domain, cgens)


def image(f: GroupHom) -> Subgroup:
    return subgroup(f.codomain, [f.image_column(j) for j in range(f.domain.dim)])


def cokernel(f: GroupHom) -> tuple[FGAbelianGroup, GroupHom]:
    """Canonical ``codomain / image(f)`` and the projection onto it."""
    rel = f.matrix.hstack(f.codomain.relation_matrix())
    pres = quotient(f.codomain.dim, rel)
    return pres.group, GroupHom(f.codomain, pres.group, pres.project_matrix)


def is_surjective(f: GroupHom) -> bool:
    return cokernel(f)[0].is_trivial()


def subgroup_is_cyclic(gens: Sequence[GroupElement],
                       ambient: FGAbelianGroup | None = None) -> tuple[bool, int | None]:
    """Whether ``<gens>`` is cyclic; ``d`` is 0 for Z, k for Z_k, 1 if trivial."""
    if ambient is None:
        if not gens:
            raise ValueError("ambient group needed for an empty generator list")
        ambient = gens[0].group
    grp, _ = subgroup(ambient, gens).structure()
    if grp.dim == 0:
        return True, 1
    if grp.dim > 1:
        return False, None
    return True, (0 if grp.rank else grp.torsion[0])


def cyclic_generators(gens: Sequence[GroupElement],
                      ambient: FGAbelianGroup | None = None) -> list[GroupElement]:
    """Every single generator of the cyclic subgroup ``<gens>``."""
    if ambient is None:
        ambient = gens[0].group
    grp, cg = subgroup(ambient, gens).structure()
    if grp.dim == 0:
        return [ambient.zero()]
    if grp.dim > 1:
        raise ValueError("subgroup is not cyclic")
    g = cg[0]
    if grp.rank:
        return [g, -g]
    k = grp.torsion[0]
    return sorted((g * u for u in range(1, k) if gcd(u, k) == 1), key=lambda e: e.coords)


def element_decompose(x: GroupElement) -> tuple[int, ...]:
    """Non-negative coefficients over the semigroup generators ``x_1..x_{N+1}``.

    ``x_{N+1} = -(x_1 + ... + x_r)``. With ``k = max(0, -min free coord)``
    the free coefficients are ``m_i + k``, torsion ones are the reduced
    coordinates and the last one is ``k``.
    """
    r = x.group.rank
    free = x.coords[:r]
    k = max(0, -min(free)) if free else 0
    return tuple(m + k for m in free) + x.coords[r:] + (k,)


def recompose(group: FGAbelianGroup, coeffs: Sequence[int]) -> GroupElement:
    """Inverse of :func:`element_decompose` (sum of coefficients times generators)."""
    if len(coeffs) != group.dim + 1:
        raise ValueError("need dim+1 coefficients")
    r = group.rank
    k = coeffs[-1]
    return group.element([c - k for c in coeffs[:r]] + list(coeffs[r:-1]))

"""Named example I-systems."""

from __future__ import annotations

from typing import Callable, Sequence

from .fgab import FGAbelianGroup, GroupHom, IntMatrix
from .isystem import FREE, REGULAR, ConnectingMap, ISystem

TRIVIAL = FGAbelianGroup(0)


def _empty_map(src: FGAbelianGroup, dst: FGAbelianGroup, c: Sequence[int] | None = None) -> ConnectingMap:
    h = GroupHom.zero(src, dst)
    return ConnectingMap(h, None if c is None else dst.element(c))


def zplusinf() -> ISystem:
    """Free ``p`` under regular ``a``, both groups trivial: the monoid ``{0, p, a}`` with ``p + a = a``."""
    return ISystem.build([("p", FREE, TRIVIAL), ("a", REGULAR, TRIVIAL)], [("p", "a")],
                         {("p", "a"): _empty_map(TRIVIAL, TRIVIAL, ())})


def nographpab() -> ISystem:
    """Free ``p`` over two free minimal primes ``a`` and ``b``; not a graph monoid."""
    prs = [("a", FREE, TRIVIAL), ("b", FREE, TRIVIAL), ("p", FREE, TRIVIAL)]
    return ISystem.build(prs, [("a", "p"), ("b", "p")],
                         {("a", "p"): _empty_map(TRIVIAL, TRIVIAL, ()), ("b", "p"): _empty_map(TRIVIAL, TRIVIAL, ())})


def examfree(r: int, s: int, k: int | Sequence[int] = 1) -> ISystem:
    """Free ``p`` over ``r`` free minimal primes with ``G_p = Z^s + Z_k1 + ... + Z_k(r-s)``.

    ``q_i`` maps to ``e_i`` for ``i <= s`` and to ``(-1, ..., -1, e_(i-s))``
    otherwise. ``k`` is one torsion order for every factor or a list.
    """
    if not 0 <= s <= r:
        raise ValueError("need 0 <= s <= r")
    ks = [k] * (r - s) if isinstance(k, int) else list(k)
    if len(ks) != r - s or any(x < 1 for x in ks):
        raise ValueError("need r - s positive torsion orders")
    G = FGAbelianGroup(s, tuple(ks))
    prs = [(f"q{i}", FREE, TRIVIAL) for i in range(1, r + 1)] + [("p", FREE, G)]
    maps = {}
    for i in range(1, r + 1):
        c = [0] * G.dim
        if i <= s:
            c[i - 1] = 1
        else:
            c[:s] = [-1] * s
            c[s + i - s - 1] = 1
        maps[(f"q{i}", "p")] = _empty_map(TRIVIAL, G, c)
    return ISystem.build(prs, [(f"q{i}", "p") for i in range(1, r + 1)], maps)


def easy(k: int = 2) -> ISystem:
    """Free ``p`` over one free ``q`` with ``G_p = Z_k`` and ``c = 1``."""
    if k < 1:
        raise ValueError("k must be positive")
    G = FGAbelianGroup(0, (k,))
    return ISystem.build([("q", FREE, TRIVIAL), ("p", FREE, G)], [("q", "p")],
                         {("q", "p"): _empty_map(TRIVIAL, G, (1,))})


def cone_ab() -> ISystem:
    """Free ``a < b`` with ``G_b = Z_2`` and ``c = 1``."""
    G = FGAbelianGroup(0, (2,))
    return ISystem.build([("a", FREE, TRIVIAL), ("b", FREE, G)], [("a", "b")],
                         {("a", "b"): _empty_map(TRIVIAL, G, (1,))})


def en(n: int = 1) -> ISystem:
    """Regular ``v < w`` over ``Z`` with connecting map multiplication by ``n``."""
    Z = FGAbelianGroup(1)
    h = GroupHom(Z, Z, IntMatrix.from_rows([[n]]))
    return ISystem.build([("v", REGULAR, Z), ("w", REGULAR, Z)], [("v", "w")], {("v", "w"): ConnectingMap(h)})


def f_system() -> ISystem:
    """Regular ``v < w`` over ``Z_2`` with the zero connecting map."""
    G = FGAbelianGroup(0, (2,))
    return ISystem.build([("v", REGULAR, G), ("w", REGULAR, G)], [("v", "w")],
                         {("v", "w"): ConnectingMap(GroupHom.zero(G, G))})


BUILTINS: dict[str, tuple[Callable[..., ISystem], str, str]] = {
    "zplusinf": (zplusinf, "", "free p under regular a, trivial groups"),
    "nographpab": (nographpab, "", "free p over free a and b; not realizable"),
    "examfree": (examfree, "r s [k]", "free p over r free primes, G_p = Z^s + (Z_k)^(r-s)"),
    "easy": (easy, "[k]", "free p over free q, G_p = Z_k, c = 1"),
    "cone-ab": (cone_ab, "", "free a < b, G_b = Z_2, c = 1"),
    "En": (en, "[n]", "regular v < w over Z, map x -> n x"),
    "F": (f_system, "", "regular v < w over Z_2, zero map"),
}


def get(name: str, args: Sequence[str] = ()) -> ISystem:
    if name not in BUILTINS:
        raise KeyError(f"unknown example {name!r}")
    fn = BUILTINS[name][0]
    try:
        ints = [int(a) for a in args]
    except ValueError as exc:
        raise ValueError(f"example arguments must be integers: {list(args)}") from exc
    if name == "examfree" and len(ints) > 3:
        return examfree(ints[0], ints[1], ints[2:])
    return fn(*ints)

"""Shared generators for the test-suite."""

from __future__ import annotations

import itertools
import random

from graphmonoid.fgab import FGAbelianGroup, GroupHom
from graphmonoid.isystem import FREE, REGULAR, ConnectingMap, ISystem, Poset

SMALL_GROUPS = [
    FGAbelianGroup(0), FGAbelianGroup(0, (2,)), FGAbelianGroup(0, (3,)), FGAbelianGroup(0, (4,)),
    FGAbelianGroup(0, (5,)), FGAbelianGroup(0, (6,)), FGAbelianGroup(0, (7,)), FGAbelianGroup(0, (8,)),
    FGAbelianGroup(0, (2, 2)), FGAbelianGroup(0, (2, 4)), FGAbelianGroup(0, (2, 2, 2)),
]


def random_hom(rng: random.Random, G: FGAbelianGroup, H: FGAbelianGroup) -> GroupHom:
    elems = list(H.elements())
    cols = []
    for n in G.torsion:
        ok = [h for h in elems if (h * n).is_zero()]
        cols.append(rng.choice(ok).coords)
    return GroupHom.from_columns(G, H, cols)


def random_poset(rng: random.Random, names: list[str]) -> list[tuple[str, str]]:
    """Random relations consistent with the order of ``names``."""
    return [(a, b) for a, b in itertools.combinations(names, 2) if rng.random() < 0.5]


def random_regular_system(rng: random.Random, max_primes: int = 3) -> ISystem:
    k = rng.randint(1, max_primes)
    names = [f"r{i}" for i in range(k)]
    groups = {n: rng.choice(SMALL_GROUPS) for n in names}
    pairs = random_poset(rng, names)
    P = Poset.build(names, pairs)
    maps = {}
    for b in names:
        for a in P.lower_cover(b):
            maps[(a, b)] = ConnectingMap(random_hom(rng, groups[a], groups[b]))
    return ISystem.build([(n, REGULAR, groups[n]) for n in names], pairs, maps)


def canonical_poset_key(n: int, rel: frozenset) -> tuple:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted((perm[a], perm[b]) for a, b in rel))
        if best is None or key < best:
            best = key
    return best


def unlabeled_posets(n: int) -> list[frozenset]:
    """All posets on ``0..n-1`` up to isomorphism, as strict-order relation sets."""
    pairs = list(itertools.combinations(range(n), 2))
    seen = {}
    for mask in range(1 << len(pairs)):
        rel = {pairs[i] for i in range(len(pairs)) if mask >> i & 1}
        if any((a, b) in rel and (b, c) in rel and (a, c) not in rel for a, b, c in itertools.permutations(range(n), 3)):
            continue
        key = canonical_poset_key(n, frozenset(rel))
        seen.setdefault(key, frozenset(rel))
    return list(seen.values())


def antisymmetric_system(n: int, rel: frozenset, labels: tuple[str, ...]) -> ISystem:
    T = FGAbelianGroup(0)
    names = [f"e{i}" for i in range(n)]
    P = Poset.build(names, [(names[a], names[b]) for a, b in rel])
    maps = {}
    for b in names:
        for a in P.lower_cover(b):
            c = T.zero() if labels[names.index(a)] == FREE else None
            maps[(a, b)] = ConnectingMap(GroupHom.zero(T, T), c)
    return ISystem.build([(names[i], labels[i], T) for i in range(n)], [(names[a], names[b]) for a, b in rel], maps)

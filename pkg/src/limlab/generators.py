"""Seeded random instances: groups, towers, Ω-systems, inverse systems and cochains."""

from __future__ import annotations

import math
import random
from typing import Sequence

from .homalg import (
    AlternatingCochain,
    CochainLayout,
    FGAbelianGroup,
    InverseSystem,
    TruncatedOmegaSystem,
    coboundary,
    direct_sum_system,
    meet_table,
    pullback_tower,
    with_meets,
)
from .order import FiniteQuasiOrder, iter_orders, product_order
from .snf import Matrix

# no 2-torsion: the strict-tuple cochains agree with fully alternating ones then
ODD_ORDERS = (0, 0, 3, 5, 9)


def diagonal_orders(G: FGAbelianGroup) -> list[int]:
    """Orders of the generators of a group built by FGAbelianGroup.diagonal."""
    out = [0] * G.ngens
    for r in G.relations:
        i = next(j for j, v in enumerate(r) if v)
        out[i] = abs(r[i])
    return out


def random_group(rng: random.Random, max_rank: int = 2, orders: Sequence[int] = ODD_ORDERS,
                 min_rank: int = 0) -> FGAbelianGroup:
    r = rng.randint(min_rank, max_rank)
    return FGAbelianGroup.diagonal([rng.choice(orders) for _ in range(r)])


def random_hom(rng: random.Random, src: FGAbelianGroup, tgt: FGAbelianGroup, bound: int = 3) -> Matrix:
    """A well-defined map between diagonal presentations.

    Entry (i, j) must kill q_j in Z/q'_i: a multiple of q'_i / gcd(q_j, q'_i),
    and 0 when the target is free but the source is torsion.
    """
    qs, qt = diagonal_orders(src), diagonal_orders(tgt)
    M = []
    for qi in qt:
        row = []
        for qj in qs:
            if qi == 0:
                row.append(rng.randint(-bound, bound) if qj == 0 else 0)
            else:
                step = qi // math.gcd(qj, qi)
                row.append(step * rng.randint(-bound, bound))
        M.append(row)
    return M


def random_tower(rng: random.Random, height: int, max_rank: int = 2, orders: Sequence[int] = ODD_ORDERS):
    """Groups G_0..G_height and steps G_{k+1} -> G_k."""
    groups = [random_group(rng, max_rank, orders) for _ in range(height + 1)]
    steps = [random_hom(rng, groups[k + 1], groups[k]) for k in range(height)]
    return groups, steps


def random_omega_system(rng: random.Random, width: int, height: int, max_rank: int = 2,
                        orders: Sequence[int] = ODD_ORDERS) -> TruncatedOmegaSystem:
    towers = [random_tower(rng, height, max_rank, orders) for _ in range(width)]
    return TruncatedOmegaSystem(
        width, height,
        tuple(tuple(g) for g, _ in towers),
        tuple(tuple(tuple(map(tuple, s)) for s in steps) for _, steps in towers))


def random_monotone_to_chain(rng: random.Random, P: FiniteQuasiOrder, h: int) -> list[int]:
    """f(x) = min(h-1, #(S ∩ down(x))) for a random set S; monotone by construction."""
    S = {x for x in P.elements if rng.random() < 0.5}
    return [min(h - 1, sum(1 for y in S if P.le(y, x))) for x in P.elements]


def downset_system(P: FiniteQuasiOrder, q: int = 0) -> InverseSystem:
    """G_x = (Z/q)^{down(x)} with restriction maps; q = 0 means Z."""
    down = [[y for y in P.linear_extension if P.le(y, x)] for x in P.elements]
    terms = tuple(FGAbelianGroup.diagonal([q] * len(d)) for d in down)
    bonds = {}
    for x in P.elements:
        for y in P.elements:
            if P.le(x, y):
                pos = {v: i for i, v in enumerate(down[y])}
                bonds[(x, y)] = tuple(tuple(int(pos[v] == c) for c in range(len(down[y]))) for v in down[x])
    return InverseSystem(P, terms, bonds)


def upset_system(P: FiniteQuasiOrder, q: int = 0) -> InverseSystem:
    """G_x = (Z/q)^{up(x)} with extension-by-zero maps (up(y) ⊆ up(x) for x <= y)."""
    up = [[y for y in P.linear_extension if P.le(x, y)] for x in P.elements]
    terms = tuple(FGAbelianGroup.diagonal([q] * len(u)) for u in up)
    bonds = {}
    for x in P.elements:
        for y in P.elements:
            if P.le(x, y):
                pos = {v: i for i, v in enumerate(up[y])}
                bonds[(x, y)] = tuple(tuple(int(pos.get(v) == c) for c in range(len(up[y]))) for v in up[x])
    return InverseSystem(P, terms, bonds)


def v_shape(arms: int = 2) -> FiniteQuasiOrder:
    """A bottom with ``arms`` incomparable elements above it: meets but no top."""
    return with_meets(FiniteQuasiOrder.from_relation(arms + 1, [(0, i) for i in range(1, arms + 1)]))


def meet_orders(max_size: int = 4) -> list[FiniteQuasiOrder]:
    """Every naturally labelled poset with <= max_size elements that has all meets."""
    out = []
    for size in range(1, max_size + 1):
        for P in iter_orders(size):
            tab = meet_table(P)
            if tab is not None:
                out.append(FiniteQuasiOrder(P.leq, P.labels, tab, P.join, P.linear_extension))
    return out


def random_index(rng: random.Random, max_size: int = 6) -> FiniteQuasiOrder:
    kind = rng.choice(["chain", "grid", "v", "meet-poset"])
    if kind == "chain":
        return FiniteQuasiOrder.chain(rng.randint(1, max_size))
    if kind == "grid":
        a = rng.randint(1, 3)
        b = rng.randint(1, max(1, max_size // a))
        return product_order([a, b])
    if kind == "v":
        return v_shape(rng.randint(2, max(2, max_size - 1)))
    pool = meet_orders(min(4, max_size))
    return rng.choice(pool)


def random_inverse_system(rng: random.Random, P: FiniteQuasiOrder, parts: int = 2, max_rank: int = 2,
                          orders: Sequence[int] = ODD_ORDERS) -> InverseSystem:
    """A direct sum of pulled-back towers, sometimes with an up-set or down-set system."""
    P = with_meets(P)
    pieces = []
    for _ in range(parts):
        h = rng.randint(1, 3)
        groups, steps = random_tower(rng, h - 1, max_rank, orders)
        pieces.append(pullback_tower(P, random_monotone_to_chain(rng, P, h), groups, steps))
    r = rng.random()
    if r < 0.25:
        pieces.append(upset_system(P, rng.choice([0, 3])))
    elif r < 0.5:
        pieces.append(downset_system(P, rng.choice([0, 3])))
    return direct_sum_system(pieces)


def random_cochain(rng: random.Random, X: InverseSystem, n: int, bound: int = 3,
                   density: float = 1.0) -> AlternatingCochain:
    lay = CochainLayout(X, n)
    vals = {}
    for t in lay.tuples:
        g = X.terms[lay.meet(t)]
        if rng.random() < density:
            vals[t] = [rng.randint(-bound, bound) for _ in range(g.ngens)]
        else:
            vals[t] = [0] * g.ngens
    return AlternatingCochain(n, vals)


def random_coboundary(rng: random.Random, X: InverseSystem, n: int, bound: int = 3) -> tuple[AlternatingCochain, AlternatingCochain]:
    """(Ψ0, dΨ0) with Ψ0 of degree n-1."""
    psi0 = random_cochain(rng, X, n - 1, bound)
    return psi0, coboundary(X, psi0)


def tail_pullback_cochain(rng: random.Random, T: TruncatedOmegaSystem, degree: int, towers: Sequence[int],
                          bound: int = 3) -> AlternatingCochain:
    """Σ over the given towers of cochains that depend only on that tower's coordinates.

    A tuple whose points share the tower-i coordinate gets 0 in tower i.
    """
    X = T.to_inverse_system()
    P = X.index
    pts = T.points
    lay = CochainLayout(X, degree)
    tables: dict[int, dict[tuple[int, ...], list[int]]] = {}
    for i in towers:
        tab = {}
        for lv in _increasing(T.height + 1, degree + 1):
            tab[lv] = [rng.randint(-bound, bound) for _ in range(T.groups[i][lv[0]].ngens)]
        tables[i] = tab
    vals = {}
    for t in lay.tuples:
        x = pts[P.meet_of(t)]
        offs = T.offsets(x)
        vec = [0] * offs[-1]
        for i in towers:
            coords = [pts[a][i] for a in t]
            if len(set(coords)) < len(coords):
                continue
            perm = sorted(range(len(coords)), key=lambda a: coords[a])
            sign = _perm_sign(perm)
            key = tuple(coords[a] for a in perm)
            v = tables[i][key]
            vec[offs[i]:offs[i + 1]] = [sign * w for w in v]
        vals[t] = vec
    return AlternatingCochain(degree, vals)


def low_tower_cochain(rng: random.Random, T: TruncatedOmegaSystem, degree: int, k: int,
                      bound: int = 3) -> AlternatingCochain:
    """Random cochain supported on towers 0..k."""
    X = T.to_inverse_system()
    P = X.index
    lay = CochainLayout(X, degree)
    vals = {}
    for t in lay.tuples:
        x = T.points[P.meet_of(t)]
        offs = T.offsets(x)
        vec = [0] * offs[-1]
        for j in range(offs[min(k + 1, T.width)]):
            vec[j] = rng.randint(-bound, bound)
        vals[t] = vec
    return AlternatingCochain(degree, vals)


def _increasing(h: int, length: int) -> list[tuple[int, ...]]:
    import itertools

    return list(itertools.combinations(range(h), length))


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def add_cochains(a: AlternatingCochain, b: AlternatingCochain) -> AlternatingCochain:
    keys = set(a.values) | set(b.values)
    out = {}
    for t in keys:
        u, v = a.values.get(t), b.values.get(t)
        if u is None:
            out[t] = list(v)
        elif v is None:
            out[t] = list(u)
        else:
            out[t] = [x + y for x, y in zip(u, v)]
    return AlternatingCochain(a.degree, out)


def trivialization_instance(seed: int, width: int | None = None, height: int | None = None, n: int | None = None):
    """(T, Φ = dΨ0, k, F-kind) for the round-trip corpus.

    Even seeds: constant-top F with k = 0.  Odd seeds: Ψ0 is an arbitrary part on
    tower 0 plus tower-local parts on towers > k; then Φ(F*(σ)) lives in tower 0
    for the tail-top F, so c_Φ∘F* is constantly 0.
    """
    rng = random.Random(seed)
    width = width or rng.randint(1, 3)
    cap = {1: 3, 2: 3, 3: 2}[width]
    height = height if height is not None else rng.randint(1, cap)
    n = n or rng.choice([1, 1, 2])
    T = random_omega_system(rng, width, height, max_rank=2)
    X = T.to_inverse_system()
    if seed % 2 == 0 or width == 1:
        psi0 = random_cochain(rng, X, n - 1)
        return T, psi0, coboundary(X, psi0), 0, "constant-top"
    k = rng.randint(0, width - 2)
    psi0 = add_cochains(low_tower_cochain(rng, T, n - 1, 0),
                        tail_pullback_cochain(rng, T, n - 1, range(k + 1, width)))
    return T, psi0, coboundary(X, psi0), k, "tail-top"

"""Inverse systems of finitely generated abelian groups and their derived limits.

A group is Z^r modulo the row space of an integer relation matrix.  Homomorphisms
act on column vectors.  The cochain complex lives on strictly increasing tuples
(in the index's linear extension) with values in the term at the tuple's meet;
repeated-entry tuples carry 0.  ``lim_n`` works on a smaller homotopy-equivalent
complex (see ``reduction``); ``lim_n_dense`` keeps the full integer matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

from .order import FiniteQuasiOrder, OrderError, product_order
from .reduction import CyclicCochains, reduce_complex
from .snf import (
    SNF,
    EchelonLattice,
    Matrix,
    echelon_lattice,
    hstack,
    identity,
    kernel_vectors,
    matmul,
    matvec,
    smith_normal_form,
    transpose,
    zeros,
)


class StructureError(ValueError):
    pass


# groups ---------------------------------------------------------------------

@dataclass(frozen=True)
class FGAbelianGroup:
    ngens: int
    relations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        for r in self.relations:
            if len(r) != self.ngens:
                raise StructureError(f"relation {r} has {len(r)} entries, expected {self.ngens}")

    @classmethod
    def free(cls, r: int) -> "FGAbelianGroup":
        return cls(r)

    @classmethod
    def cyclic(cls, q: int) -> "FGAbelianGroup":
        return cls.diagonal([q])

    @classmethod
    def diagonal(cls, orders: Sequence[int]) -> "FGAbelianGroup":
        """⊕ Z/q_i, with q_i = 0 meaning a free summand."""
        r = len(orders)
        rels = tuple(tuple(q if j == i else 0 for j in range(r)) for i, q in enumerate(orders) if q)
        return cls(r, rels)

    @classmethod
    def zero(cls) -> "FGAbelianGroup":
        return cls(0)

    @cached_property
    def _lattice(self) -> SNF | None:
        if not self.relations:
            return None
        return smith_normal_form(transpose([list(r) for r in self.relations], self.ngens),
                                 transforms=frozenset({"U"}))

    def contains_relation(self, x: Sequence[int]) -> bool:
        """Is x zero in the group, i.e. in the row space of the relations?"""
        if not any(x):
            return True
        s = self._lattice
        if s is None:
            return False
        ux = matvec(s.U, list(x))
        diag = s.diagonal
        for i, v in enumerate(ux):
            d = diag[i] if i < len(diag) else 0
            if d == 0:
                if v:
                    return False
            elif v % d:
                return False
        return True

    def invariants(self) -> tuple[list[int], int]:
        """(torsion invariant factors > 1, free rank)."""
        if not self.relations:
            return [], self.ngens
        diag = smith_normal_form([list(r) for r in self.relations], transforms=frozenset()).diagonal
        nz = [d for d in diag if d]
        return [d for d in nz if d > 1], self.ngens - len(nz)

    def is_trivial(self) -> bool:
        tors, free = self.invariants()
        return not tors and free == 0

    def relation_columns(self) -> Matrix:
        return transpose([list(r) for r in self.relations], self.ngens)


def direct_sum(groups: Sequence[FGAbelianGroup]) -> FGAbelianGroup:
    total = sum(g.ngens for g in groups)
    rels = []
    off = 0
    for g in groups:
        for r in g.relations:
            rels.append(tuple([0] * off + list(r) + [0] * (total - off - g.ngens)))
        off += g.ngens
    return FGAbelianGroup(total, tuple(rels))


def compose(A: Matrix, B: Matrix, m: int, k: int) -> Matrix:
    """A·B as an m × k matrix, robust to zero inner or outer dimensions."""
    if m == 0:
        return []
    if k == 0 or not B:
        return zeros(m, k)
    return matmul(A, B)


def block_diag(blocks: Sequence[Matrix], shapes: Sequence[tuple[int, int]]) -> Matrix:
    rows = sum(s[0] for s in shapes)
    cols = sum(s[1] for s in shapes)
    out = zeros(rows, cols)
    r0 = c0 = 0
    for b, (m, n) in zip(blocks, shapes):
        for i in range(m):
            for j in range(n):
                out[r0 + i][c0 + j] = b[i][j]
        r0 += m
        c0 += n
    return out


@dataclass(frozen=True)
class GroupHom:
    matrix: tuple[tuple[int, ...], ...]
    source: FGAbelianGroup
    target: FGAbelianGroup

    def problems(self) -> list[str]:
        M = [list(r) for r in self.matrix]
        if len(M) != self.target.ngens or any(len(r) != self.source.ngens for r in M):
            return ["matrix shape does not match source/target generators"]
        out = []
        for rel in self.source.relations:
            img = matvec(M, list(rel))
            if not self.target.contains_relation(img):
                out.append(f"relation {list(rel)} maps to {img}, not a relation of the target")
        return out


def hom_problems(M: Matrix, source: FGAbelianGroup, target: FGAbelianGroup) -> list[str]:
    return GroupHom(tuple(map(tuple, M)), source, target).problems()


def maps_equal_mod(A: Matrix, B: Matrix, target: FGAbelianGroup) -> bool:
    cols = len(A[0]) if A else 0
    for j in range(cols):
        diff = [A[i][j] - B[i][j] for i in range(len(A))]
        if not target.contains_relation(diff):
            return False
    return True


# index sets -----------------------------------------------------------------

def meet_table(P: FiniteQuasiOrder) -> tuple[tuple[int, ...], ...] | None:
    """Greatest lower bounds (least in the linear extension among equivalents), or None."""
    n = P.size
    table = []
    for x in range(n):
        row = []
        for y in range(n):
            lower = [z for z in P.linear_extension if P.le(z, x) and P.le(z, y)]
            glb = next((z for z in lower if all(P.le(w, z) for w in lower)), None)
            if glb is None:
                return None
            row.append(glb)
        table.append(tuple(row))
    return tuple(table)


def with_meets(P: FiniteQuasiOrder) -> FiniteQuasiOrder:
    if P.meet is not None:
        return P
    tab = meet_table(P)
    if tab is None:
        raise StructureError("index order lacks meets")
    return FiniteQuasiOrder(P.leq, P.labels, tab, P.join, P.linear_extension)


# inverse systems ------------------------------------------------------------

@dataclass(frozen=True)
class InverseSystem:
    """Terms indexed by P and bonds[(x, y)]: term(y) -> term(x) for each x <= y."""

    index: FiniteQuasiOrder
    terms: tuple[FGAbelianGroup, ...]
    bonds: Mapping[tuple[int, int], tuple[tuple[int, ...], ...]]

    def __post_init__(self) -> None:
        if self.index.meet is None:
            object.__setattr__(self, "index", with_meets(self.index))
        if len(self.terms) != self.index.size:
            raise StructureError("one term per index element required")

    def bond(self, x: int, y: int) -> Matrix:
        try:
            return [list(r) for r in self.bonds[(x, y)]]
        except KeyError:
            raise StructureError(f"no bond for {x} <= {y}") from None

    def problems(self) -> list[str]:
        P = self.index
        out = list(f"index: {p}" for p in P.validate())
        for x, y in itertools.product(P.elements, repeat=2):
            if P.le(x, y) and (x, y) not in self.bonds:
                out.append(f"missing bond for {x} <= {y}")
            if not P.le(x, y) and (x, y) in self.bonds:
                out.append(f"bond given for incomparable pair {x}, {y}")
        if out:
            return out
        for x in P.elements:
            g = self.terms[x]
            if not maps_equal_mod(self.bond(x, x), identity(g.ngens), g):
                out.append(f"bond({x},{x}) is not the identity")
        for (x, y) in sorted(self.bonds):
            out += [f"bond({x},{y}): {p}" for p in hom_problems(self.bond(x, y), self.terms[y], self.terms[x])]
        for x, y, z in itertools.product(P.elements, repeat=3):
            if P.le(x, y) and P.le(y, z):
                lhs = compose(self.bond(x, y), self.bond(y, z), self.terms[x].ngens, self.terms[z].ngens)
                if not maps_equal_mod(lhs, self.bond(x, z), self.terms[x]):
                    out.append(f"bond({x},{y})∘bond({y},{z}) != bond({x},{z})")
        return out

    @classmethod
    def constant(cls, P: FiniteQuasiOrder, G: FGAbelianGroup) -> "InverseSystem":
        I = tuple(tuple(r) for r in identity(G.ngens))
        bonds = {(x, y): I for x in P.elements for y in P.elements if P.le(x, y)}
        return cls(P, tuple(G for _ in P.elements), bonds)

    @classmethod
    def zero(cls, P: FiniteQuasiOrder) -> "InverseSystem":
        return cls.constant(P, FGAbelianGroup.zero())


def direct_sum_system(systems: Sequence[InverseSystem], index: FiniteQuasiOrder | None = None) -> InverseSystem:
    if not systems:
        if index is None:
            raise StructureError("an empty sum needs an explicit index")
        return InverseSystem.zero(index)
    P = systems[0].index
    for S in systems[1:]:
        if S.index.leq != P.leq or S.index.linear_extension != P.linear_extension:
            raise StructureError("systems are indexed by different orders")
    terms = tuple(direct_sum([S.terms[x] for S in systems]) for x in P.elements)
    bonds = {}
    for key in systems[0].bonds:
        x, y = key
        blocks = [S.bond(x, y) for S in systems]
        shapes = [(S.terms[x].ngens, S.terms[y].ngens) for S in systems]
        bonds[key] = tuple(map(tuple, block_diag(blocks, shapes)))
    return InverseSystem(P, terms, bonds)


def pullback_tower(
    P: FiniteQuasiOrder,
    f: Sequence[int],
    groups: Sequence[FGAbelianGroup],
    steps: Sequence[Matrix],
) -> InverseSystem:
    """Pull a tower G_0 <- G_1 <- … back along a monotone f: P -> (len(groups), <=).

    ``steps[k]`` is the map G_{k+1} -> G_k.
    """
    h = len(groups)

    def tower_map(j: int, k: int) -> Matrix:
        M = identity(groups[k].ngens)
        for i in range(k - 1, j - 1, -1):
            M = compose(steps[i], M, groups[i].ngens, groups[k].ngens)
        return M

    cache = {(j, k): tower_map(j, k) for j in range(h) for k in range(j, h)}
    bonds = {}
    for x, y in itertools.product(P.elements, repeat=2):
        if P.le(x, y):
            if f[x] > f[y]:
                raise StructureError("f is not monotone")
            bonds[(x, y)] = tuple(map(tuple, cache[(f[x], f[y])]))
    return InverseSystem(P, tuple(groups[f[x]] for x in P.elements), bonds)


# truncated Ω-systems ----------------------------------------------------------

@dataclass(frozen=True)
class TruncatedOmegaSystem:
    """Towers G_{i,0} <- … <- G_{i,m} for i < width, and the lattice (m+1)^width."""

    width: int
    height: int
    groups: tuple[tuple[FGAbelianGroup, ...], ...]
    # steps[i][k]: G_{i,k+1} -> G_{i,k}
    steps: tuple[tuple[tuple[tuple[int, ...], ...], ...], ...]

    def problems(self) -> list[str]:
        out = []
        if len(self.groups) != self.width or len(self.steps) != self.width:
            return ["one tower per coordinate required"]
        for i in range(self.width):
            if len(self.groups[i]) != self.height + 1 or len(self.steps[i]) != self.height:
                out.append(f"tower {i} has the wrong height")
                continue
            for k in range(self.height):
                M = [list(r) for r in self.steps[i][k]]
                out += [f"π_{i},{k},{k + 1}: {p}"
                        for p in hom_problems(M, self.groups[i][k + 1], self.groups[i][k])]
        return out

    @cached_property
    def index(self) -> FiniteQuasiOrder:
        return product_order([self.height + 1] * self.width)

    @cached_property
    def points(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(self.height + 1), repeat=self.width))

    def tower_map(self, i: int, j: int, k: int) -> Matrix:
        """π_{i,j,k}: G_{i,k} -> G_{i,j} for j <= k."""
        M = identity(self.groups[i][k].ngens)
        for t in range(k - 1, j - 1, -1):
            step = [list(r) for r in self.steps[i][t]]
            M = compose(step, M, self.groups[i][t].ngens, self.groups[i][k].ngens)
        return M

    def offsets(self, x: Sequence[int]) -> list[int]:
        """Start of each tower's block inside G_x."""
        out, off = [], 0
        for i in range(self.width):
            out.append(off)
            off += self.groups[i][x[i]].ngens
        return out + [off]

    def tower_system(self, i: int) -> InverseSystem:
        pts = self.points
        steps = [[list(r) for r in s] for s in self.steps[i]]
        return pullback_tower(self.index, [p[i] for p in pts], list(self.groups[i]), steps)

    def towers(self) -> list[InverseSystem]:
        return [self.tower_system(i) for i in range(self.width)]

    def to_inverse_system(self) -> InverseSystem:
        P = self.index
        pts = self.points
        terms = tuple(direct_sum([self.groups[i][p[i]] for i in range(self.width)]) for p in pts)
        bonds = {}
        for a, b in itertools.product(P.elements, repeat=2):
            if P.le(a, b):
                x, y = pts[a], pts[b]
                blocks = [self.tower_map(i, x[i], y[i]) for i in range(self.width)]
                shapes = [(self.groups[i][x[i]].ngens, self.groups[i][y[i]].ngens) for i in range(self.width)]
                bonds[(a, b)] = tuple(map(tuple, block_diag(blocks, shapes)))
        return InverseSystem(P, terms, bonds)


# cochains -------------------------------------------------------------------

@dataclass
class CochainLayout:
    """Coordinates of C^n: one block per strictly increasing (n+1)-tuple."""

    system: InverseSystem
    n: int
    tuples: list[tuple[int, ...]] = field(init=False)
    offsets: dict[tuple[int, ...], int] = field(init=False)
    size: int = field(init=False)

    def __post_init__(self) -> None:
        P = self.system.index
        self.tuples = [tuple(c) for c in itertools.combinations(P.linear_extension, self.n + 1)] \
            if self.n >= 0 else []
        self.offsets = {}
        off = 0
        for t in self.tuples:
            self.offsets[t] = off
            off += self.system.terms[P.meet_of(t)].ngens
        self.size = off

    def meet(self, t: tuple[int, ...]) -> int:
        return self.system.index.meet_of(t)

    def block(self, vec: Sequence[int], t: tuple[int, ...]) -> list[int]:
        o = self.offsets[t]
        return list(vec[o:o + self.system.terms[self.meet(t)].ngens])

    def relation_matrix(self) -> Matrix:
        """Columns generating the relation lattice Λ_n of C^n."""
        cols = []
        for t in self.tuples:
            g = self.system.terms[self.meet(t)]
            o = self.offsets[t]
            for r in g.relations:
                col = [0] * self.size
                col[o:o + g.ngens] = r
                cols.append(col)
        return transpose(cols, self.size) if cols else [[] for _ in range(self.size)]


@dataclass
class AlternatingCochain:
    """Values on strictly increasing tuples; each value lies in the meet term."""

    degree: int
    values: dict[tuple[int, ...], list[int]]

    def vector(self, layout: CochainLayout) -> list[int]:
        out = [0] * layout.size
        for t, v in self.values.items():
            key = tuple(sorted(t, key=layout.system.index.rank))
            if key != tuple(t):
                raise StructureError(f"cochain keys must be strictly increasing tuples, got {t}")
            o = layout.offsets[key]
            out[o:o + len(v)] = v
        return out

    @classmethod
    def from_vector(cls, layout: CochainLayout, vec: Sequence[int]) -> "AlternatingCochain":
        return cls(layout.n, {t: layout.block(vec, t) for t in layout.tuples})

    def evaluate(self, t: Sequence[int], P: FiniteQuasiOrder) -> tuple[int, list[int]]:
        """Alternating evaluation: (sign, value at the sorted tuple); sign 0 on repeats."""
        if len(set(t)) < len(t):
            return 0, []
        perm = sorted(range(len(t)), key=lambda i: P.rank(t[i]))
        sign = _perm_sign(perm)
        key = tuple(t[i] for i in perm)
        return sign, self.values.get(key, [])


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def coboundary_matrix(X: InverseSystem, n: int) -> Matrix:
    """d^n as a (size C^{n+1}) × (size C^n) integer matrix; d^{-1} = 0."""
    src = CochainLayout(X, n)
    dst = CochainLayout(X, n + 1)
    M = zeros(dst.size, src.size)
    if n < 0:
        return M
    for p in dst.tuples:
        m = dst.meet(p)
        r0 = dst.offsets[p]
        for i in range(len(p)):
            face = p[:i] + p[i + 1:]
            mf = src.meet(face)
            B = X.bond(m, mf)
            c0 = src.offsets[face]
            sgn = -1 if i % 2 else 1
            for a, row in enumerate(B):
                for b, v in enumerate(row):
                    if v:
                        M[r0 + a][c0 + b] += sgn * v
    return M


def coboundary(X: InverseSystem, phi: AlternatingCochain) -> AlternatingCochain:
    """Direct (sparse) evaluation of the alternating coboundary sum."""
    P = X.index
    n = phi.degree
    if P.meet is None:
        raise StructureError("index order lacks meets")
    out: dict[tuple[int, ...], list[int]] = {}
    for p in itertools.combinations(P.linear_extension, n + 2):
        m = P.meet_of(p)
        acc = [0] * X.terms[m].ngens
        for i in range(n + 2):
            face = p[:i] + p[i + 1:]
            v = phi.values.get(face)
            if not v or not any(v):
                continue
            img = matvec(X.bond(m, P.meet_of(face)), v)
            sgn = -1 if i % 2 else 1
            for a, w in enumerate(img):
                acc[a] += sgn * w
        out[p] = acc
    return AlternatingCochain(n + 1, out)


def cochain_is_zero(X: InverseSystem, phi: AlternatingCochain) -> bool:
    P = X.index
    return all(X.terms[P.meet_of(t)].contains_relation(v) for t, v in phi.values.items())


# lim^n ----------------------------------------------------------------------

@dataclass
class LimResult:
    n: int
    torsion: list[int]
    free_rank: int
    # generator cocycles (as C^n vectors) with their orders (0 = infinite order)
    generators: list[tuple[list[int], int]]
    layout: CochainLayout
    _lattice: EchelonLattice | None = field(repr=False, default=None)
    _quot_snf: SNF | None = field(repr=False, default=None)
    _orders: list[int] = field(repr=False, default_factory=list)
    # C^n vector -> vector in the coordinates of the complex the quotient was taken in
    _to_complex: Callable[[Sequence[int]], list[int]] | None = field(repr=False, default=None)

    @property
    def invariant_factors(self) -> list[int]:
        """Torsion factors followed by one 0 per free summand."""
        return list(self.torsion) + [0] * self.free_rank

    def is_trivial(self) -> bool:
        return not self.torsion and self.free_rank == 0

    def group(self) -> FGAbelianGroup:
        return FGAbelianGroup.diagonal(self.invariant_factors)

    def coordinates(self, cocycle: Sequence[int]) -> list[int]:
        """Class of a cocycle in ⊕ Z/d_i (one entry per generator)."""
        if not self._orders:
            return []
        vec = self._to_complex(cocycle) if self._to_complex else list(cocycle)
        y = self._lattice.coordinates(vec)
        if y is None:
            raise StructureError("vector is not a cocycle")
        w = matvec(self._quot_snf.U, y)
        out = []
        for i, d in enumerate(self._full_diag()):
            if d == 1:
                continue
            out.append(w[i] % d if d else w[i])
        return out

    def _full_diag(self) -> list[int]:
        q = len(self._quot_snf.U)
        diag = self._quot_snf.diagonal
        return [diag[i] if i < len(diag) else 0 for i in range(q)]


@dataclass
class _Quotient:
    Z: EchelonLattice
    snf: SNF
    full: list[int]
    gens: list[tuple[list[int], int]]


def _cocycle_quotient(N: int, d_n: Matrix, R_next: Matrix, L_cols: list[list[int]]) -> _Quotient | None:
    """{x in Z^N : d_n x in col(R_next)} modulo the columns L_cols; None if Z = 0."""
    rows = len(d_n)
    if rows == 0:
        K_gens = identity(N)
    else:
        neg = [[-v for v in row] for row in R_next]
        A = hstack(d_n, neg, rows=rows)
        ncols = N + (len(R_next[0]) if R_next and R_next[0] else 0)
        K_gens = [v[:N] for v in kernel_vectors(A, ncols)]
    Z = echelon_lattice(K_gens, N)
    q = Z.rank
    if q == 0:
        return None
    Y_cols = [Z.coordinates(col) for col in L_cols]
    if any(y is None for y in Y_cols):
        raise AssertionError("a coboundary or relation is not a cocycle")
    Y = transpose(Y_cols, q) if Y_cols else [[] for _ in range(q)]
    sY = smith_normal_form(Y, len(Y_cols), frozenset({"U", "U_inv"}))
    diag = sY.diagonal
    full = [diag[i] if i < len(diag) else 0 for i in range(q)]
    B = Z.columns()
    gens = []
    for i, d in enumerate(full):
        if d == 1:
            continue
        coeff = [row[i] for row in sY.U_inv]
        gens.append((matvec(B, coeff), d))
    return _Quotient(Z, sY, full, gens)


def _lim_result(n: int, lay: CochainLayout, quot: _Quotient | None, gens, to_complex=None) -> LimResult:
    if quot is None:
        return LimResult(n, [], 0, [], lay)
    torsion = [d for d in quot.full if d > 1]
    free = sum(1 for d in quot.full if d == 0)
    return LimResult(n, torsion, free, gens, lay, quot.Z, quot.snf,
                     [d for d in quot.full if d != 1], to_complex)


def lim_n_dense(X: InverseSystem, n: int) -> LimResult:
    """lim^n from the full integer cochain matrices (small systems only)."""
    if n < 0:
        raise StructureError("n must be nonnegative")
    lay = CochainLayout(X, n)
    nxt = CochainLayout(X, n + 1)
    N = lay.size
    if N == 0:
        return LimResult(n, [], 0, [], lay)
    L_cols = transpose(hstack(lay.relation_matrix(), coboundary_matrix(X, n - 1) if n > 0 else [],
                              rows=N), 0)
    quot = _cocycle_quotient(N, coboundary_matrix(X, n) if nxt.size else [], nxt.relation_matrix(), L_cols)
    return _lim_result(n, lay, quot, quot.gens if quot else [])


def lim_n(X: InverseSystem, n: int) -> LimResult:
    """lim^n after cancelling every isomorphism entry of the cyclic cochain complex."""
    if n < 0:
        raise StructureError("n must be nonnegative")
    lay = CochainLayout(X, n)
    if lay.size == 0:
        return LimResult(n, [], 0, [], lay)
    cc = CyclicCochains(X)
    orders = [cc.layout(k)[2] for k in (n - 1, n, n + 1)]
    red = reduce_complex(orders, cc.coboundary(n - 1) if n > 0 else None, cc.coboundary(n))
    N = len(red.middle)
    if N == 0:
        return LimResult(n, [], 0, [], lay)
    rows = len(red.orders_next)
    rel_next = [c for c in range(rows) if red.orders_next[c]]
    R_next = [[red.orders_next[c] if r == c else 0 for c in rel_next] for r in range(rows)]
    L_cols = [[d if r == c else 0 for r in range(N)] for c, d in enumerate(red.orders_mid) if d]
    L_cols += transpose(red.d_prev, 0) if red.prev_cols else []
    quot = _cocycle_quotient(N, red.d_next, R_next, L_cols)
    if quot is None:
        return LimResult(n, [], 0, [], lay)
    gens = [(cc.from_cyclic(n, red.from_reduced(g), lay), d) for g, d in quot.gens]

    def to_complex(vec: Sequence[int]) -> list[int]:
        return red.to_reduced(cc.to_cyclic(n, vec, lay))

    return _lim_result(n, lay, quot, gens, to_complex)


# additivity ----------------------------------------------------------------

@dataclass
class AdditivityReport:
    n: int
    matrix: Matrix
    source_orders: list[int]
    target_orders: list[int]
    same_invariants: bool
    surjective: bool

    @property
    def is_isomorphism(self) -> bool:
        return self.same_invariants and self.surjective

    def describe(self) -> str:
        src = " ⊕ ".join(_group_str(d) for d in self.source_orders) or "0"
        dst = " ⊕ ".join(_group_str(d) for d in self.target_orders) or "0"
        return f"⊕ lim^{self.n} G_i = {src} -> lim^{self.n} G = {dst}; matrix {self.matrix}"


def _group_str(d: int) -> str:
    return "Z" if d == 0 else f"Z/{d}"


def _embed(parts: Sequence[InverseSystem], total: CochainLayout, idx: int, vec: Sequence[int]) -> list[int]:
    part_lay = CochainLayout(parts[idx], total.n)
    P = total.system.index
    out = [0] * total.size
    for t in total.tuples:
        m = P.meet_of(t)
        shift = sum(parts[j].terms[m].ngens for j in range(idx))
        o = total.offsets[t] + shift
        blk = part_lay.block(vec, t)
        out[o:o + len(blk)] = blk
    return out


def additivity_comparison(systems: Sequence[InverseSystem], n: int) -> AdditivityReport:
    """The map ⊕_i lim^n G_i -> lim^n (⊕_i G_i) induced by the block inclusions."""
    total = direct_sum_system(systems)
    L = lim_n(total, n)
    cols, src_orders = [], []
    for i, S in enumerate(systems):
        Li = lim_n(S, n)
        for g, d in Li.generators:
            cols.append(L.coordinates(_embed(systems, L.layout, i, g)))
            src_orders.append(d)
    tgt_orders = list(L._orders)
    k = len(tgt_orders)
    M = transpose(cols, k) if cols else [[] for _ in range(k)]
    same = FGAbelianGroup.diagonal(src_orders).invariants() == FGAbelianGroup.diagonal(tgt_orders).invariants()
    if k == 0:
        surj = True
    else:
        diag_cols = [[d if r == c else 0 for r in range(k)] for c, d in enumerate(tgt_orders) if d]
        stacked = hstack(M, transpose(diag_cols, k) if diag_cols else [], rows=k)
        width = len(stacked[0]) if stacked and stacked[0] else 0
        facs = smith_normal_form(stacked, width, frozenset()).diagonal if width else []
        surj = len([d for d in facs if d]) == k and all(d == 1 for d in facs if d)
    return AdditivityReport(n, M, src_orders, tgt_orders, same, surj)


def group_order_gcd(orders: Sequence[int]) -> int:
    return math.gcd(*orders) if orders else 0

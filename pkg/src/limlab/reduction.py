"""Sparse cochain complexes of cyclic groups and Gaussian elimination.

Every term G_x is rewritten in a Smith basis, so it becomes ⊕ Z/d_i with
d_i != 1 (0 = free summand).  A matrix entry c from a summand of order a to one
of order b is the homomorphism 1 ↦ c; it is stored reduced mod b.  An entry
between two summands of the same order that is a unit mod that order is an
isomorphism and can be cancelled: the complex is replaced by a homotopy
equivalent smaller one.  The chain maps both ways are recorded at the middle
degree so cocycles can be moved between the original and the reduced complex.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .snf import Matrix, matmul, smith_normal_form, transpose


# Smith bases of the terms ------------------------------------------------------

@dataclass(frozen=True)
class CyclicBasis:
    """G = Z^g / relations in the coordinates y = to_cyclic·x, x = from_cyclic·y."""

    orders: tuple[int, ...]
    to_cyclic: tuple[tuple[int, ...], ...]    # k × g
    from_cyclic: tuple[tuple[int, ...], ...]  # g × k


def coprime_parts(d: int, bound: int = 1 << 16) -> list[int]:
    """Pairwise coprime factors of d: prime powers below ``bound`` and one cofactor."""
    out = []
    p = 2
    while p < bound and p * p <= d:
        if d % p == 0:
            q = 1
            while d % p == 0:
                d //= p
                q *= p
            out.append(q)
        p += 1 if p == 2 else 2
    if d > 1:
        out.append(d)
    return out


def cyclic_basis(ngens: int, relations: Sequence[Sequence[int]]) -> CyclicBasis:
    """Smith basis with every torsion summand split into its coprime parts."""
    if ngens == 0:
        return CyclicBasis((), (), ())
    if not relations:
        I = tuple(tuple(int(i == j) for j in range(ngens)) for i in range(ngens))
        return CyclicBasis((0,) * ngens, I, I)
    cols = transpose([list(r) for r in relations], ngens)
    s = smith_normal_form(cols, len(relations), frozenset({"U", "U_inv"}))
    diag = s.diagonal
    orders, rows, lifts = [], [], []
    for i in range(ngens):
        d = diag[i] if i < len(diag) else 0
        if d == 1:
            continue
        col = [row[i] for row in s.U_inv]
        parts = coprime_parts(d) if d else [0]
        for q in parts:
            # CRT idempotent: 1 mod q, 0 mod d/q
            e = 1 if len(parts) == 1 else (d // q) * pow(d // q, -1, q)
            orders.append(q)
            rows.append(tuple(s.U[i]))
            lifts.append([e * v for v in col])
    return CyclicBasis(tuple(orders), tuple(rows),
                       tuple(tuple(l[j] for l in lifts) for j in range(ngens)))


def _reduce(v: int, m: int) -> int:
    return v % m if m else v


def _inverse(a: int, m: int) -> int | None:
    """Inverse of the endomorphism 1 ↦ a of Z/m (m = 0: Z), or None."""
    if m == 0:
        return a if a in (1, -1) else None
    if m == 1:
        return None
    try:
        return pow(a, -1, m)
    except ValueError:
        return None


# sparse matrices ----------------------------------------------------------------

class SparseMatrix:
    """Rows and columns kept in sync; entries reduced mod the row's order."""

    def __init__(self, row_orders: dict[int, int]) -> None:
        self.rows: dict[int, dict[int, int]] = {}
        self.cols: dict[int, dict[int, int]] = {}
        self.row_orders = row_orders

    def add(self, r: int, c: int, v: int) -> None:
        m = self.row_orders[r]
        row = self.rows.setdefault(r, {})
        new = _reduce(row.get(c, 0) + v, m)
        if new:
            row[c] = new
            self.cols.setdefault(c, {})[r] = new
        elif c in row:
            del row[c]
            del self.cols[c][r]

    def drop_row(self, r: int) -> None:
        for c in self.rows.pop(r, {}):
            del self.cols[c][r]

    def drop_col(self, c: int) -> None:
        for r in self.cols.pop(c, {}):
            del self.rows[r][c]

    def dense(self, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
        cidx = {c: j for j, c in enumerate(cols)}
        out = [[0] * len(cols) for _ in rows]
        for i, r in enumerate(rows):
            for c, v in self.rows.get(r, {}).items():
                out[i][cidx[c]] = v
        return out


def compress_rows(rows: list[list[int]], m: int, width: int) -> list[list[int]]:
    """Echelon generators of the row span in (Z/m)^width (m = 0: Z^width), at most width rows."""
    rows = [[_reduce(v, m) for v in r] for r in rows]
    rows = [r for r in rows if any(r)]
    out = []
    for c in range(width):
        live = [r for r in rows if r[c]]
        if not live:
            continue
        rest = [r for r in rows if not r[c]]
        piv = live[0]
        for r in live[1:]:
            # unimodular 2×2 step: piv keeps gcd, r gets 0 in column c
            a, b = piv[c], r[c]
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            new_piv = [_reduce(x * u + y * v, m) for u, v in zip(piv, r)]
            new_r = [_reduce(-bg * u + ag * v, m) for u, v in zip(piv, r)]
            piv = new_piv
            if any(new_r):
                rest.append(new_r)
        if any(piv):
            out.append(piv)
        rows = rest
    return out


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# the reduced complex around one degree -------------------------------------------

@dataclass
class ReducedComplex:
    """C^{n-1} -> C^n -> C^{n+1} after cancellation, plus the chain maps at degree n.

    ``orders_*`` list the orders of the surviving summands; ``d_prev`` and
    ``d_next`` are dense.  The rows of ``d_next`` are compressed per order, so
    they only generate the same constraints on C^n as the original rows.  ``to_reduced`` and ``from_reduced`` act on cyclic
    coordinates of C^n.
    """

    middle: list[int]
    orders_mid: list[int]
    orders_next: list[int]
    prev_cols: list[int]
    d_next: Matrix
    d_prev: Matrix
    mid_orders_all: dict[int, int]
    # f-steps: (v, [(z, coefficient)]) meaning y_z -= coefficient·y_v, in elimination order
    _f_steps: list[tuple[int, list[tuple[int, int]]]] = field(default_factory=list, repr=False)
    # g-steps: (u, a_inv, [(w, β_w)]) meaning x_u = -a_inv·Σ β_w x_w, in elimination order
    _g_steps: list[tuple[int, int, list[tuple[int, int]]]] = field(default_factory=list, repr=False)

    def to_reduced(self, y: dict[int, int]) -> list[int]:
        y = dict(y)
        for v, col in self._f_steps:
            yv = y.get(v, 0)
            if yv:
                for z, c in col:
                    y[z] = _reduce(y.get(z, 0) - c * yv, self.mid_orders_all[z])
        return [_reduce(y.get(u, 0), m) for u, m in zip(self.middle, self.orders_mid)]

    def from_reduced(self, x: Sequence[int]) -> dict[int, int]:
        out = {u: v for u, v in zip(self.middle, x) if v}
        for u, ainv, row in reversed(self._g_steps):
            s = sum(b * out.get(w, 0) for w, b in row)
            val = _reduce(-ainv * s, self.mid_orders_all[u])
            if val:
                out[u] = val
        return out


def _eliminate(D: SparseMatrix, row_orders: dict[int, int], col_orders: dict[int, int], on_pivot) -> None:
    """Cancel isomorphism entries of D greedily, sparsest columns first."""
    heap = [(len(col), c) for c, col in D.cols.items()]
    heapq.heapify(heap)
    while heap:
        size, u = heapq.heappop(heap)
        col = D.cols.get(u)
        if col is None:
            continue
        if len(col) != size:
            heapq.heappush(heap, (len(col), u))
            continue
        m = col_orders[u]
        best = None
        for v, a in col.items():
            if row_orders[v] != m:
                continue
            ainv = _inverse(a, m)
            if ainv is None:
                continue
            cost = len(D.rows[v])
            if best is None or cost < best[0]:
                best = (cost, v, ainv)
        if best is None:
            continue
        _, v, ainv = best
        beta = [(w, b) for w, b in D.rows[v].items() if w != u]
        gamma = [(z, g) for z, g in col.items() if z != v]
        on_pivot(u, v, ainv, beta, gamma)
        rows, cols = D.rows, D.cols
        for z, g in gamma:
            f = g * ainv
            mz = row_orders[z]
            rz = rows[z]
            for w, b in beta:
                new = rz.get(w, 0) - f * b
                if mz:
                    new %= mz
                if new:
                    rz[w] = new
                    cols[w][z] = new
                elif w in rz:
                    del rz[w]
                    del cols[w][z]
        touched = {w for w, _ in beta}
        D.drop_row(v)
        D.drop_col(u)
        for w in touched:
            if w in D.cols:
                heapq.heappush(heap, (len(D.cols[w]), w))


def reduce_complex(
    orders: Sequence[dict[int, int]],
    d_prev: SparseMatrix | None,
    d_next: SparseMatrix,
) -> ReducedComplex:
    """Cancel isomorphisms in d_next (C^n -> C^{n+1}), then in d_prev (C^{n-1} -> C^n).

    ``orders`` = (orders of C^{n-1}, C^n, C^{n+1}) keyed by coordinate id.
    """
    o_prev, o_mid, o_next = orders
    f_steps: list = []
    g_steps: list = []

    def pivot_next(u, v, ainv, beta, gamma):
        # u in C^n, v in C^{n+1}: u leaves the middle degree
        g_steps.append((u, ainv, beta))
        if d_prev is not None:
            d_prev.drop_row(u)

    def pivot_prev(u, v, ainv, beta, gamma):
        # u in C^{n-1}, v in C^n: v leaves the middle degree
        f_steps.append((v, [(z, g * ainv) for z, g in gamma]))
        d_next.drop_col(v)

    _eliminate(d_next, o_next, o_mid, pivot_next)
    if d_prev is not None:
        _eliminate(d_prev, o_mid, o_prev, pivot_prev)
    gone = {u for u, _, _ in g_steps} | {v for v, _ in f_steps}
    middle = [u for u in sorted(o_mid) if u not in gone]
    by_order: dict[int, list[int]] = {}
    for r, row in d_next.rows.items():
        if row:
            by_order.setdefault(o_next[r], []).append(r)
    d_rows, next_orders = [], []
    for m in sorted(by_order):
        kept = compress_rows(d_next.dense(sorted(by_order[m]), middle), m, len(middle))
        d_rows += kept
        next_orders += [m] * len(kept)
    prev_cols = sorted(c for c, col in d_prev.cols.items() if col) if d_prev is not None else []
    return ReducedComplex(
        middle, [o_mid[u] for u in middle], next_orders, prev_cols,
        d_rows,
        d_prev.dense(middle, prev_cols) if d_prev is not None else [[] for _ in middle],
        o_mid, f_steps, g_steps)


# cyclic cochain complexes of an inverse system ------------------------------------

class CyclicCochains:
    """C^k of an inverse system in Smith coordinates, one id per (tuple, summand)."""

    def __init__(self, X) -> None:
        self.X = X
        P = X.index
        self.P = P
        self.bases = [cyclic_basis(g.ngens, g.relations) for g in X.terms]
        self._bond_cache: dict[tuple[int, int], Matrix] = {}
        self._layouts: dict[int, tuple[list[tuple[int, ...]], dict[tuple[int, ...], int], dict[int, int]]] = {}

    def bond(self, x: int, y: int) -> Matrix:
        """The bond G_y -> G_x in Smith coordinates, entries reduced mod the target orders."""
        key = (x, y)
        if key not in self._bond_cache:
            bx, by = self.bases[x], self.bases[y]
            if not bx.orders or not by.orders:
                M = [[0] * len(by.orders) for _ in bx.orders]
            else:
                B = self.X.bond(x, y)
                M = matmul(matmul([list(r) for r in bx.to_cyclic], B), [list(r) for r in by.from_cyclic])
                M = [[_reduce(v, m) for v in row] for row, m in zip(M, bx.orders)]
            self._bond_cache[key] = M
        return self._bond_cache[key]

    def layout(self, k: int):
        """(tuples, offsets, orders by id) for C^k."""
        if k not in self._layouts:
            P = self.P
            tuples = [tuple(c) for c in itertools.combinations(P.linear_extension, k + 1)] if k >= 0 else []
            offsets, orders, off = {}, {}, 0
            for t in tuples:
                offsets[t] = off
                for i, d in enumerate(self.bases[P.meet_of(t)].orders):
                    orders[off + i] = d
                off += len(self.bases[P.meet_of(t)].orders)
            self._layouts[k] = (tuples, offsets, orders)
        return self._layouts[k]

    def coboundary(self, k: int) -> SparseMatrix:
        """d^k: C^k -> C^{k+1} as a sparse matrix on coordinate ids."""
        P = self.P
        _, src_off, _ = self.layout(k)
        tuples, dst_off, dst_orders = self.layout(k + 1)
        D = SparseMatrix(dst_orders)
        for p in tuples:
            m = P.meet_of(p)
            r0 = dst_off[p]
            for i in range(len(p)):
                face = p[:i] + p[i + 1:]
                B = self.bond(m, P.meet_of(face))
                c0 = src_off[face]
                sgn = -1 if i % 2 else 1
                for a, row in enumerate(B):
                    for b, v in enumerate(row):
                        if v:
                            D.add(r0 + a, c0 + b, sgn * v)
        return D

    def to_cyclic(self, k: int, vec: Sequence[int], layout) -> dict[int, int]:
        """Original C^k coordinates (per ``layout``) -> cyclic coordinate ids."""
        P = self.P
        _, off, orders = self.layout(k)
        out = {}
        for t in layout.tuples:
            basis = self.bases[P.meet_of(t)]
            if not basis.orders:
                continue
            blk = layout.block(vec, t)
            for i, row in enumerate(basis.to_cyclic):
                v = _reduce(sum(a * b for a, b in zip(row, blk)), basis.orders[i])
                if v:
                    out[off[t] + i] = v
        return out

    def from_cyclic(self, k: int, y: dict[int, int], layout) -> list[int]:
        """Cyclic coordinate ids -> a representative in original C^k coordinates."""
        P = self.P
        _, off, _ = self.layout(k)
        out = [0] * layout.size
        for t in layout.tuples:
            basis = self.bases[P.meet_of(t)]
            k_t = len(basis.orders)
            vals = [y.get(off[t] + i, 0) for i in range(k_t)]
            if not any(vals):
                continue
            o = layout.offsets[t]
            for a, row in enumerate(basis.from_cyclic):
                out[o + a] = sum(c * v for c, v in zip(row, vals))
        return out

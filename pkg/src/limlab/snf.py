"""Smith normal form over the integers, with exact transforms.

Matrices are lists of lists of Python ints.  ``smith_normal_form(M)`` returns
U, D, V (and their inverses) with U·M·V = D, D diagonal with d1 | d2 | … and
all d_i >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    if any(len(r) != inner for r in A):
        raise ValueError("shape mismatch in matmul")
    out = []
    for row in A:
        acc = [0] * cols
        for k, a in enumerate(row):
            if a:
                bk = B[k]
                for j in range(cols):
                    acc[j] += a * bk[j]
        out.append(acc)
    return out


def matvec(A: Matrix, x: list[int]) -> list[int]:
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def transpose(A: Matrix, ncols: int | None = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def hstack(*blocks: Matrix, rows: int | None = None) -> Matrix:
    """Concatenate column blocks; empty blocks (no columns) are skipped."""
    m = rows if rows is not None else max((len(b) for b in blocks), default=0)
    out = [[] for _ in range(m)]
    for b in blocks:
        if not b or not b[0]:
            continue
        if len(b) != m:
            raise ValueError("row mismatch in hstack")
        for i in range(m):
            out[i].extend(b[i])
    return out


def determinant(A: Matrix) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


@dataclass
class SNF:
    """U·M·V = D.  Transforms that were not requested are None."""

    U: Matrix | None
    D: Matrix
    V: Matrix | None
    U_inv: Matrix | None
    V_inv: Matrix | None

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    def __iter__(self):
        return iter((self.U, self.D, self.V))


ALL_TRANSFORMS = frozenset({"U", "V", "U_inv", "V_inv"})


def smith_normal_form(M: Matrix, ncols: int | None = None,
                      transforms: frozenset[str] | set[str] = ALL_TRANSFORMS) -> SNF:
    """Smallest-magnitude pivoting, ties broken by (row, column).

    ``transforms`` names the matrices to accumulate; skipping the ones a
    caller does not need saves most of the work on large inputs.
    """
    m = len(M)
    n = len(M[0]) if M else (ncols or 0)
    A = [list(map(int, row)) for row in M]
    U = identity(m) if "U" in transforms else None
    Ui = identity(m) if "U_inv" in transforms else None
    V = identity(n) if "V" in transforms else None
    Vi = identity(n) if "V_inv" in transforms else None

    def swap_rows(i: int, j: int) -> None:
        if i != j:
            A[i], A[j] = A[j], A[i]
            if U is not None:
                U[i], U[j] = U[j], U[i]
            if Ui is not None:
                for row in Ui:
                    row[i], row[j] = row[j], row[i]

    def swap_cols(i: int, j: int) -> None:
        if i != j:
            for row in A:
                row[i], row[j] = row[j], row[i]
            if V is not None:
                for row in V:
                    row[i], row[j] = row[j], row[i]
            if Vi is not None:
                Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_rows(src: int, updates: list[tuple[int, int]]) -> None:
        # row_dst += q * row_src for each (dst, q)
        b = A[src]
        for dst, q in updates:
            A[dst] = [x + q * y if y else x for x, y in zip(A[dst], b)]
        if U is not None:
            b = U[src]
            for dst, q in updates:
                U[dst] = [x + q * y if y else x for x, y in zip(U[dst], b)]
        if Ui is not None:
            for row in Ui:
                acc = row[src]
                for dst, q in updates:
                    v = row[dst]
                    if v:
                        acc -= q * v
                row[src] = acc

    def add_cols(src: int, updates: list[tuple[int, int]]) -> None:
        # col_dst += q * col_src for each (dst, q)
        for mat in (A, V):
            if mat is None:
                continue
            for row in mat:
                v = row[src]
                if v:
                    for dst, q in updates:
                        row[dst] += q * v
        if Vi is not None:
            a = Vi[src]
            for dst, q in updates:
                b = Vi[dst]
                Vi[src] = a = [x - q * y if y else x for x, y in zip(a, b)]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = A[t][t]
            ups = [(i, -(A[i][t] // p)) for i in range(t + 1, m) if A[i][t]]
            if ups:
                add_rows(t, ups)
            ups = [(j, -(A[t][j] // p)) for j in range(t + 1, n) if A[t][j]]
            if ups:
                add_cols(t, ups)
            cand = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
            cand += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
            if cand:
                # a remainder smaller than the pivot appeared; bring the smallest in
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % p), None)
            if bad is None:
                break
            add_rows(bad[0], [(t, 1)])
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if U is not None:
                U[t] = [-x for x in U[t]]
            if Ui is not None:
                for row in Ui:
                    row[t] = -row[t]
        t += 1
    return SNF(U, A, V, Ui, Vi)


def invariant_factors(M: Matrix, ncols: int | None = None) -> list[int]:
    """Nonzero diagonal entries of the Smith form (including 1s)."""
    return [d for d in smith_normal_form(M, ncols, frozenset()).diagonal if d]


def kernel_basis(A: Matrix, ncols: int) -> Matrix:
    """Columns spanning {x in Z^ncols : A x = 0}, as a ncols × k matrix."""
    if not A:
        return identity(ncols)
    s = smith_normal_form(A, ncols, frozenset({"V"}))
    r = s.rank
    return [row[r:] for row in s.V]


def column_lattice_basis(G: Matrix, nrows: int) -> Matrix:
    """A basis (as columns) of the lattice spanned by the columns of G."""
    if not G or not G[0]:
        return [[] for _ in range(nrows)]
    s = smith_normal_form(transpose(G), transforms=frozenset({"V_inv"}))
    # G^T = U^-1 D V^-1, so col(G) = col(V^-T D^T): row i of V^-1 scaled by d_i
    cols = [[d * x for x in s.V_inv[i]] for i, d in enumerate(s.diagonal) if d]
    return transpose(cols, nrows) if cols else [[] for _ in range(nrows)]


def solve_full_rank(B: Matrix, x: list[int], snf: SNF | None = None) -> list[int] | None:
    """The unique integer y with B y = x for B of full column rank, or None."""
    s = snf or smith_normal_form(B, transforms=frozenset({"U", "V"}))
    return _finish_solve(B, s, matvec(s.U, x))


def _finish_solve(B: Matrix, s: SNF, ux: list[int]) -> list[int] | None:
    q = len(B[0]) if B and B[0] else 0
    z = []
    for i in range(len(ux)):
        d = s.D[i][i] if i < q else 0
        if d == 0:
            if ux[i] != 0:
                return None
            if i < q:
                z.append(0)
            continue
        if ux[i] % d:
            return None
        z.append(ux[i] // d)
    return matvec(s.V, z[:q])


# echelon lattices ---------------------------------------------------------

@dataclass
class EchelonLattice:
    """A lattice basis in row-echelon form: pivots strictly increase, pivot entries > 0."""

    dim: int
    rows: list[list[int]]
    pivots: list[int]

    @property
    def rank(self) -> int:
        return len(self.rows)

    def columns(self) -> Matrix:
        return transpose(self.rows, self.dim) if self.rows else [[] for _ in range(self.dim)]

    def coordinates(self, x: Sequence[int]) -> list[int] | None:
        """The unique y with Σ y_i rows[i] = x, or None when x is outside the lattice."""
        x = list(x)
        y = []
        start = 0
        for row, p in zip(self.rows, self.pivots):
            if any(x[start:p]):
                return None
            start = p
            v = x[p]
            if v % row[p]:
                return None
            q = v // row[p]
            y.append(q)
            if q:
                for j in range(p, self.dim):
                    r = row[j]
                    if r:
                        x[j] -= q * r
        return y if not any(x[start:]) else None


def _echelon(vectors: list[list[int]], stop: int) -> tuple[list[list[int]], list[int], list[list[int]]]:
    """Integer row reduction on the first ``stop`` coordinates.

    Returns (pivot rows, pivot columns, leftover rows vanishing on those coordinates).
    """
    pool = [list(v) for v in vectors if any(v)]
    rows, pivots = [], []
    for col in range(stop):
        active = [r for r in pool if r[col]]
        if not active:
            continue
        rest = [r for r in pool if not r[col]]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            p = active[0]
            pc = p[col]
            nxt = [p]
            for r in active[1:]:
                q = r[col] // pc
                r = [a - q * b if b else a for a, b in zip(r, p)]
                if r[col]:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            active = nxt
        p = active[0]
        if p[col] < 0:
            p = [-a for a in p]
        rows.append(p)
        pivots.append(col)
        pool = rest
    return rows, pivots, pool


def echelon_lattice(vectors: Iterable[Sequence[int]], dim: int) -> EchelonLattice:
    """Row-echelon basis of the lattice spanned by ``vectors`` in Z^dim."""
    rows, pivots, _ = _echelon([list(v) for v in vectors], dim)
    return EchelonLattice(dim, rows, pivots)


def kernel_vectors(A: Matrix, ncols: int) -> list[list[int]]:
    """A basis of {x in Z^ncols : A x = 0}, by reducing [A^T | I]."""
    m = len(A)
    if m == 0:
        return identity(ncols)
    aug = [[A[i][j] for i in range(m)] + [int(k == j) for k in range(ncols)] for j in range(ncols)]
    _, _, left = _echelon(aug, m)
    return [r[m:] for r in left]

"""Finite quasi-orders, tuple spaces and n-cofinal functions.

Elements of an order are always referred to by their integer index; labels
are carried only for display and serialization.  Two elements are equal iff
their indices are equal, even when they are equivalent under ``leq``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

Tuple_ = tuple[int, ...]


class OrderError(ValueError):
    """Raised when an order, tuple or function violates a structural requirement."""


class DomainError(OrderError):
    pass


class PreconditionError(OrderError):
    pass


@dataclass(frozen=True)
class FiniteQuasiOrder:
    """A reflexive-transitive relation on ``range(size)``.

    ``leq`` is a tuple of rows of booleans.  ``meet``/``join`` are optional
    binary operation tables.  ``linear_extension`` lists every element once and
    puts x before y whenever x < y strictly.
    """

    leq: tuple[tuple[bool, ...], ...]
    labels: tuple[str, ...] = ()
    meet: tuple[tuple[int, ...], ...] | None = None
    join: tuple[tuple[int, ...], ...] | None = None
    linear_extension: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.leq)
        if any(len(row) != n for row in self.leq):
            raise OrderError("leq must be a square relation")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))
        if len(self.labels) != n:
            raise OrderError("one label per element required")
        if not self.linear_extension:
            object.__setattr__(self, "linear_extension", _default_extension(self.leq))
        rank = [0] * n
        for pos, x in enumerate(self.linear_extension):
            rank[x] = pos
        object.__setattr__(self, "_rank", tuple(rank))

    # construction -----------------------------------------------------

    @classmethod
    def from_relation(
        cls,
        size: int,
        pairs: Iterable[tuple[int, int]],
        labels: Sequence[str] | None = None,
        close: bool = True,
    ) -> "FiniteQuasiOrder":
        """Build the order generated by ``pairs`` (x <= y); reflexive-transitive closure if ``close``."""
        rel = [[i == j for j in range(size)] for i in range(size)]
        for x, y in pairs:
            rel[x][y] = True
        if close:
            for k in range(size):
                for i in range(size):
                    if rel[i][k]:
                        row_k = rel[k]
                        row_i = rel[i]
                        for j in range(size):
                            if row_k[j]:
                                row_i[j] = True
        return cls(tuple(tuple(r) for r in rel), tuple(labels) if labels else ())

    @classmethod
    def chain(cls, size: int) -> "FiniteQuasiOrder":
        rel = tuple(tuple(i <= j for j in range(size)) for i in range(size))
        tab = tuple(tuple(min(i, j) for j in range(size)) for i in range(size))
        jtab = tuple(tuple(max(i, j) for j in range(size)) for i in range(size))
        return cls(rel, meet=tab, join=jtab)

    @classmethod
    def antichain(cls, size: int) -> "FiniteQuasiOrder":
        return cls(tuple(tuple(i == j for j in range(size)) for i in range(size)))

    # basic queries ----------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.leq)

    @property
    def elements(self) -> range:
        return range(len(self.leq))

    def le(self, x: int, y: int) -> bool:
        return self.leq[x][y]

    def lt(self, x: int, y: int) -> bool:
        return self.leq[x][y] and not self.leq[y][x]

    def rank(self, x: int) -> int:
        """Position of ``x`` in the linear extension."""
        return self._rank[x]  # type: ignore[attr-defined]

    def sort_key(self, t: Sequence[int]) -> tuple[int, ...]:
        return tuple(self._rank[x] for x in t)  # type: ignore[attr-defined]

    def maximal_elements(self) -> list[int]:
        return [x for x in self.linear_extension
                if all(not self.lt(x, y) for y in self.elements)]

    def maximum(self) -> int | None:
        """Least (in linear extension) element above everything, if any."""
        for x in self.linear_extension:
            if all(self.leq[y][x] for y in self.elements):
                return x
        return None

    def is_cofinal(self, subset: Iterable[int]) -> bool:
        s = list(subset)
        return all(any(self.leq[x][u] for u in s) for x in self.elements)

    def is_monotone_map(self, other: "FiniteQuasiOrder", f: Sequence[int] | Mapping[int, int]) -> bool:
        return all(other.le(f[x], f[y]) for x in self.elements for y in self.elements if self.le(x, y))

    def validate(self) -> list[str]:
        """All violations of the quasi-order / quasi-lattice axioms."""
        problems: list[str] = []
        n = self.size
        for x in range(n):
            if not self.leq[x][x]:
                problems.append(f"leq not reflexive at {self.labels[x]}")
        for x, y, z in itertools.product(range(n), repeat=3):
            if self.leq[x][y] and self.leq[y][z] and not self.leq[x][z]:
                problems.append(
                    f"leq not transitive: {self.labels[x]}<={self.labels[y]}<={self.labels[z]}")
        if sorted(self.linear_extension) != list(range(n)):
            problems.append("linear_extension is not a permutation of the elements")
        else:
            for x in range(n):
                for y in range(n):
                    if self.lt(x, y) and self.rank(x) > self.rank(y):
                        problems.append(
                            f"linear_extension puts {self.labels[y]} before {self.labels[x]}")
        if self.meet is not None:
            for x, y in itertools.product(range(n), repeat=2):
                m = self.meet[x][y]
                if not (self.leq[m][x] and self.leq[m][y]):
                    problems.append(f"meet({x},{y})={m} is not a lower bound")
                for z in range(n):
                    if self.leq[z][x] and self.leq[z][y] and not self.leq[z][m]:
                        problems.append(f"meet({x},{y})={m} is not greatest: {z}")
                        break
        if self.join is not None:
            for x, y in itertools.product(range(n), repeat=2):
                j = self.join[x][y]
                if not (self.leq[x][j] and self.leq[y][j]):
                    problems.append(f"join({x},{y})={j} is not an upper bound")
                for z in range(n):
                    if self.leq[x][z] and self.leq[y][z] and not self.leq[j][z]:
                        problems.append(f"join({x},{y})={j} is not least: {z}")
                        break
        return problems

    def meet_of(self, t: Iterable[int]) -> int:
        if self.meet is None:
            raise OrderError("order has no meet operation")
        it = iter(t)
        acc = next(it)
        for x in it:
            acc = self.meet[acc][x]
        return acc

    def join_of(self, t: Iterable[int]) -> int:
        if self.join is None:
            raise OrderError("order has no join operation")
        it = iter(t)
        acc = next(it)
        for x in it:
            acc = self.join[acc][x]
        return acc

    def restrict(self, subset: Sequence[int]) -> "FiniteQuasiOrder":
        """Suborder on ``subset`` (re-indexed in the given order)."""
        sub = list(subset)
        rel = tuple(tuple(self.leq[a][b] for b in sub) for a in sub)
        ext = tuple(sorted(range(len(sub)), key=lambda i: self.rank(sub[i])))
        return FiniteQuasiOrder(rel, tuple(self.labels[a] for a in sub), linear_extension=ext)


def _default_extension(leq: Sequence[Sequence[bool]]) -> tuple[int, ...]:
    # strict predecessors first, ties by index
    n = len(leq)
    below = [sum(1 for y in range(n) if leq[y][x] and not leq[x][y]) for x in range(n)]
    return tuple(sorted(range(n), key=lambda x: (below[x], x)))


def product_order(sizes: Sequence[int], k: int = 0) -> FiniteQuasiOrder:
    """Functions x: len(sizes) -> N with x(i) < sizes[i], ordered coordinatewise on i >= k.

    For k = 0 this is the product lattice; for k > 0 it is the graded quasi-order
    comparing only the tail coordinates.  Meet and join are coordinatewise
    min/max in every case.
    """
    points = list(itertools.product(*[range(s) for s in sizes]))
    index = {p: i for i, p in enumerate(points)}
    rel = tuple(
        tuple(all(p[i] <= q[i] for i in range(k, len(sizes))) for q in points) for p in points)
    meet = tuple(
        tuple(index[tuple(min(a, b) for a, b in zip(p, q))] for q in points) for p in points)
    join = tuple(
        tuple(index[tuple(max(a, b) for a, b in zip(p, q))] for q in points) for p in points)
    ext = tuple(sorted(range(len(points)),
                       key=lambda i: (sum(points[i][k:]), points[i][k:], points[i])))
    labels = tuple("".join(map(str, p)) if max(sizes, default=0) <= 10 else ",".join(map(str, p))
                   for p in points)
    return FiniteQuasiOrder(rel, labels, meet, join, ext)


@dataclass(frozen=True)
class GradedOrderFamily:
    """Truncated integer sequences of length ``length`` with values below ``height``.

    ``order(k)`` is the quasi-order ``x <=_k y`` iff x(i) <= y(i) for k <= i < length.
    """

    length: int
    height: int

    def points(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(self.height), repeat=self.length))

    def order(self, k: int = 0) -> FiniteQuasiOrder:
        if not 0 <= k < max(self.length, 1):
            raise OrderError("grade k must satisfy 0 <= k < length")
        return product_order([self.height] * self.length, k)

    def leq_k(self, x: Sequence[int], y: Sequence[int], k: int) -> bool:
        return all(x[i] <= y[i] for i in range(k, self.length))


# tuple spaces ---------------------------------------------------------

def is_increasing(P: FiniteQuasiOrder, t: Sequence[int]) -> bool:
    return all(P.le(a, b) for a, b in zip(t, t[1:]))


def is_strictly_increasing(P: FiniteQuasiOrder, t: Sequence[int]) -> bool:
    return all(P.lt(a, b) for a, b in zip(t, t[1:]))


def enumerate_increasing_tuples(
    P: FiniteQuasiOrder, n: int, among: Iterable[int] | None = None, strict: bool = False
) -> list[Tuple_]:
    """Weakly (or strictly) increasing n-tuples, lexicographic in the linear extension."""
    if n < 1:
        raise OrderError("tuple length must be positive; the null tuple is implicit")
    pool = [x for x in P.linear_extension if among is None or x in set(among)]
    step = P.lt if strict else P.le
    out: list[Tuple_] = []

    def extend(prefix: list[int]) -> None:
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for x in pool:
            if not prefix or step(prefix[-1], x):
                prefix.append(x)
                extend(prefix)
                prefix.pop()

    extend([])
    return out


def all_tuples(P: FiniteQuasiOrder, n: int, among: Iterable[int] | None = None) -> list[Tuple_]:
    pool = [x for x in P.linear_extension if among is None or x in set(among)]
    return [tuple(t) for t in itertools.product(pool, repeat=n)]


SPACES = ("weak", "strict", "all")


def tuple_space(
    P: FiniteQuasiOrder, n: int, space: str = "weak", among: Iterable[int] | None = None
) -> list[Tuple_]:
    """All tuples of length 1..n in the chosen space, shortest first."""
    if space not in SPACES:
        raise OrderError(f"unknown tuple space {space!r}")
    among = None if among is None else list(among)
    out: list[Tuple_] = []
    for k in range(1, n + 1):
        if space == "all":
            out.extend(all_tuples(P, k, among))
        else:
            out.extend(enumerate_increasing_tuples(P, k, among, strict=(space == "strict")))
    return out


def is_subsequence(x: Sequence[int], y: Sequence[int]) -> bool:
    """``x ⊴ y``: x is obtained from y by deleting coordinates."""
    it = iter(y)
    return all(any(a == b for b in it) for a in x)


def deletions(t: Tuple_) -> list[Tuple_]:
    """Distinct tuples obtained by deleting exactly one coordinate."""
    seen: dict[Tuple_, None] = {}
    for i in range(len(t)):
        seen.setdefault(t[:i] + t[i + 1:], None)
    return list(seen)


def proper_subsequences(t: Tuple_) -> list[Tuple_]:
    """Distinct nonempty proper subsequences of ``t``."""
    seen: dict[Tuple_, None] = {}
    for r in range(1, len(t)):
        for idx in itertools.combinations(range(len(t)), r):
            seen.setdefault(tuple(t[i] for i in idx), None)
    return list(seen)


Chain = tuple[Tuple_, ...]


def chains_ending_at(top: Tuple_) -> list[Chain]:
    """All ⊴-increasing sequences (σ(1), …, σ(len top)) with σ(len top) = top."""
    if len(top) == 1:
        return [(top,)]
    out: list[Chain] = []
    for sub in deletions(top):
        for ch in chains_ending_at(sub):
            out.append(ch + (top,))
    return out


def enumerate_chains(
    P: FiniteQuasiOrder, n: int, among: Iterable[int] | None = None, space: str = "weak"
) -> list[Chain]:
    """P⟦n⟧: ⊴-increasing sequences of tuples of lengths 1..n from the tuple space."""
    if n < 1:
        raise OrderError("chain length must be positive")
    if space == "all":
        tops = all_tuples(P, n, among)
    else:
        tops = enumerate_increasing_tuples(P, n, among, strict=(space == "strict"))
    out: list[Chain] = []
    for top in tops:
        out.extend(chains_ending_at(top))
    return out


# cofinal functions ----------------------------------------------------

@dataclass(frozen=True)
class CofinalFunction:
    """A table from tuples of length <= arity to elements.

    ``restriction`` (Υ) limits the coordinates allowed in domain tuples;
    ``space`` selects weakly increasing, strictly increasing or all tuples.
    """

    arity: int
    table: Mapping[Tuple_, int]
    restriction: frozenset[int] | None = None
    space: str = "weak"

    def __call__(self, t: Sequence[int]) -> int:
        return self.table[tuple(t)]

    def domain(self, P: FiniteQuasiOrder) -> list[Tuple_]:
        among = None if self.restriction is None else sorted(self.restriction)
        return tuple_space(P, self.arity, self.space, among)

    def star(self, sigma: Chain) -> Tuple_:
        return tuple(self.table[s] for s in sigma)

    @classmethod
    def from_rule(
        cls,
        P: FiniteQuasiOrder,
        arity: int,
        rule: Callable[[Tuple_], int],
        restriction: Iterable[int] | None = None,
        space: str = "weak",
    ) -> "CofinalFunction":
        r = None if restriction is None else frozenset(restriction)
        among = None if r is None else sorted(r)
        table = {t: rule(t) for t in tuple_space(P, arity, space, among)}
        return cls(arity, table, r, space)


@dataclass(frozen=True)
class Coloring:
    """A map from (arity)-tuples to colors; ``palette`` lists the allowed colors."""

    arity: int
    table: Mapping[Tuple_, object]
    palette: tuple = ()

    def __call__(self, t: Sequence[int]) -> object:
        return self.table[tuple(t)]

    @classmethod
    def from_rule(
        cls,
        P: FiniteQuasiOrder,
        arity: int,
        rule: Callable[[Tuple_], object],
        palette: Sequence[object] | None = None,
        space: str = "weak",
    ) -> "Coloring":
        if space == "all":
            tops = all_tuples(P, arity)
        else:
            tops = enumerate_increasing_tuples(P, arity, strict=(space == "strict"))
        table = {t: rule(t) for t in tops}
        if palette is None:
            palette = sorted(set(table.values()), key=repr)
        return cls(arity, table, tuple(palette))

    @classmethod
    def constant(cls, P: FiniteQuasiOrder, arity: int, color: object = 0) -> "Coloring":
        return cls.from_rule(P, arity, lambda t: color, (color,))

    def problems(self, P: FiniteQuasiOrder) -> list[str]:
        """Missing tuples and colors outside the palette."""
        out = [f"coloring undefined on {t}" for t in enumerate_increasing_tuples(P, self.arity)
               if t not in self.table]
        if self.palette:
            pal = set(self.palette)
            out += [f"color {v!r} of {t} outside the palette" for t, v in self.table.items()
                    if v not in pal]
        return out


@dataclass
class CofinalityReport:
    singleton_violations: list[tuple[int, int]] = field(default_factory=list)
    monotonicity_violations: list[tuple[Tuple_, Tuple_]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.singleton_violations and not self.monotonicity_violations

    def lines(self, P: FiniteQuasiOrder | None = None) -> list[str]:
        out = [f"not x <= F(x): x={x}, F(x)={v}" for x, v in self.singleton_violations]
        out += [f"{a} ⊴ {b} but F{a} !<= F{b}" for a, b in self.monotonicity_violations]
        return out


def _check_domain(P: FiniteQuasiOrder, F: CofinalFunction) -> set[Tuple_]:
    dom = set(F.domain(P))
    extra = [t for t in F.table if t not in dom]
    if extra:
        raise DomainError(f"tuple {extra[0]} lies outside the declared domain")
    missing = [t for t in dom if t not in F.table]
    if missing:
        raise DomainError(f"F is not total on its domain: missing {min(missing, key=P.sort_key)}")
    return dom


def check_n_cofinal(P: FiniteQuasiOrder, F: CofinalFunction, strict: bool = False) -> CofinalityReport:
    """List every violation of the two cofinality laws on F's declared domain.

    With ``strict`` the ⊴ law is tightened to F(x) < F(y) for x ◁ y.
    """
    dom = _check_domain(P, F)
    rep = CofinalityReport()
    for t in sorted(dom, key=lambda t: (len(t), P.sort_key(t))):
        v = F.table[t]
        if len(t) == 1 and not P.le(t[0], v):
            rep.singleton_violations.append((t[0], v))
        for sub in proper_subsequences(t):
            if sub not in dom:
                continue
            w = F.table[sub]
            bad = not P.lt(w, v) if strict else not P.le(w, v)
            if bad:
                rep.monotonicity_violations.append((sub, t))
    return rep


def apply_F_star(F: CofinalFunction, sigma: Chain) -> Tuple_:
    for s in sigma:
        if s not in F.table:
            raise DomainError(f"chain stage {s} outside the domain of F")
    return F.star(sigma)


# witness transport ----------------------------------------------------

def dominating_retraction(P: FiniteQuasiOrder, upsilon: Iterable[int]) -> dict[int, int]:
    """A monotone g: P -> Υ with x <= g(x) and g = id on Υ.

    Candidates are tried in linear-extension order, so the result is the
    lexicographically least such map.  Raises PreconditionError when Υ is not
    cofinal or when no monotone choice exists.
    """
    U = set(upsilon)
    if not P.is_cofinal(U):
        raise PreconditionError("Υ is not cofinal")
    order = list(P.linear_extension)
    cands = {x: [x] if x in U else [u for u in order if u in U and P.le(x, u)] for x in order}
    g: dict[int, int] = {}

    def ok(x: int, v: int) -> bool:
        for y, w in g.items():
            if P.le(x, y) and not P.le(v, w):
                return False
            if P.le(y, x) and not P.le(w, v):
                return False
        return True

    def solve(i: int) -> bool:
        if i == len(order):
            return True
        x = order[i]
        for v in cands[x]:
            if ok(x, v):
                g[x] = v
                if solve(i + 1):
                    return True
                del g[x]
        return False

    if not solve(0):
        raise PreconditionError("no monotone dominating retraction onto Υ exists")
    return g


def extend_partial_witness(
    P: FiniteQuasiOrder,
    coloring: "Callable[[Tuple_], object]",
    F: CofinalFunction,
) -> CofinalFunction:
    """Extend a witness defined on a cofinal Υ to all of P by precomposing with a retraction.

    ``F.restriction`` is Υ; F must be the identity on Υ's singletons.
    """
    if F.restriction is None:
        return F
    U = F.restriction
    for u in U:
        if F.table.get((u,)) != u:
            raise PreconditionError(f"F does not extend the identity on Υ at {u}")
    g = dominating_retraction(P, U)
    table = {}
    for t in tuple_space(P, F.arity, F.space):
        image = tuple(g[x] for x in t)
        if image not in F.table:
            raise PreconditionError(f"retraction sends {t} outside F's domain")
        table[t] = F.table[image]
    out = CofinalFunction(F.arity, table, None, F.space)
    colors = {coloring(out.star(s)) for s in enumerate_chains(P, F.arity, space=F.space)}
    if len(colors) > 1:
        raise PreconditionError("input witness is not monochromatic")
    return out


def transfer_witness(
    P: FiniteQuasiOrder,
    Q: FiniteQuasiOrder,
    f: Sequence[int] | Mapping[int, int],
    F_P: CofinalFunction,
    g: Mapping[int, int] | None = None,
) -> CofinalFunction:
    """Push a witness on P forward along a monotone f: P -> Q with cofinal image.

    The output is q⃗ ↦ f(F_P(g(q⃗))) where g is a monotone section with
    f(g(q)) >= q; if ``g`` is not supplied the least such section is used.
    """
    if not P.is_monotone_map(Q, f):
        raise PreconditionError("f is not monotone")
    if not Q.is_cofinal({f[p] for p in P.elements}):
        raise PreconditionError("f does not have cofinal image")
    if g is None:
        g = _monotone_section(P, Q, f)
    else:
        for q in Q.elements:
            if not Q.le(q, f[g[q]]):
                raise PreconditionError(f"section fails f(g(q)) >= q at q={q}")
    table = {}
    for t in tuple_space(Q, F_P.arity, F_P.space):
        image = tuple(g[q] for q in t)
        if image not in F_P.table:
            raise PreconditionError(f"section sends {t} outside the domain of F_P")
        table[t] = f[F_P.table[image]]
    return CofinalFunction(F_P.arity, table, None, F_P.space)


def _monotone_section(P: FiniteQuasiOrder, Q: FiniteQuasiOrder, f) -> dict[int, int]:
    order = list(Q.linear_extension)
    cands = {q: [p for p in P.linear_extension if Q.le(q, f[p])] for q in order}
    g: dict[int, int] = {}

    def solve(i: int) -> bool:
        if i == len(order):
            return True
        q = order[i]
        for p in cands[q]:
            if all((not Q.le(q, r) or P.le(p, g[r])) and (not Q.le(r, q) or P.le(g[r], p))
                   for r in g):
                g[q] = p
                if solve(i + 1):
                    return True
                del g[q]
        return False

    if not solve(0):
        raise PreconditionError("no monotone section g with f(g(q)) >= q exists")
    return g


def iter_orders(size: int) -> Iterator[FiniteQuasiOrder]:
    """Every naturally labelled partial order on ``range(size)``.

    Element j may only sit above elements i < j, so every isomorphism class
    appears at least once.
    """

    def grow(rel: list[list[bool]]) -> Iterator[list[list[bool]]]:
        k = len(rel)
        if k == size:
            yield rel
            return
        for bits in range(1 << k):
            down = [i for i in range(k) if bits >> i & 1]
            if any(rel[a][b] and a not in down for b in down for a in range(k)):
                continue
            new = [row + [False] for row in rel]
            for i in down:
                new[i][k] = True
            new.append([False] * k + [True])
            yield from grow(new)

    for rel in grow([]):
        yield FiniteQuasiOrder(tuple(tuple(r) for r in rel))

"""Nerve and Ex levels of a finite quasi-order, and the simplicial PH check.

An Ex face of level n is a monotone map from the nonempty subsets of
{0..n} (ordered by inclusion) into P.  It is stored as the tuple of its values
on ``subset_index(n)``, i.e. subsets sorted by size and then lexicographically.

Finite reading of spanning: S spans T when every weakly
increasing (n+1)-tuple over T occurs as the vertex tuple
(s({0}), …, s({n})) of some s in S; S is neat when any two faces (of any
members, in any dimension) with the same vertex tuple are the same map.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable, Iterable, Sequence

from .order import (
    CofinalFunction,
    Coloring,
    FiniteQuasiOrder,
    OrderError,
    Tuple_,
    enumerate_increasing_tuples,
    is_strictly_increasing,
    tuple_space,
)
from .search import INCONCLUSIVE, REFUTED, WITNESS, SearchOutcome, cofinal_subsets

ExFace = tuple[int, ...]


@lru_cache(maxsize=None)
def subset_index(n: int) -> tuple[tuple[int, ...], ...]:
    """Nonempty subsets of {0..n}, by size then lexicographic."""
    return tuple(s for r in range(1, n + 2) for s in itertools.combinations(range(n + 1), r))


@lru_cache(maxsize=None)
def _position(n: int) -> dict[tuple[int, ...], int]:
    return {s: i for i, s in enumerate(subset_index(n))}


@dataclass(frozen=True)
class NerveLevel:
    order: FiniteQuasiOrder
    n: int
    faces: tuple[Tuple_, ...]

    def nondegenerate(self) -> list[Tuple_]:
        return [f for f in self.faces if is_strictly_increasing(self.order, f)]


@dataclass(frozen=True)
class ExNerveLevel:
    order: FiniteQuasiOrder
    n: int
    faces: tuple[ExFace, ...]

    def by_vertex_tuple(self) -> dict[Tuple_, list[ExFace]]:
        out: dict[Tuple_, list[ExFace]] = {}
        for f in self.faces:
            out.setdefault(vertex_tuple(f, self.n), []).append(f)
        return out


def nerve_level(P: FiniteQuasiOrder, n: int) -> NerveLevel:
    if n < 0:
        raise OrderError("nerve levels start at 0")
    return NerveLevel(P, n, tuple(enumerate_increasing_tuples(P, n + 1)))


def ex_nerve_level(P: FiniteQuasiOrder, n: int) -> ExNerveLevel:
    """Every monotone map (Δ_n, ⊆) -> P, in lexicographic order of value rank."""
    if n < 0:
        raise OrderError("Ex levels start at 0")
    subsets = subset_index(n)
    pos = _position(n)
    below = [[pos[s[:i] + s[i + 1:]] for i in range(len(s))] if len(s) > 1 else [] for s in subsets]
    values = list(P.linear_extension)
    out: list[ExFace] = []
    cur: list[int] = []

    def grow(i: int) -> None:
        if i == len(subsets):
            out.append(tuple(cur))
            return
        for v in values:
            if all(P.le(cur[j], v) for j in below[i]):
                cur.append(v)
                grow(i + 1)
                cur.pop()

    grow(0)
    return ExNerveLevel(P, n, tuple(out))


def vertex_tuple(face: ExFace, n: int) -> Tuple_:
    return tuple(face[:n + 1])


def vertex_set(face: Sequence[int], n: int | None = None) -> frozenset[int]:
    """Entries of a nerve face, or singleton images of an Ex face when ``n`` is given."""
    if n is None:
        return frozenset(face)
    return frozenset(face[:n + 1])


def restrict_face(face: ExFace, n: int, J: Sequence[int]) -> ExFace:
    """The face of an Ex face along the inclusion {0..len(J)-1} -> J."""
    pos = _position(n)
    k = len(J) - 1
    return tuple(face[pos[tuple(J[i] for i in s)]] for s in subset_index(k))


def is_monotone_face(P: FiniteQuasiOrder, face: ExFace, n: int) -> bool:
    pos = _position(n)
    for s in subset_index(n):
        for i in range(len(s)) if len(s) > 1 else ():
            if not P.le(face[pos[s[:i] + s[i + 1:]]], face[pos[s]]):
                return False
    return True


def maximal_chain_values(face: ExFace, n: int) -> list[Tuple_]:
    """Values along every maximal ⊆-chain {π0} ⊂ {π0,π1} ⊂ … of the face."""
    pos = _position(n)
    out = []
    for perm in itertools.permutations(range(n + 1)):
        out.append(tuple(face[pos[tuple(sorted(perm[:k]))]] for k in range(1, n + 2)))
    return out


def all_subfaces(face: ExFace, n: int) -> list[tuple[Tuple_, ExFace]]:
    """(vertex tuple, face) for every face of every dimension."""
    out = []
    for r in range(1, n + 2):
        for J in itertools.combinations(range(n + 1), r):
            f = restrict_face(face, n, J)
            out.append((vertex_tuple(f, r - 1), f))
    return out


@dataclass
class SpanReport:
    ok: bool
    missing: list[Tuple_] = field(default_factory=list)
    neatness: list[tuple[Tuple_, ExFace, ExFace]] = field(default_factory=list)


def spans_neatly(
    S: Iterable[ExFace], T: Iterable[int], n: int, P: FiniteQuasiOrder, reading: str = "tuples"
) -> SpanReport:
    """Spanning and neatness of S over T.

    ``reading="tuples"`` asks for every weakly increasing (n+1)-tuple over T as
    a vertex tuple and compares faces by vertex tuple; ``reading="sets"`` asks
    for every (n+1)-element subset of T as a vertex set and compares faces by
    vertex set.
    """
    S = list(S)
    T = sorted(set(T), key=P.rank)
    rep = SpanReport(True)
    if reading == "tuples":
        key = lambda vt: vt  # noqa: E731
        targets = enumerate_increasing_tuples(P, n + 1, T)
    elif reading == "sets":
        key = lambda vt: frozenset(vt)  # noqa: E731
        targets = [tuple(c) for c in itertools.combinations(T, n + 1)]
    else:
        raise OrderError(f"unknown reading {reading!r}")
    have = {key(vertex_tuple(s, n)) for s in S}
    rep.missing = [t for t in targets if key(t) not in have]
    seen: dict = {}
    for s in S:
        for vt, f in all_subfaces(s, n):
            k = (len(vt), key(vt))
            prev = seen.setdefault(k, f)
            if prev != f:
                rep.neatness.append((vt, prev, f))
    rep.ok = not rep.missing and not rep.neatness
    return rep


# witness interconversion ----------------------------------------------------

def F_to_S(F: CofinalFunction, P: FiniteQuasiOrder, n: int, T: Iterable[int]) -> list[ExFace]:
    """One Ex face per weakly increasing (n+1)-tuple t over T: A ↦ F(t restricted to A)."""
    out = []
    for t in enumerate_increasing_tuples(P, n + 1, sorted(T)):
        out.append(tuple(F.table[tuple(t[i] for i in A)] for A in subset_index(n)))
    return out


def S_to_F(S: Iterable[ExFace], P: FiniteQuasiOrder, n: int, T: Iterable[int]) -> CofinalFunction:
    """Read the neat family S as a table on tuples over T (partial witness on T)."""
    table: dict[Tuple_, int] = {}
    for s in S:
        for vt, f in all_subfaces(s, n):
            table.setdefault(vt, f[-1])
    T = frozenset(T)
    dom = tuple_space(P, n + 1, "weak", sorted(T))
    return CofinalFunction(n + 1, {t: table[t] for t in dom}, T, "weak")


# the simplicial engine --------------------------------------------------------

def simplicial_ph_check(
    P: FiniteQuasiOrder, c: Coloring, n: int, budget: int | None = 200_000
) -> SearchOutcome:
    """Search for cofinal T and a c-monochromatic S ⊆ (Ex NP)_n neatly spanning T.

    Runs directly over Ex faces: for each target tuple a face with that vertex
    tuple is chosen, subject to neatness against every face chosen so far and
    to one color along all maximal chains.
    """
    t0 = time.perf_counter()
    if c.arity != n + 1:
        raise OrderError(f"coloring arity {c.arity} != n+1")
    level = ex_nerve_level(P, n).by_vertex_tuple()
    cert: dict = {"engine": "simplicial", "n": n, "nodes": 0, "subproblems": 0}
    exhausted = False
    for T in cofinal_subsets(P):
        cert["subproblems"] += 1
        targets = enumerate_increasing_tuples(P, n + 1, T)
        cands = [level.get(t, []) for t in targets]
        chosen: list[ExFace] = []
        registry: dict[Tuple_, ExFace] = {}
        nodes = 0
        state = {"color": None}
        info = {}
        for t in targets:
            for f in level.get(t, []):
                if f not in info:
                    info[f] = (all_subfaces(f, n), {c.table[v] for v in maximal_chain_values(f, n)})

        class _Out(Exception):
            pass

        def place(i: int) -> bool:
            nonlocal nodes
            if i == len(targets):
                return True
            for f in cands[i]:
                nodes += 1
                if budget is not None and nodes > budget:
                    raise _Out
                subs, colors = info[f]
                if len(colors) != 1:
                    continue
                col = next(iter(colors))
                if state["color"] is not None and col != state["color"]:
                    continue
                added = []
                clash = False
                for vt, g in subs:
                    prev = registry.get(vt)
                    if prev is None:
                        registry[vt] = g
                        added.append(vt)
                    elif prev != g:
                        clash = True
                        break
                if not clash:
                    set_here = state["color"] is None
                    state["color"] = col
                    chosen.append(f)
                    if place(i + 1):
                        return True
                    chosen.pop()
                    if set_here:
                        state["color"] = None
                for vt in added:
                    del registry[vt]
            return False

        try:
            ok = place(0)
        except _Out:
            exhausted = True
            ok = False
        cert["nodes"] += nodes
        if ok:
            S = list(chosen)
            rep = spans_neatly(S, T, n, P)
            if not rep.ok:
                raise AssertionError(f"simplicial engine produced a non-neat family: {rep}")
            cert["T"] = list(T)
            cert["S"] = [list(s) for s in S]
            cert["elapsed_s"] = round(time.perf_counter() - t0, 6)
            return SearchOutcome(WITNESS, S_to_F(S, P, n, T), state["color"], cert)
    cert["elapsed_s"] = round(time.perf_counter() - t0, 6)
    return SearchOutcome(INCONCLUSIVE if exhausted else REFUTED, certificate=cert)

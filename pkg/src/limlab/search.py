"""Backtracking search for monochromatic cofinal witnesses.

Three modes are supported:

``total``
    F is defined on every weakly increasing tuple of length <= n+1 over the
    domain (default: the whole order).
``partial-on-cofinal``
    for each cofinal Υ, largest first, F is defined on tuples over Υ and is the
    identity on Υ's singletons.  A found witness is pushed to all of P with
    a monotone retraction when one exists.
``strictly-increasing``
    F lives on strictly increasing tuples over the domain, strictly increases
    along ◁, and escalates: max(x) < max(y) forces F(x) < F(y).  This is the
    finite reading of the configurations F(α) < F(β) < F(α,β) < … that an
    unbounded order supplies for free.
"""

from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .colorings import LayeredInjectionSystem
from .order import (
    Chain,
    CofinalFunction,
    Coloring,
    FiniteQuasiOrder,
    OrderError,
    PreconditionError,
    Tuple_,
    chains_ending_at,
    check_n_cofinal,
    enumerate_chains,
    extend_partial_witness,
    is_strictly_increasing,
    proper_subsequences,
    tuple_space,
)

log = logging.getLogger(__name__)

MODES = ("total", "partial-on-cofinal", "strictly-increasing")
WITNESS, REFUTED, INCONCLUSIVE = "witness-found", "refuted-by-exhaustion", "inconclusive"


@dataclass(frozen=True)
class PHInstance:
    order: FiniteQuasiOrder
    coloring: Coloring
    n: int
    mode: str = "total"
    domain: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise OrderError(f"unknown mode {self.mode!r}")
        if self.n < 0:
            raise OrderError("level n must be nonnegative")
        if self.coloring.arity != self.n + 1:
            raise OrderError(f"coloring arity {self.coloring.arity} != n+1 = {self.n + 1}")

    @property
    def space(self) -> str:
        return "strict" if self.mode == "strictly-increasing" else "weak"

    def problems(self) -> list[str]:
        return self.order.validate() + self.coloring.problems(self.order)


@dataclass
class SearchOutcome:
    status: str
    witness: CofinalFunction | None = None
    color: Hashable = None
    certificate: dict = field(default_factory=dict)
    # the witness on Υ before extension, when the mode is partial-on-cofinal
    partial: CofinalFunction | None = None

    @property
    def found(self) -> bool:
        return self.status == WITNESS


# strictify -------------------------------------------------------------------

def strictify(c: Coloring, P: FiniteQuasiOrder) -> Coloring:
    """d(x) = (c(x), b(x)) with b(x) = 1 iff x is strictly increasing."""
    table = {t: (v, int(is_strictly_increasing(P, t))) for t, v in c.table.items()}
    palette = tuple((v, b) for v in (c.palette or sorted(set(c.table.values()), key=repr))
                    for b in (0, 1))
    return Coloring(c.arity, table, palette)


def project_color(color: tuple | None) -> Hashable:
    # None is the color of a vacuous witness (no chains to color)
    return None if color is None else color[0]


# core backtracking ---------------------------------------------------------

@dataclass
class _Stats:
    nodes: int = 0
    prunes_law: int = 0
    prunes_color: int = 0
    exhausted: bool = False

    def merge(self, other: "_Stats") -> None:
        self.nodes += other.nodes
        self.prunes_law += other.prunes_law
        self.prunes_color += other.prunes_color
        self.exhausted = self.exhausted or other.exhausted


class _Budget(Exception):
    pass


class _TableSearch:
    """Assign F-values to ``dom`` in a ⊴-topological order, pruning as early as possible."""

    def __init__(
        self,
        P: FiniteQuasiOrder,
        coloring: Coloring,
        top_len: int,
        dom: Sequence[Tuple_],
        fixed: dict[Tuple_, int],
        strict: bool,
        escalate: bool,
        require_color: Hashable = None,
    ) -> None:
        self.P = P
        self.coloring = coloring
        self.strict = strict
        self.escalate = escalate
        self.require_color = require_color
        domset = set(dom)
        self.order = sorted(dom, key=lambda t: (max(P.rank(x) for x in t), len(t), P.sort_key(t)))
        self.pos = {t: i for i, t in enumerate(self.order)}
        self.fixed = fixed
        self.subs = {t: [s for s in proper_subsequences(t) if s in domset] for t in self.order}
        self.chains = {t: chains_ending_at(t) if len(t) == top_len else [] for t in self.order}
        self.maxrank = {t: max(P.rank(x) for x in t) for t in self.order}
        values = list(P.linear_extension)
        self.base = {}
        for t in self.order:
            if t in fixed:
                self.base[t] = [fixed[t]]
            elif len(t) == 1:
                self.base[t] = [v for v in values if P.le(t[0], v)]
            else:
                self.base[t] = values

    def candidates(self, t: Tuple_, F: dict[Tuple_, int]) -> list[int]:
        P = self.P
        out = []
        for v in self.base[t]:
            ok = True
            for s in self.subs[t]:
                w = F[s]
                if not (P.lt(w, v) if self.strict else P.le(w, v)):
                    ok = False
                    break
            if ok and self.escalate:
                mt = self.maxrank[t]
                for y, w in F.items():
                    my = self.maxrank[y]
                    if (my < mt and not P.lt(w, v)) or (my > mt and not P.lt(v, w)):
                        ok = False
                        break
            if ok:
                out.append(v)
        return out

    def color_of(self, F: dict[Tuple_, int], chain: Chain) -> Hashable:
        img = tuple(F[s] for s in chain)
        try:
            return self.coloring.table[img]
        except KeyError:
            raise OrderError(f"coloring undefined on F*-image {img}") from None

    def run_branch(self, root_value: int, budget: int | None) -> tuple[dict | None, Hashable, _Stats]:
        stats = _Stats()
        F: dict[Tuple_, int] = {}
        order = self.order
        state = {"color": self.require_color}

        def assign(i: int) -> bool:
            if i == len(order):
                return True
            t = order[i]
            # root candidates were computed against the empty table
            cands = [root_value] if i == 0 else self.candidates(t, F)
            if not cands:
                stats.prunes_law += 1
            for v in cands:
                stats.nodes += 1
                if budget is not None and stats.nodes > budget:
                    raise _Budget
                F[t] = v
                set_here = False
                good = True
                for ch in self.chains[t]:
                    col = self.color_of(F, ch)
                    if state["color"] is None:
                        state["color"] = col
                        set_here = True
                    elif col != state["color"]:
                        good = False
                        break
                if good and assign(i + 1):
                    return True
                if not good:
                    stats.prunes_color += 1
                if set_here:
                    state["color"] = None
                del F[t]
            return False

        try:
            found = assign(0)
        except _Budget:
            stats.exhausted = True
            return None, None, stats
        if found:
            color = state["color"]
            return dict(F), color, stats
        return None, None, stats

    def run(self, budget: int | None, workers: int = 1):
        if not self.order:
            return {}, self.require_color, _Stats(), [], False
        roots = self.candidates(self.order[0], {})
        if workers > 1 and len(roots) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda r: self.run_branch(r, budget), roots))
        else:
            results = []
            for r in roots:
                res = self.run_branch(r, budget)
                results.append(res)
                if res[0] is not None:
                    break
        total = _Stats()
        for table, color, st in results:
            total.merge(st)
            if table is not None:
                return table, color, total, roots, False
        return None, None, total, roots, total.exhausted


# public engine -------------------------------------------------------------

def _domain(inst: PHInstance, among: Iterable[int] | None) -> list[Tuple_]:
    return tuple_space(inst.order, inst.n + 1, inst.space, among)


def cofinal_subsets(P: FiniteQuasiOrder) -> list[tuple[int, ...]]:
    """Cofinal subsets of P, largest first, then lexicographic in the linear extension."""
    elems = list(P.linear_extension)
    out = []
    for r in range(len(elems), 0, -1):
        for sub in itertools.combinations(elems, r):
            if P.is_cofinal(sub):
                out.append(tuple(sub))
    return out


def find_witness(
    inst: PHInstance,
    budget: int | None = 200_000,
    workers: int = 1,
    require_color: Hashable = None,
) -> SearchOutcome:
    P = inst.order
    t0 = time.perf_counter()
    cert: dict = {"mode": inst.mode, "n": inst.n, "nodes": 0, "prunes_law": 0,
                  "prunes_color": 0, "subproblems": 0}
    strict = inst.mode == "strictly-increasing"

    def finish(status: str, **kw) -> SearchOutcome:
        cert["elapsed_s"] = round(time.perf_counter() - t0, 6)
        out = SearchOutcome(status, certificate=cert, **kw)
        if out.witness is not None:
            rep = verify_witness(inst, out.partial or out.witness)
            if not rep.ok:
                raise AssertionError(f"search produced an invalid witness: {rep.lines()[:3]}")
        return out

    if inst.mode == "total":
        top = P.maximum()
        if top is not None:
            table = {t: top for t in _domain(inst, inst.domain)}
            color = inst.coloring.table.get((top,) * (inst.n + 1))
            if require_color is None or color == require_color:
                cert["shortcut"] = "constant maximum"
                F = CofinalFunction(inst.n + 1, table, _restr(inst.domain), "weak")
                return finish(WITNESS, witness=F, color=color)
        bases: list[tuple[tuple[int, ...] | None, dict]] = [(inst.domain, {})]
    elif inst.mode == "partial-on-cofinal":
        if inst.domain is not None:
            raise OrderError("partial-on-cofinal mode ranges over cofinal subsets of the whole order")
        bases = [(ups, {(u,): u for u in ups}) for ups in cofinal_subsets(P)]
    else:
        bases = [(inst.domain, {})]

    any_exhausted = False
    for among, fixed in bases:
        dom = _domain(inst, among)
        eng = _TableSearch(P, inst.coloring, inst.n + 1, dom, fixed, strict,
                           escalate=strict, require_color=require_color)
        table, color, st, _, exhausted = eng.run(budget, workers)
        cert["subproblems"] += 1
        cert["nodes"] += st.nodes
        cert["prunes_law"] += st.prunes_law
        cert["prunes_color"] += st.prunes_color
        any_exhausted = any_exhausted or exhausted or st.exhausted
        if table is None:
            continue
        F = CofinalFunction(inst.n + 1, table, _restr(among), inst.space)
        if inst.mode == "partial-on-cofinal":
            cert["upsilon"] = list(among)
            try:
                full = extend_partial_witness(P, inst.coloring, F)
                cert["extended"] = True
                return finish(WITNESS, witness=full, color=color, partial=F)
            except PreconditionError as exc:
                cert["extended"] = False
                cert["extension_failure"] = str(exc)
                return finish(WITNESS, witness=F, color=color, partial=F)
        return finish(WITNESS, witness=F, color=color)
    if any_exhausted:
        cert["budget"] = budget
        return finish(INCONCLUSIVE)
    return finish(REFUTED)


def _restr(among) -> frozenset | None:
    return None if among is None else frozenset(among)


# verification -------------------------------------------------------------

@dataclass
class WitnessReport:
    cofinality: list[str] = field(default_factory=list)
    escalation: list[str] = field(default_factory=list)
    structure: list[str] = field(default_factory=list)
    color_violations: list[tuple[Chain, Hashable]] = field(default_factory=list)
    color: Hashable = None
    chains_checked: int = 0

    @property
    def ok(self) -> bool:
        return not (self.cofinality or self.escalation or self.structure or self.color_violations)

    def lines(self) -> list[str]:
        out = list(self.structure) + list(self.cofinality) + list(self.escalation)
        out += [f"chain {ch} has color {c!r} != {self.color!r}" for ch, c in self.color_violations]
        return out


def verify_witness(inst: PHInstance, F: CofinalFunction, require_color: Hashable = None) -> WitnessReport:
    """Check both cofinality laws and monochromaticity over every chain of F's domain."""
    P = inst.order
    rep = WitnessReport()
    strict = inst.mode == "strictly-increasing"
    if F.arity != inst.n + 1:
        rep.structure.append(f"F has arity {F.arity}, expected {inst.n + 1}")
        return rep
    if F.space != inst.space:
        rep.structure.append(f"F lives on {F.space} tuples, mode needs {inst.space}")
    if inst.mode == "partial-on-cofinal" and F.restriction is not None:
        if not P.is_cofinal(F.restriction):
            rep.structure.append("Υ is not cofinal")
        for u in sorted(F.restriction):
            if F.table.get((u,)) != u:
                rep.structure.append(f"F is not the identity on Υ at {u}")
    elif inst.domain is not None and F.restriction != frozenset(inst.domain):
        rep.structure.append("F's domain differs from the instance domain")
    try:
        cof = check_n_cofinal(P, F, strict=strict)
    except OrderError as exc:
        rep.structure.append(str(exc))
        return rep
    rep.cofinality = cof.lines()
    if strict:
        items = sorted(F.table.items(), key=lambda kv: (len(kv[0]), P.sort_key(kv[0])))
        for (x, fx), (y, fy) in itertools.product(items, repeat=2):
            if P.rank(max(x, key=P.rank)) < P.rank(max(y, key=P.rank)) and not P.lt(fx, fy):
                rep.escalation.append(f"max{x} < max{y} but F{x}={fx} !< F{y}={fy}")
    among = None if F.restriction is None else sorted(F.restriction)
    target = require_color
    for ch in enumerate_chains(P, F.arity, among, F.space):
        img = F.star(ch)
        col = inst.coloring.table.get(img, ("undefined", img))
        rep.chains_checked += 1
        if target is None:
            target = col
        elif col != target:
            rep.color_violations.append((ch, col))
    rep.color = target
    return rep


# refutation of the injective coloring at n = 1 --------------------------------

@dataclass(frozen=True)
class RefutationCertificate:
    N: int
    scanned: int
    monochromatic: int
    examples: tuple = ()

    @property
    def ok(self) -> bool:
        return self.monochromatic == 0


def refute_injective_coloring(N: int, sys: LayeredInjectionSystem) -> RefutationCertificate:
    """Scan every α<β<N and F(α) < F(β) < F(α,β) < N with α <= F(α), β <= F(β).

    The two chain colors are f_{F(α,β)}(F(α)) and f_{F(α,β)}(F(β)); injectivity of
    f makes them differ, and the certificate counts any configuration where they
    do not.
    """
    if sys.depth < 1 or sys.sizes[1] < N:
        raise OrderError(f"level 1 must have at least N={N} points")
    scanned = mono = 0
    bad = []
    for a, b in itertools.combinations(range(N), 2):
        for fa in range(a, N):
            for fb in range(max(b, fa + 1), N):
                for fab in range(fb + 1, N):
                    scanned += 1
                    if sys.h(1, fab, fa) == sys.h(1, fab, fb):
                        mono += 1
                        if len(bad) < 5:
                            bad.append((a, b, fa, fb, fab))
    return RefutationCertificate(N, scanned, mono, tuple(bad))


def brute_force_satisfiable(inst: PHInstance) -> bool:
    """Enumerate every table on the mode's domain without pruning (tiny instances only)."""
    P = inst.order
    if inst.mode == "partial-on-cofinal":
        bases = [(ups, {(u,): u for u in ups}) for ups in cofinal_subsets(P)]
    else:
        bases = [(inst.domain, {})]
    for among, fixed in bases:
        dom = _domain(inst, among)
        free = [t for t in dom if t not in fixed]
        for values in itertools.product(list(P.elements), repeat=len(free)):
            table = dict(fixed)
            table.update(zip(free, values))
            F = CofinalFunction(inst.n + 1, table, _restr(among), inst.space)
            if verify_witness(inst, F).ok:
                return True
    return False

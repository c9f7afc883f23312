"""Concrete colorings on finite linear orders.

* the recursive colorings c̃_m built from layered injections h_β,
* the cone non-constancy replay and the cycle extraction from F-images,
* minimal walks ρ₂ and the metric d along a finite C-sequence,
* the homogeneous-set witness used in the positive (large cardinal) case.

Levels are ``range(size)``; faces at level m are frozensets of m+1 ints.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .order import (
    Coloring,
    CofinalFunction,
    FiniteQuasiOrder,
    OrderError,
    Tuple_,
    proper_subsequences,
    tuple_space,
)
from .simplicial import (
    ComplexError,
    SimplicialComplex,
    Z2Chain,
    barycentric_subdivision,
    boundary,
    connon_decompose,
    fkey,
    is_n_cycle,
    simplex,
    sorted_face,
)


class UniverseTooSmall(ValueError):
    """A construction ran past the end of a finite stand-in for a cardinal."""

    def __init__(self, message: str, required: int | None = None) -> None:
        super().__init__(message)
        self.required = required


# layered injections ----------------------------------------------------

@dataclass(frozen=True)
class LayeredInjectionSystem:
    """Levels L_0..L_depth (as sizes) and injections h_β for β in L_m, m >= 1.

    ``injections[m][β]`` is a tuple of length β listing h_β(0), …, h_β(β-1)
    inside L_{m-1}.  Level 1 injections play the role of the maps f_β into
    the palette L_0.
    """

    sizes: tuple[int, ...]
    injections: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def depth(self) -> int:
        return len(self.sizes) - 1

    def h(self, m: int, beta: int, alpha: int) -> int:
        return self.injections[m][beta][alpha]

    def h_inverse(self, m: int, beta: int, value: int) -> int:
        return self.injections[m][beta].index(value)

    def problems(self) -> list[str]:
        out: list[str] = []
        if len(self.injections) != len(self.sizes):
            return ["one injection table per level required (level 0 empty)"]
        if self.injections and self.injections[0]:
            out.append("level 0 carries no injections")
        for m in range(1, len(self.sizes)):
            table = self.injections[m]
            if len(table) != self.sizes[m]:
                out.append(f"level {m}: expected {self.sizes[m]} injections, got {len(table)}")
                continue
            for beta, img in enumerate(table):
                if len(img) != beta:
                    out.append(f"h_{beta} at level {m} must have domain of size {beta}")
                if len(set(img)) != len(img):
                    out.append(f"h_{beta} at level {m} is not injective")
                if any(not 0 <= v < self.sizes[m - 1] for v in img):
                    out.append(f"h_{beta} at level {m} leaves L_{m - 1}")
        return out

    @classmethod
    def random(cls, sizes: Sequence[int], seed: int) -> "LayeredInjectionSystem":
        """Seeded injections: for each β take a shuffled prefix of L_{m-1}."""
        rng = random.Random(seed)
        sizes = tuple(sizes)
        tables: list[tuple[tuple[int, ...], ...]] = [()]
        for m in range(1, len(sizes)):
            if sizes[m - 1] < sizes[m] - 1:
                raise UniverseTooSmall(
                    f"level {m - 1} has {sizes[m - 1]} points; injections from level {m} need {sizes[m] - 1}",
                    sizes[m] - 1)
            row = []
            for beta in range(sizes[m]):
                pool = list(range(sizes[m - 1]))
                rng.shuffle(pool)
                row.append(tuple(pool[:beta]))
            tables.append(tuple(row))
        return cls(sizes, tuple(tables))


def c_tilde(sys: LayeredInjectionSystem, m: int, face: Iterable[int]) -> int:
    """c̃_m of an (m+1)-element subset of L_m."""
    raw = list(face)
    f = sorted(set(raw))
    if len(f) != len(raw) or len(f) != m + 1:
        raise OrderError(f"c̃_{m} needs {m + 1} distinct elements, got {raw}")
    if any(not 0 <= x < sys.sizes[m] for x in f):
        raise OrderError(f"face {f} leaves level {m}")
    while m > 0:
        beta = f[-1]
        f = sorted(sys.h(m, beta, a) for a in f[:-1])
        m -= 1
    return f[0]


@dataclass(frozen=True)
class ConeWitness:
    faces: tuple[tuple[int, ...], tuple[int, ...]]
    colors: tuple[int, int]
    # components chosen at each peel, outermost first
    trail: tuple[tuple[int, tuple], ...] = ()


def cone_nonconstancy_check(
    sys: LayeredInjectionSystem, m: int, t: SimplicialComplex | Z2Chain, delta: int
) -> ConeWitness:
    """Two m-faces of t*δ with different c̃_m colors, following the inductive peel.

    ``t`` is an (m-1)-cycle on L_m, all of whose vertices lie below δ.
    """
    if isinstance(t, Z2Chain):
        t = SimplicialComplex.generated_by(t.terms)
    if m < 1:
        raise OrderError("cone non-constancy starts at level 1")
    verdict = is_n_cycle(t, m - 1)
    if not verdict:
        raise OrderError(f"t is not an {m - 1}-cycle: {verdict.reason}")
    if any(v >= delta for v in t.vertices):
        raise OrderError("every vertex of t must lie below δ")
    if delta >= sys.sizes[m]:
        raise OrderError(f"δ={delta} is not in level {m}")
    faces, trail = _peel(sys, m, t, delta)
    a, b = faces
    ca, cb = c_tilde(sys, m, a), c_tilde(sys, m, b)
    if ca == cb:
        raise AssertionError("peel produced a monochromatic pair")
    return ConeWitness((tuple(sorted(a)), tuple(sorted(b))), (ca, cb), tuple(trail))


def _peel(sys, m, t: SimplicialComplex, delta: int):
    if m == 1:
        u, v = t.vertices[:2]
        return (frozenset([u, delta]), frozenset([v, delta])), []
    img = {v: sys.h(m, delta, v) for v in t.vertices}
    gamma = max(t.vertices, key=lambda v: img[v])
    link = Z2Chain(m - 2, frozenset(f - {gamma} for f in t.n_faces(m - 1) if gamma in f))
    comps = connon_decompose(link)
    s = min(comps, key=lambda c: fkey(c.n_faces(m - 2)[0]))
    s_img = s.relabel(img)
    (fa, fb), trail = _peel(sys, m - 1, s_img, img[gamma])
    back = {img[v]: v for v in s.vertices}
    back[img[gamma]] = gamma

    def lift(face: frozenset) -> frozenset:
        return frozenset(back[x] for x in face) | {delta}

    return (lift(fa), lift(fb)), [(gamma, tuple(s.as_lists()))] + trail


def cone_colors(sys: LayeredInjectionSystem, m: int, t: SimplicialComplex, delta: int) -> set[int]:
    """Brute-force range of c̃_m on the m-faces of t*δ."""
    return {c_tilde(sys, m, f | {delta}) for f in t.n_faces(m - 1)}


def combinatorial_cycles_below(delta: int, dim: int) -> Iterator[SimplicialComplex]:
    """Every combinatorial dim-cycle on vertices {0..δ-1}.

    These are exactly the nonzero Z/2 cycles of the full simplex whose faces form
    one dim-path component.
    """
    from .simplicial import cycle_space, n_path_components

    for z in cycle_space(range(delta), dim):
        Y = SimplicialComplex.generated_by(z.terms)
        if dim == 0 or len(n_path_components(Y, dim)) == 1:
            yield Y


# homological-sum pipeline ----------------------------------------------

FLike = Mapping[Tuple_, int] | Callable[[Tuple_], int]


def _call(F: FLike, t: Tuple_) -> int:
    if callable(F) and not isinstance(F, Mapping):
        return F(t)
    try:
        return F[t]
    except KeyError:
        raise OrderError(f"F is undefined on {t}") from None


def choose_good_a(F: FLike, N: int, n: int) -> tuple[int, ...]:
    """α_0 = 0 and α_j = 1 + max F over nonempty subsets of {α_0..α_{j-1}}."""
    alphas = [0]
    for j in range(1, n + 1):
        best = max(_call(F, sub) for r in range(1, j + 1)
                   for sub in itertools.combinations(alphas, r))
        nxt = best + 1
        if nxt >= N:
            raise UniverseTooSmall(f"α_{j} = {nxt} does not fit below N = {N}", nxt + 1)
        alphas.append(nxt)
    return tuple(alphas)


def build_X_a(F: FLike, a: Sequence[int], include_top: bool = False) -> SimplicialComplex:
    """F-image of the ⊆-chains of proper nonempty subsets of a.

    With ``include_top`` the subset a itself is allowed too, giving the image of
    sd(Δ_n(a)) instead of sd(∂Δ_n(a)).
    """
    a = tuple(sorted(a))
    Y = simplex(a) if include_top else boundary(a)
    sd = barycentric_subdivision(Y)
    return SimplicialComplex.generated_by(
        frozenset(_call(F, v) for v in face) for face in sd.faces)


@dataclass(frozen=True)
class ExtractionResult:
    ok: bool
    cycle: SimplicialComplex | None
    chain: Z2Chain | None
    distinguished: tuple | None
    reason: str = ""


def extract_cycle_from_image(F: FLike, a: Sequence[int]) -> ExtractionResult:
    """Push the top chain of sd(∂Δ_n(a)) through F and pick out one (n-1)-cycle.

    Faces that collapse under F are degenerate and drop out; the remaining
    sum is reduced mod 2 and split into path components.  The component
    containing F''b for b = ({α0}, {α0,α1}, …) is returned.
    """
    a = tuple(sorted(a))
    n = len(a) - 1
    if n < 1:
        raise OrderError("a needs at least two elements")
    sd = barycentric_subdivision(boundary(a))
    images = []
    for face in sd.n_faces(n - 1):
        img = frozenset(_call(F, v) for v in face)
        if len(img) == n:
            images.append(img)
    chain = Z2Chain.of(n - 1, images)
    b_star = frozenset(_call(F, a[:j]) for j in range(1, n + 1))
    if not chain:
        return ExtractionResult(False, None, chain, sorted_face(b_star),
                                "image chain reduces to zero mod 2")
    if b_star not in chain.terms:
        return ExtractionResult(False, None, chain, sorted_face(b_star),
                                "distinguished face F''b is not hit an odd number of times")
    for comp in connon_decompose(chain):
        if b_star in comp.faces:
            return ExtractionResult(True, comp, chain, sorted_face(b_star))
    raise AssertionError("distinguished face vanished during decomposition")


def pipeline_cone(F: FLike, N: int, n: int) -> tuple[tuple[int, ...], SimplicialComplex, int]:
    """choose_good_a, extract t and return (a, t, δ = F(a)); t lies below δ for increasing F."""
    a = choose_good_a(F, N, n)
    res = extract_cycle_from_image(F, a)
    if not res.ok:
        raise OrderError(res.reason)
    return a, res.cycle, _call(F, a)


# minimal walks --------------------------------------------------------------

@dataclass(frozen=True)
class CSequence:
    """C_β ⊆ β for 0 < β < N.  Walks terminate iff β-1 ∈ C_β for every β."""

    N: int
    clubs: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if len(self.clubs) != self.N:
            raise OrderError("one entry per β < N required (C_0 is ignored)")

    @classmethod
    def from_sets(cls, N: int, sets: Mapping[int, Iterable[int]]) -> "CSequence":
        return cls(N, tuple(frozenset(sets.get(b, ())) if b else frozenset() for b in range(N)))

    @classmethod
    def full(cls, N: int) -> "CSequence":
        return cls(N, tuple(frozenset(range(b)) for b in range(N)))

    @classmethod
    def ladder(cls, N: int) -> "CSequence":
        return cls(N, tuple(frozenset([b - 1]) if b else frozenset() for b in range(N)))

    @classmethod
    def random(cls, N: int, rng: random.Random) -> "CSequence":
        clubs = [frozenset()]
        for b in range(1, N):
            extra = {x for x in range(b - 1) if rng.random() < 0.5}
            clubs.append(frozenset(extra | {b - 1}))
        return cls(N, tuple(clubs))

    def problems(self) -> list[str]:
        out = []
        for b in range(1, self.N):
            C = self.clubs[b]
            if not C:
                out.append(f"C_{b} is empty")
            elif not C <= set(range(b)):
                out.append(f"C_{b} is not a subset of {b}")
            elif max(C) != b - 1:
                out.append(f"walk from {b} down to {b - 1} cannot step: max C_{b} = {max(C)}")
        if self.clubs and self.clubs[0]:
            out.append("C_0 must be empty")
        return out


def all_c_sequences(N: int) -> Iterator[CSequence]:
    """Every valid C-sequence on N (2^{(N-1)(N-2)/2} of them)."""
    choices = []
    for b in range(1, N):
        below = list(range(b - 1))
        choices.append([frozenset(s) | {b - 1} for r in range(len(below) + 1)
                        for s in itertools.combinations(below, r)])
    for combo in itertools.product(*choices):
        yield CSequence(N, (frozenset(),) + tuple(combo))


def rho2(C: CSequence, alpha: int, beta: int) -> int:
    if not 0 <= alpha <= beta < C.N:
        raise OrderError(f"ρ₂ needs 0 <= α <= β < N, got ({alpha}, {beta})")
    steps = 0
    while beta != alpha:
        above = [x for x in C.clubs[beta] if x >= alpha]
        if not above:
            raise OrderError(f"walk from {beta} to {alpha} is stuck: C_{beta} ∖ {alpha} is empty")
        beta = min(above)
        steps += 1
    return steps


def walk_metric(C: CSequence, alpha: int, beta: int) -> int:
    if not 0 <= alpha < beta < C.N:
        raise OrderError(f"d needs α < β < N, got ({alpha}, {beta})")
    return max(abs(rho2(C, xi, alpha) - rho2(C, xi, beta)) for xi in range(alpha + 1))


def triangle_violations(C: CSequence) -> list[tuple[int, int, int]]:
    """Triples α<β<γ with d(α,β) > d(α,γ) + d(β,γ)."""
    N = C.N
    rho = [[rho2(C, a, b) if a <= b else 0 for b in range(N)] for a in range(N)]
    d = [[0] * N for _ in range(N)]
    for a in range(N):
        for b in range(a + 1, N):
            d[a][b] = max(abs(rho[x][a] - rho[x][b]) for x in range(a + 1))
    return [(a, b, g) for a, b, g in itertools.combinations(range(N), 3)
            if d[a][b] > d[a][g] + d[b][g]]


# positive case --------------------------------------------------------------

def is_homogeneous(c: Coloring | Callable, X: Sequence[int], arity: int) -> bool:
    colors = {c(t) for t in itertools.combinations(sorted(X), arity)}
    return len(colors) <= 1


def ramsey_witness(
    P: FiniteQuasiOrder,
    c: Coloring | Callable,
    X: Iterable[int],
    n: int,
    domain: Iterable[int] | None = None,
    space: str = "weak",
    check_homogeneous: bool = True,
) -> CofinalFunction:
    """F(x) = least element of X above every coordinate of x and every F(y), y ◁ x.

    P must be a linear order (``range(N)`` with its usual ordering); F has
    arity n+1 and is defined on tuples over ``domain`` (default: all of P).
    """
    Xs = sorted(set(X), key=P.rank)
    if check_homogeneous and not is_homogeneous(c, Xs, n + 1):
        raise OrderError("X is not homogeneous for c on strictly increasing tuples")
    among = None if domain is None else sorted(set(domain))
    table: dict[Tuple_, int] = {}
    for t in tuple_space(P, n + 1, space, among):
        floor = list(t) + [table[s] for s in proper_subsequences(t)]
        pick = next((x for x in Xs if all(P.lt(y, x) for y in floor)), None)
        if pick is None:
            raise UniverseTooSmall(f"X has no element above {t} and its sub-values",
                                   len(Xs) + 1)
        table[t] = pick
    r = None if domain is None else frozenset(among)
    return CofinalFunction(n + 1, table, r, space)


def homogeneous_sets(c: Coloring | Callable, elements: Sequence[int], arity: int, size: int) -> Iterator[tuple[int, ...]]:
    for X in itertools.combinations(sorted(elements), size):
        if is_homogeneous(c, X, arity):
            yield X

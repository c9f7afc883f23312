"""The formal calculus (e, d, *) and the constructive trivialization of cocycles.

Formal expressions are integer combinations of ordered tuples e(x0, …, xs)
over arbitrary hashable symbols.  The conventions are d e(x) = e(), d e() = 0
and e() * y = e(y); with these d(x * y) = d(x) * y + (-1)^s x holds for every
generator of length s.

The recursion seeds A_1(ρ) = σ e(ρ, F(ρ)) with a sign σ that the symbolic
decomposition check arbitrates; ``TrivializeConfig.seed_sign`` freezes it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .homalg import (
    AlternatingCochain,
    InverseSystem,
    StructureError,
    TruncatedOmegaSystem,
    coboundary,
)
from .order import PreconditionError, chains_ending_at, deletions
from .snf import matvec

Sym = Hashable
Key = tuple


@dataclass(frozen=True)
class TrivializeConfig:
    # -1 is the orientation validated by audit_sign_convention
    seed_sign: int = -1


DEFAULT_CONFIG = TrivializeConfig()


# formal expressions ---------------------------------------------------------

class FormalExpression:
    """Sparse integer combination of tuples; zero coefficients are dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, int] | None = None) -> None:
        self.terms: dict[Key, int] = {}
        for k, v in (terms or {}).items():
            if v:
                self.terms[tuple(k)] = self.terms.get(tuple(k), 0) + v
        self.terms = {k: v for k, v in self.terms.items() if v}

    @classmethod
    def e(cls, *xs: Sym) -> "FormalExpression":
        return cls({tuple(xs): 1})

    @classmethod
    def zero(cls) -> "FormalExpression":
        return cls()

    def _combine(self, other: "FormalExpression", sign: int) -> "FormalExpression":
        out = dict(self.terms)
        for k, v in other.terms.items():
            w = out.get(k, 0) + sign * v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        r = FormalExpression()
        r.terms = out
        return r

    def __add__(self, other: "FormalExpression") -> "FormalExpression":
        return self._combine(other, 1)

    def __sub__(self, other: "FormalExpression") -> "FormalExpression":
        return self._combine(other, -1)

    def __neg__(self) -> "FormalExpression":
        return self.scale(-1)

    def __rmul__(self, c: int) -> "FormalExpression":
        return self.scale(c)

    def scale(self, c: int) -> "FormalExpression":
        r = FormalExpression()
        r.terms = {k: c * v for k, v in self.terms.items()} if c else {}
        return r

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FormalExpression) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        return f"FormalExpression({self.pretty()})"

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=repr):
            v = self.terms[k]
            body = "e(" + ",".join(_sym_str(x) for x in k) + ")"
            coef = "" if abs(v) == 1 else f"{abs(v)}"
            parts.append(("- " if v < 0 else "+ ") + coef + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s

    def boundary(self) -> "FormalExpression":
        return formal_boundary(self)

    def star(self, y: Sym) -> "FormalExpression":
        return formal_cone(self, y)


def _sym_str(x: Sym) -> str:
    if isinstance(x, tuple) and len(x) == 2 and x[0] == "F":
        return "F(" + ",".join(_sym_str(y) for y in x[1]) + ")"
    return str(x)


def formal_boundary(x: FormalExpression) -> FormalExpression:
    out: dict[Key, int] = {}
    for k, v in x.terms.items():
        for i in range(len(k)):
            face = k[:i] + k[i + 1:]
            out[face] = out.get(face, 0) + (-v if i % 2 else v)
    return FormalExpression(out)


def formal_cone(x: FormalExpression, y: Sym) -> FormalExpression:
    r = FormalExpression()
    r.terms = {k + (y,): v for k, v in x.terms.items()}
    return r


def star_identity_residual(gen: Sequence[Sym], y: Sym) -> FormalExpression:
    """d(x*y) - d(x)*y - (-1)^s x for the generator x = e(gen); zero when the identity holds."""
    x = FormalExpression.e(*gen)
    s = len(gen)
    return formal_boundary(formal_cone(x, y)) - formal_cone(formal_boundary(x), y) - x.scale((-1) ** s)


# the A/C/S recursion ----------------------------------------------------------

def omit(t: tuple, i: int) -> tuple:
    return t[:i] + t[i + 1:]


class SymbolicF:
    """F as an uninterpreted function: F(t) is the symbol ("F", t)."""

    def __call__(self, t: Sequence[Sym]) -> Sym:
        return ("F", tuple(t))


class ACSRecursion:
    """Memoized A_s, C_s, S_s over tuples for a fixed F.

    A_1(ρ) = σ e(ρ, F(ρ)),
    C_s(τ) = e(τ) - Σ_{i<s+1} (-1)^i A_s(τ^i),
    S_s(τ) = d(C_s(τ) * F(τ)),
    A_{s+1}(τ) = (-1)^{s+1} C_s(τ) * F(τ).
    """

    def __init__(self, F: Callable[[tuple], Sym], seed_sign: int | None = None) -> None:
        self.F = F
        self.seed_sign = DEFAULT_CONFIG.seed_sign if seed_sign is None else seed_sign
        self._A: dict[tuple[int, tuple], FormalExpression] = {}
        self._C: dict[tuple[int, tuple], FormalExpression] = {}

    def _F(self, t: tuple) -> Sym:
        try:
            return self.F(t)
        except KeyError:
            raise PreconditionError(f"F is not defined on {t}") from None

    def A(self, s: int, rho: tuple) -> FormalExpression:
        rho = tuple(rho)
        if len(rho) != s or s < 1:
            raise ValueError(f"A_{s} takes tuples of length {s}, got {rho}")
        key = (s, rho)
        if key not in self._A:
            if s == 1:
                val = FormalExpression.e(*rho, self._F(rho)).scale(self.seed_sign)
            else:
                val = self.C(s - 1, rho).star(self._F(rho)).scale((-1) ** s)
            self._A[key] = val
        return self._A[key]

    def C(self, s: int, tau: tuple) -> FormalExpression:
        tau = tuple(tau)
        if len(tau) != s + 1 or s < 1:
            raise ValueError(f"C_{s} takes tuples of length {s + 1}, got {tau}")
        key = (s, tau)
        if key not in self._C:
            acc = FormalExpression.e(*tau)
            for i in range(s + 1):
                acc = acc - self.A(s, omit(tau, i)).scale((-1) ** i)
            self._C[key] = acc
        return self._C[key]

    def S(self, s: int, tau: tuple) -> FormalExpression:
        return formal_boundary(self.C(s, tau).star(self._F(tuple(tau))))

    def step(self, s: int, tau: tuple) -> tuple[FormalExpression, FormalExpression, FormalExpression, FormalExpression]:
        """(A_s(τ^0), C_s(τ), S_s(τ), A_{s+1}(τ)); the first entry is A_s on the leading face."""
        tau = tuple(tau)
        return (self.A(s, omit(tau, 0)), self.C(s, tau), self.S(s, tau), self.A(s + 1, tau))


def acs_recursion(tau: Sequence[Sym], F: Callable[[tuple], Sym], s: int, seed_sign: int | None = None):
    """The four expressions of one recursion step at τ (length s+1)."""
    return ACSRecursion(F, seed_sign).step(s, tuple(tau))


@dataclass
class ConeDecompositionReport:
    s: int
    tau: tuple
    seed_sign: int
    residual: FormalExpression
    # coefficients of the allowed e(F*(σ)) terms
    multiplicities: dict[tuple, int]
    unexplained: FormalExpression
    double_sum: FormalExpression
    double_sum_concrete: FormalExpression

    @property
    def ok(self) -> bool:
        return not self.unexplained and not self.double_sum and not self.double_sum_concrete

    def lines(self) -> list[str]:
        out = [f"s={self.s} tau={self.tau} seed={self.seed_sign}: {'ok' if self.ok else 'FAIL'}"]
        if self.unexplained:
            out.append(f"  residual terms outside F*(chains): {self.unexplained.pretty()}")
        if self.double_sum:
            out.append(f"  double sum (opaque): {self.double_sum.pretty()}")
        if self.double_sum_concrete:
            out.append(f"  double sum (expanded): {self.double_sum_concrete.pretty()}")
        return out


def double_sum(tau: tuple, s: int, A: Callable[[tuple], FormalExpression] | None, Ftau: Sym) -> FormalExpression:
    """Σ_{i<s+1} Σ_{j<s} (-1)^{i+j} A_{s-1}((τ^i)^j) * F(τ).

    With ``A=None`` each A_{s-1}(ρ) is an opaque symbol ("A", ρ).
    """
    acc = FormalExpression()
    for i in range(s + 1):
        for j in range(s):
            rho = omit(omit(tau, i), j)
            term = FormalExpression.e(("A", rho)) if A is None else A(rho)
            acc = acc + term.star(Ftau).scale((-1) ** (i + j))
    return acc


def verify_lemma13(
    tau: Sequence[Sym], F: Callable[[tuple], Sym], s: int, seed_sign: int | None = None
) -> ConeDecompositionReport:
    """Check C_s(τ) - (-1)^{s+1} S_s(τ) is a combination of e(F*(σ)), σ ⊴-chains ending at τ."""
    tau = tuple(tau)
    if len(tau) != s + 1:
        raise ValueError("τ must have length s+1")
    R = ACSRecursion(F, seed_sign)
    residual = R.C(s, tau) - R.S(s, tau).scale((-1) ** (s + 1))
    allowed = {tuple(R._F(t) for t in sigma) for sigma in chains_ending_at(tau)}
    mult = {k: v for k, v in residual.terms.items() if k in allowed}
    unexplained = FormalExpression({k: v for k, v in residual.terms.items() if k not in allowed})
    Ft = R._F(tau)
    opaque = double_sum(tau, s, None, Ft)
    concrete = double_sum(tau, s, (lambda r: R.A(s - 1, r)), Ft) if s >= 2 else FormalExpression()
    return ConeDecompositionReport(s, tau, R.seed_sign, residual, mult, unexplained, opaque, concrete)


def audit_sign_convention(max_s: int = 4) -> dict[int, list[ConeDecompositionReport]]:
    """Run the decomposition check for both seed signs on formal symbols x0..xs."""
    out = {}
    for sign in (1, -1):
        out[sign] = [verify_lemma13(tuple(f"x{i}" for i in range(s + 1)), SymbolicF(), s, sign)
                     for s in range(1, max_s + 1)]
    return out


def validated_seed_sign(max_s: int = 4) -> int:
    audit = audit_sign_convention(max_s)
    good = [sign for sign, reps in audit.items() if all(r.ok for r in reps)]
    if len(good) != 1:
        raise AssertionError(f"sign audit is ambiguous: {good}")
    return good[0]


# evaluation against a truncated Ω-system ---------------------------------------

def support_color(T: TruncatedOmegaSystem, X: InverseSystem, phi: AlternatingCochain, t: Sequence[int]) -> int:
    """c_Φ(t): the least m with Φ(t) supported on towers <= m (0 for Φ(t) = 0)."""
    sign, val = phi.evaluate(t, X.index)
    if sign == 0 or not val:
        return 0
    pts = T.points
    m = X.index.meet_of(t)
    x = pts[m]
    offs = T.offsets(x)
    last = 0
    for i in range(T.width):
        blk = val[offs[i]:offs[i + 1]]
        if not T.groups[i][x[i]].contains_relation(blk):
            last = i
    return last


def leq_k(T: TruncatedOmegaSystem, a: int, b: int, k: int) -> bool:
    x, y = T.points[a], T.points[b]
    return all(x[i] <= y[i] for i in range(k, T.width))


@dataclass
class EvaluationContext:
    system: TruncatedOmegaSystem
    cocycle: AlternatingCochain
    k: int
    inverse_system: InverseSystem = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.inverse_system = self.system.to_inverse_system()
        if not 0 <= self.k < max(self.system.width, 1):
            raise PreconditionError("cutoff k must lie in [0, width)")
        dphi = coboundary(self.inverse_system, self.cocycle)
        P = self.inverse_system.index
        for t, v in dphi.values.items():
            if not self.inverse_system.terms[P.meet_of(t)].contains_relation(v):
                raise PreconditionError(f"Φ is not a cocycle: dΦ{t} = {v}")

    @property
    def n(self) -> int:
        return self.cocycle.degree

    def evaluate(self, rho: Sequence[int], expr: FormalExpression) -> list[int]:
        """E^ρ_Φ(expr) in G_{⋀ρ}: zero on towers < k, bonding maps on towers >= k."""
        T = self.system
        X = self.inverse_system
        P = X.index
        pts = T.points
        base = pts[P.meet_of(rho)]
        boffs = T.offsets(base)
        out = [0] * boffs[-1]
        for sigma, coef in expr.terms.items():
            if len(sigma) != self.n + 1:
                raise StructureError(f"E^ρ takes (n+1)-tuples, got {sigma}")
            sign, val = self.cocycle.evaluate(sigma, P)
            if sign == 0 or not val:
                continue
            top = pts[P.meet_of(sigma)]
            toffs = T.offsets(top)
            for i in range(self.k, T.width):
                if base[i] > top[i]:
                    raise PreconditionError(f"⋀{tuple(rho)} is not below ⋀{sigma} at tower {i}")
                blk = val[toffs[i]:toffs[i + 1]]
                img = matvec(T.tower_map(i, base[i], top[i]), blk) if blk else []
                for a, w in enumerate(img):
                    out[boffs[i] + a] += coef * sign * w
        return out


def sorted_tuples(ctx: EvaluationContext, length: int) -> list[tuple[int, ...]]:
    return [tuple(c) for c in itertools.combinations(ctx.inverse_system.index.linear_extension, length)]


@dataclass
class FCheck:
    ok: bool
    problems: list[str]
    color: int | None


def check_F_precondition(ctx: EvaluationContext, F: Callable[[tuple], int], limit: int = 20) -> FCheck:
    """F must be (n+1)-cofinal for <=^k and c_Φ∘F* must be constant with value <= k."""
    T, X, n, k = ctx.system, ctx.inverse_system, ctx.n, ctx.k
    problems: list[str] = []
    colors: dict[int, tuple] = {}
    for length in range(1, n + 2):
        for t in sorted_tuples(ctx, length):
            try:
                v = F(t)
            except KeyError:
                problems.append(f"F undefined on {t}")
                continue
            for x in t:
                if not leq_k(T, x, v, k):
                    problems.append(f"{x} is not <=^{k} F{t} = {v}")
            for d in deletions(t) if length > 1 else ():
                if not leq_k(T, F(d), v, k):
                    problems.append(f"F{d} is not <=^{k} F{t}")
            if len(problems) > limit:
                return FCheck(False, problems, None)
    if problems:
        return FCheck(False, problems, None)
    for tau in sorted_tuples(ctx, n + 1):
        for sigma in chains_ending_at(tau):
            img = tuple(F(s) for s in sigma)
            c = support_color(T, X, ctx.cocycle, img)
            colors.setdefault(c, sigma)
            if len(colors) > 1:
                (c0, s0), (c1, s1) = sorted(colors.items())[:2]
                return FCheck(False, [f"F* not monochromatic: c={c0} on {s0}, c={c1} on {s1}"], None)
    color = next(iter(colors), 0)
    if color > k:
        return FCheck(False, [f"constant color {color} exceeds cutoff k={k}"], color)
    return FCheck(True, [], color)


def trivialize_cocycle(
    ctx: EvaluationContext, F: Callable[[tuple], int], config: TrivializeConfig = DEFAULT_CONFIG,
    check: bool = True,
) -> AlternatingCochain:
    """Ψ(ρ) = E^ρ_Φ(A_n(ρ)) on every strictly increasing n-tuple ρ."""
    n = ctx.n
    if n < 1:
        raise PreconditionError("trivialization needs a cocycle of degree >= 1")
    if check:
        rep = check_F_precondition(ctx, F)
        if not rep.ok:
            raise PreconditionError("; ".join(rep.problems))
    R = ACSRecursion(F, config.seed_sign)
    values = {rho: ctx.evaluate(rho, R.A(n, rho)) for rho in sorted_tuples(ctx, n)}
    return AlternatingCochain(n - 1, values)


def lim1_formula(ctx: EvaluationContext, F: Callable[[tuple], int]) -> AlternatingCochain:
    """Degree-1 trivializer written out directly: Ψ(x) = -proj Φ(x, F(x)) onto towers >= k."""
    if ctx.n != 1:
        raise PreconditionError("the direct formula is for degree-1 cocycles")
    vals = {}
    for (x,) in sorted_tuples(ctx, 1):
        vals[(x,)] = [-v for v in ctx.evaluate((x,), FormalExpression.e(x, F((x,))))]
    return AlternatingCochain(0, vals)


@dataclass
class TrivializationReport:
    ok: bool
    mismatches: list[tuple[tuple[int, ...], int, list[int]]]

    def lines(self) -> list[str]:
        if self.ok:
            return ["dΨ = Φ beyond the cutoff"]
        return [f"tuple {t} tower {i}: difference {d}" for t, i, d in self.mismatches]


def compare_beyond(ctx: EvaluationContext, psi: AlternatingCochain, above: int | None = None) -> TrivializationReport:
    """Compare dΨ with Φ on towers with index > ``above`` (default: k)."""
    T, X = ctx.system, ctx.inverse_system
    P = X.index
    cut = ctx.k if above is None else above
    dpsi = coboundary(X, psi)
    bad = []
    for t in sorted_tuples(ctx, ctx.n + 1):
        a = dpsi.values.get(t, [])
        b = ctx.cocycle.values.get(t, [])
        x = T.points[P.meet_of(t)]
        offs = T.offsets(x)
        size = offs[-1]
        a = a or [0] * size
        b = b or [0] * size
        for i in range(cut + 1, T.width):
            diff = [a[j] - b[j] for j in range(offs[i], offs[i + 1])]
            if not T.groups[i][x[i]].contains_relation(diff):
                bad.append((t, i, diff))
    return TrivializationReport(not bad, bad)


# classical coherent families ------------------------------------------------------

Cell = tuple[int, int]
Point = tuple[int, ...]


def I_region(x: Sequence[int], M: int | None = None) -> set[Cell]:
    """I(x) = {(i, j) | j <= x(i)}, optionally cut at width M."""
    return {(i, j) for i, xi in enumerate(x) for j in range(min(xi + 1, M) if M is not None else xi + 1)}


def meet_point(pts: Iterable[Point]) -> Point:
    return tuple(min(col) for col in zip(*pts))


@dataclass
class CoherentFamily:
    """φ_x for n-tuples x of points in L×M; values are sparse cell maps on I(⋀x)."""

    L: int
    M: int
    n: int
    phi: dict[tuple[Point, ...], dict[Cell, int]]
    exceptional: frozenset[Cell] = frozenset()

    def points(self) -> list[Point]:
        return sorted({p for key in self.phi for p in key})

    def problems(self) -> list[str]:
        out = []
        for key, f in self.phi.items():
            if len(key) != self.n:
                out.append(f"key {key} is not an {self.n}-tuple")
                continue
            region = I_region(meet_point(key), self.M)
            for c, v in f.items():
                if v and c not in region:
                    out.append(f"φ{key} has value at {c} outside I(⋀x)")
        return out


@dataclass
class CellReport:
    ok: bool
    violations: list[tuple[tuple, Cell, int]]
    minimal_exceptional: frozenset[Cell]

    def lines(self) -> list[str]:
        if self.ok:
            return ["ok"]
        return [f"{key} cell {c}: {v}" for key, c, v in self.violations]


def _collect(violations: list, exceptional: frozenset[Cell]) -> CellReport:
    kept = [(k, c, v) for k, c, v in violations if c not in exceptional]
    return CellReport(not kept, kept, frozenset(c for _, c, _ in violations))


def check_coherence(fam: CoherentFamily, n: int | None = None, exceptional: Iterable[Cell] | None = None) -> CellReport:
    """Σ_i (-1)^i φ_{x^i} ↾ I(x) vanishes off the exceptional cells for all (n+1)-tuples x."""
    n = fam.n if n is None else n
    exc = fam.exceptional if exceptional is None else frozenset(exceptional)
    pts = fam.points()
    viol = []
    for x in itertools.product(pts, repeat=n + 1):
        faces = [omit(x, i) for i in range(n + 1)]
        if any(f not in fam.phi for f in faces):
            continue
        for c in sorted(I_region(meet_point(x), fam.M)):
            total = sum((-1) ** i * fam.phi[f].get(c, 0) for i, f in enumerate(faces))
            if total:
                viol.append((x, c, total))
    return _collect(viol, exc)


def check_triviality_witness(
    fam: CoherentFamily,
    psi: Mapping[tuple[Point, ...], Mapping[Cell, int]] | Mapping[Cell, int],
    n: int | None = None,
    exceptional: Iterable[Cell] | None = None,
) -> CellReport:
    """n = 1: φ_x =* ψ ↾ I(x) for a global ψ; n > 1: φ_x =* Σ_i (-1)^i ψ_{x^i} ↾ I(x)."""
    n = fam.n if n is None else n
    exc = fam.exceptional if exceptional is None else frozenset(exceptional)
    viol = []
    for key in sorted(fam.phi):
        region = sorted(I_region(meet_point(key), fam.M))
        f = fam.phi[key]
        for c in region:
            if n == 1:
                target = psi.get(c, 0)  # type: ignore[union-attr]
            else:
                target = 0
                for i in range(n):
                    target += (-1) ** i * psi.get(omit(key, i), {}).get(c, 0)  # type: ignore[union-attr]
            if f.get(c, 0) != target:
                viol.append((key, c, f.get(c, 0) - target))
    return _collect(viol, exc)


def coherent_system(L: int, M: int) -> TruncatedOmegaSystem:
    """Towers Z^{k+1} with restriction maps: G_x = Z^{I(x)} cut at L×M."""
    from .homalg import FGAbelianGroup

    groups = tuple(tuple(FGAbelianGroup.free(k + 1) for k in range(M)) for _ in range(L))
    steps = tuple(
        tuple(tuple(tuple(int(r == c) for c in range(k + 2)) for r in range(k + 1)) for k in range(M - 1))
        for _ in range(L))
    return TruncatedOmegaSystem(L, M - 1, groups, steps)


def cochain_to_cells(T: TruncatedOmegaSystem, x: Point, vec: Sequence[int]) -> dict[Cell, int]:
    offs = T.offsets(x)
    out = {}
    for i in range(T.width):
        for j, v in enumerate(vec[offs[i]:offs[i + 1]]):
            if v:
                out[(i, j)] = v
    return out


def family_from_cochain(T: TruncatedOmegaSystem, X: InverseSystem, phi: AlternatingCochain) -> CoherentFamily:
    """All (degree+1)-tuples of points, valued by alternating evaluation of Φ."""
    P = X.index
    pts = T.points
    n = phi.degree + 1
    fam = {}
    for idx in itertools.product(P.elements, repeat=n):
        sign, val = phi.evaluate(idx, P)
        key = tuple(pts[i] for i in idx)
        if sign == 0 or not val:
            fam[key] = {}
            continue
        cells = cochain_to_cells(T, pts[P.meet_of(idx)], val)
        fam[key] = {c: sign * v for c, v in cells.items()}
    return CoherentFamily(T.width, T.height + 1, n, fam)


def tower_cells(k: int, L: int, M: int) -> frozenset[Cell]:
    """Cells in columns 0..k: the finite region left open by a cutoff k."""
    return frozenset((i, j) for i in range(min(k + 1, L)) for j in range(M))


# canonical F choices on truncated systems -------------------------------------------

def constant_top_F(T: TruncatedOmegaSystem) -> Callable[[tuple], int]:
    top = len(T.points) - 1
    return lambda t: top


def tail_top_F(T: TruncatedOmegaSystem, k: int) -> Callable[[tuple], int]:
    """F(t)(i) = max over t for i <= k, top level for i > k."""
    pts = T.points
    index = {p: a for a, p in enumerate(pts)}

    def F(t: tuple) -> int:
        vals = [pts[a] for a in t]
        return index[tuple(max(v[i] for v in vals) if i <= k else T.height for i in range(T.width))]

    return F

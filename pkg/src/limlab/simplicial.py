"""Abstract simplicial complexes and Z/2 chains.

Faces are frozensets of hashable vertices.  Vertices may be ints, strings or
(nested) tuples; subdivision vertices are the sorted vertex tuples of the
faces they stand for, so subdividing twice is well defined.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator

Face = frozenset


class ComplexError(ValueError):
    pass


def vkey(v: Hashable):
    """Total sort key across the vertex types we use."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, str):
        return (1, v)
    if isinstance(v, tuple):
        return (2, len(v), tuple(vkey(x) for x in v))
    if isinstance(v, frozenset):
        return (3, len(v), tuple(sorted(vkey(x) for x in v)))
    return (4, repr(v))


def fkey(face: Iterable[Hashable]):
    f = sorted((vkey(v) for v in face))
    return (len(f), tuple(f))


def sorted_face(face: Iterable[Hashable]) -> tuple:
    return tuple(sorted(face, key=vkey))


def encode_face(face: Iterable[Hashable]) -> tuple:
    """Canonical vertex name for a face when it becomes a subdivision vertex."""
    return sorted_face(face)


@dataclass(frozen=True)
class SimplicialComplex:
    faces: frozenset

    def __post_init__(self) -> None:
        for f in self.faces:
            if not f:
                raise ComplexError("faces must be nonempty")

    @classmethod
    def generated_by(cls, faces: Iterable[Iterable[Hashable]]) -> "SimplicialComplex":
        """Downward closure of the given faces."""
        out: set[frozenset] = set()
        for f in faces:
            f = frozenset(f)
            if not f:
                raise ComplexError("faces must be nonempty")
            if f in out:
                continue
            items = list(f)
            for r in range(1, len(items) + 1):
                for sub in itertools.combinations(items, r):
                    out.add(frozenset(sub))
        return cls(frozenset(out))

    @property
    def vertices(self) -> list:
        return sorted({v for f in self.faces for v in f}, key=vkey)

    @property
    def dim(self) -> int:
        return max((len(f) - 1 for f in self.faces), default=-1)

    def n_faces(self, n: int) -> list[frozenset]:
        return sorted((f for f in self.faces if len(f) == n + 1), key=fkey)

    def maximal_faces(self) -> list[frozenset]:
        fs = self.faces
        return sorted((f for f in fs if not any(f < g for g in fs if len(g) == len(f) + 1)), key=fkey)

    def is_pure(self) -> bool:
        d = self.dim
        return all(len(f) == d + 1 for f in self.maximal_faces())

    def is_closed(self) -> bool:
        return all(frozenset(sub) in self.faces
                   for f in self.faces for sub in itertools.combinations(f, len(f) - 1) if sub)

    def f_vector(self) -> list[int]:
        counts = [0] * (self.dim + 1)
        for f in self.faces:
            counts[len(f) - 1] += 1
        return counts

    def relabel(self, mapping) -> "SimplicialComplex":
        """Image under a vertex map; collapsed faces shrink as in a simplicial map."""
        return SimplicialComplex.generated_by(frozenset(mapping[v] for v in f) for f in self.faces)

    def __len__(self) -> int:
        return len(self.faces)

    def as_lists(self) -> list[list]:
        return [list(sorted_face(f)) for f in sorted(self.faces, key=fkey)]


EMPTY = SimplicialComplex(frozenset())


def simplex(a: Iterable[Hashable]) -> SimplicialComplex:
    a = frozenset(a)
    if not a:
        raise ComplexError("a simplex needs at least one vertex")
    return SimplicialComplex.generated_by([a])


def boundary(a: Iterable[Hashable]) -> SimplicialComplex:
    a = frozenset(a)
    if len(a) < 2:
        raise ComplexError("the boundary needs at least two vertices")
    return SimplicialComplex(frozenset(f for f in simplex(a).faces if f != a))


def cone(Y: SimplicialComplex, v: Hashable) -> SimplicialComplex:
    if any(v in f for f in Y.faces):
        raise ComplexError(f"cone point {v!r} is already a vertex")
    new = set(Y.faces)
    new.add(frozenset([v]))
    for f in Y.faces:
        new.add(f | {v})
    return SimplicialComplex(frozenset(new))


def barycentric_subdivision(Y: SimplicialComplex) -> SimplicialComplex:
    """Vertices are the faces of Y (encoded); faces are nonempty ⊆-chains."""
    if not Y.faces:
        raise ComplexError("cannot subdivide the empty complex")
    faces = sorted(Y.faces, key=fkey)
    above: dict[frozenset, list[frozenset]] = {f: [] for f in faces}
    for f in faces:
        for g in faces:
            if f < g:
                above[f].append(g)
    out: set[frozenset] = set()

    def grow(chain: list[frozenset]) -> None:
        out.add(frozenset(encode_face(c) for c in chain))
        for g in above[chain[-1]]:
            chain.append(g)
            grow(chain)
            chain.pop()

    for f in faces:
        grow([f])
    return SimplicialComplex(frozenset(out))


def _components(items: list[frozenset], n: int) -> list[list[frozenset]]:
    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n == 0:
        return [items] if items else []
    by_ridge: dict[frozenset, int] = {}
    for i, f in enumerate(items):
        for sub in itertools.combinations(f, n):
            r = frozenset(sub)
            j = by_ridge.setdefault(r, i)
            if j != i:
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[int, list[frozenset]] = {}
    for i, f in enumerate(items):
        groups.setdefault(find(i), []).append(f)
    return [groups[k] for k in sorted(groups)]


def n_path_components(Y: SimplicialComplex, n: int) -> list[list[frozenset]]:
    """Classes of [Y]_n under the closure of |a ∩ b| = n, each sorted, ordered by least face."""
    return _components(Y.n_faces(n), n)


@dataclass(frozen=True)
class CycleVerdict:
    ok: bool
    reason: str = ""
    witness: object = None

    def __bool__(self) -> bool:
        return self.ok


def is_n_cycle(Y: SimplicialComplex, n: int) -> CycleVerdict:
    if not Y.faces:
        return CycleVerdict(False, "empty complex")
    if n == 0:
        if Y.dim != 0:
            return CycleVerdict(False, "not 0-dimensional", Y.n_faces(Y.dim)[0])
        k = len(Y.faces)
        return CycleVerdict(k % 2 == 0, "" if k % 2 == 0 else "odd number of vertices", k)
    if Y.dim != n:
        return CycleVerdict(False, f"dimension {Y.dim} != {n}")
    if not Y.is_pure():
        bad = next(f for f in Y.maximal_faces() if len(f) != n + 1)
        return CycleVerdict(False, "not pure", bad)
    top = Y.n_faces(n)
    degree: dict[frozenset, int] = {}
    for f in top:
        for sub in itertools.combinations(f, n):
            r = frozenset(sub)
            degree[r] = degree.get(r, 0) + 1
    for r in sorted(degree, key=fkey):
        if degree[r] % 2:
            return CycleVerdict(False, "odd ridge", (sorted_face(r), degree[r]))
    comps = _components(top, n)
    if len(comps) != 1:
        return CycleVerdict(False, f"{len(comps)} n-path components", len(comps))
    return CycleVerdict(True)


@dataclass(frozen=True)
class Z2Chain:
    dimension: int
    terms: frozenset

    def __post_init__(self) -> None:
        for t in self.terms:
            if len(t) != self.dimension + 1:
                raise ComplexError(f"term {sorted_face(t)} has the wrong size for dimension {self.dimension}")

    @classmethod
    def of(cls, dimension: int, terms: Iterable[Iterable[Hashable]]) -> "Z2Chain":
        """Sum of the given faces with multiplicity, reduced mod 2."""
        acc: set[frozenset] = set()
        for t in terms:
            acc ^= {frozenset(t)}
        return cls(dimension, frozenset(acc))

    def __add__(self, other: "Z2Chain") -> "Z2Chain":
        if other.dimension != self.dimension:
            raise ComplexError("dimension mismatch")
        return Z2Chain(self.dimension, self.terms ^ other.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def sorted_terms(self) -> list[tuple]:
        return [sorted_face(t) for t in sorted(self.terms, key=fkey)]

    @classmethod
    def full(cls, Y: SimplicialComplex, n: int) -> "Z2Chain":
        return cls(n, frozenset(Y.n_faces(n)))


def z2_boundary(chain: Z2Chain) -> Z2Chain:
    if chain.dimension < 1:
        raise ComplexError("d_0 has no target; use the parity of a 0-chain instead")
    acc: set[frozenset] = set()
    for t in chain.terms:
        for v in t:
            acc ^= {t - {v}}
    return Z2Chain(chain.dimension - 1, frozenset(acc))


def is_homological_cycle(chain: Z2Chain) -> bool:
    if chain.dimension == 0:
        return len(chain.terms) % 2 == 0
    return not z2_boundary(chain)


def connon_decompose(chain: Z2Chain) -> list[SimplicialComplex]:
    """n-path components of the complex generated by a homological n-cycle."""
    if not is_homological_cycle(chain):
        raise ComplexError("chain has nonzero boundary")
    n = chain.dimension
    comps = _components(sorted(chain.terms, key=fkey), n)
    return [SimplicialComplex.generated_by(c) for c in comps]


def z2_rank(rows: list[int]) -> int:
    """Rank over GF(2) of row bitmasks."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            h = r.bit_length() - 1
            if h in basis:
                r ^= basis[h]
            else:
                basis[h] = r
                break
    return len(basis)


def z2_betti(Y: SimplicialComplex) -> list[int]:
    """Reduced-free Betti numbers b_0..b_dim of Y over Z/2."""
    d = Y.dim
    if d < 0:
        return []
    idx = [{f: i for i, f in enumerate(Y.n_faces(k))} for k in range(d + 1)]
    ranks = [0] * (d + 2)
    for k in range(1, d + 1):
        rows = []
        for f in idx[k]:
            mask = 0
            for v in f:
                mask |= 1 << idx[k - 1][f - {v}]
            rows.append(mask)
        ranks[k] = z2_rank(rows)
    return [len(idx[k]) - ranks[k] - ranks[k + 1] for k in range(d + 1)]


def cycle_space(vertices: Iterable[Hashable], n: int) -> Iterator[Z2Chain]:
    """Every nonzero homological n-cycle on the full simplex over ``vertices``.

    For n = 0 these are the nonempty even vertex sets.
    """
    verts = sorted(vertices, key=vkey)
    faces = [frozenset(c) for c in itertools.combinations(verts, n + 1)]
    if n == 0:
        for r in range(2, len(verts) + 1, 2):
            for c in itertools.combinations(verts, r):
                yield Z2Chain(0, frozenset(frozenset([v]) for v in c))
        return
    ridges = {frozenset(c): i for i, c in enumerate(itertools.combinations(verts, n))}
    masks = []
    for f in faces:
        m = 0
        for v in f:
            m |= 1 << ridges[f - {v}]
        masks.append(m)
    # null space of the boundary map over GF(2) by elimination on augmented rows
    rows = [(masks[i], 1 << i) for i in range(len(faces))]
    pivots: dict[int, tuple[int, int]] = {}
    kernel: list[int] = []
    for b, tag in rows:
        while b:
            h = b.bit_length() - 1
            if h in pivots:
                pb, pt = pivots[h]
                b ^= pb
                tag ^= pt
            else:
                pivots[h] = (b, tag)
                break
        if not b:
            kernel.append(tag)
    for bits in range(1, 1 << len(kernel)):
        tag = 0
        for j, k in enumerate(kernel):
            if bits >> j & 1:
                tag ^= k
        yield Z2Chain(n, frozenset(faces[i] for i in range(len(faces)) if tag >> i & 1))

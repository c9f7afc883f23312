"""JSON instance files: every document carries a top-level "kind".

Integers that may exceed 64 bits are written as decimal strings and accepted
either way on input.  ``dumps`` sorts keys so reports are byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

from .colorings import CSequence, LayeredInjectionSystem
from .homalg import (
    AlternatingCochain,
    FGAbelianGroup,
    InverseSystem,
    StructureError,
    TruncatedOmegaSystem,
)
from .order import CofinalFunction, Coloring, FiniteQuasiOrder, OrderError, check_n_cofinal
from .search import PHInstance
from .simplicial import SimplicialComplex
from .trivialize import CoherentFamily

BIG = 2 ** 53


class InstanceError(ValueError):
    """A document that cannot be decoded; ``diagnostics`` lists every problem found."""

    def __init__(self, message: str, diagnostics: list[str] | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or [message]


# scalars --------------------------------------------------------------------

def enc_int(v: int) -> int | str:
    return str(v) if abs(v) >= BIG else v


def dec_int(v: Any) -> int:
    if isinstance(v, bool):
        raise InstanceError(f"expected an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v)
        except ValueError:
            pass
    raise InstanceError(f"expected an integer, got {v!r}")


def enc_matrix(M) -> list[list[int | str]]:
    return [[enc_int(x) for x in row] for row in M]


def dec_matrix(M: Any) -> tuple[tuple[int, ...], ...]:
    if not isinstance(M, list) or any(not isinstance(r, list) for r in M):
        raise InstanceError("matrix must be a list of rows")
    return tuple(tuple(dec_int(x) for x in row) for row in M)


def enc_color(c: Any) -> Any:
    return list(enc_color(x) for x in c) if isinstance(c, tuple) else c


def dec_color(c: Any) -> Any:
    return tuple(dec_color(x) for x in c) if isinstance(c, list) else c


def _tuple(t: Any) -> tuple[int, ...]:
    if not isinstance(t, list):
        raise InstanceError(f"expected a tuple (JSON list), got {t!r}")
    return tuple(dec_int(x) for x in t)


def _need(doc: dict, key: str) -> Any:
    if key not in doc:
        raise InstanceError(f"{doc.get('kind', 'document')}: missing field {key!r}")
    return doc[key]


# encoders -------------------------------------------------------------------

def encode_order(P: FiniteQuasiOrder) -> dict:
    out: dict = {
        "kind": "order",
        "size": P.size,
        "labels": list(P.labels),
        "leq": [[int(b) for b in row] for row in P.leq],
        "linear_extension": list(P.linear_extension),
    }
    if P.meet is not None:
        out["meet"] = [list(r) for r in P.meet]
    if P.join is not None:
        out["join"] = [list(r) for r in P.join]
    return out


def encode_coloring(c: Coloring) -> dict:
    return {
        "kind": "coloring",
        "arity": c.arity,
        "palette": [enc_color(x) for x in c.palette],
        "table": [[list(t), enc_color(v)] for t, v in sorted(c.table.items())],
    }


def encode_cofinal(F: CofinalFunction) -> dict:
    return {
        "kind": "cofinal_function",
        "arity": F.arity,
        "space": F.space,
        "restriction": None if F.restriction is None else sorted(F.restriction),
        "table": [[list(t), v] for t, v in sorted(F.table.items())],
    }


def encode_ph_instance(inst: PHInstance) -> dict:
    return {
        "kind": "ph_instance",
        "order": encode_order(inst.order),
        "coloring": encode_coloring(inst.coloring),
        "n": inst.n,
        "mode": inst.mode,
        "domain": None if inst.domain is None else list(inst.domain),
    }


def encode_group(G: FGAbelianGroup) -> dict:
    return {"kind": "group", "ngens": G.ngens, "relations": enc_matrix(G.relations)}


def encode_inverse_system(X: InverseSystem) -> dict:
    return {
        "kind": "inverse_system",
        "index": encode_order(X.index),
        "terms": [encode_group(g) for g in X.terms],
        "bonds": [[x, y, enc_matrix(M)] for (x, y), M in sorted(X.bonds.items())],
    }


def encode_omega(T: TruncatedOmegaSystem) -> dict:
    return {
        "kind": "omega_system",
        "width": T.width,
        "height": T.height,
        "groups": [[encode_group(g) for g in tower] for tower in T.groups],
        "steps": [[enc_matrix(M) for M in tower] for tower in T.steps],
    }


def encode_cochain(phi: AlternatingCochain) -> dict:
    return {
        "kind": "cochain",
        "degree": phi.degree,
        "values": [[list(t), [enc_int(x) for x in v]] for t, v in sorted(phi.values.items())],
    }


def encode_complex(Y: SimplicialComplex) -> dict:
    return {"kind": "complex", "faces": Y.as_lists()}


def encode_lis(sys: LayeredInjectionSystem) -> dict:
    return {"kind": "layered_injection_system", "sizes": list(sys.sizes),
            "injections": [[list(h) for h in level] for level in sys.injections]}


def encode_c_sequence(C: CSequence) -> dict:
    return {"kind": "c_sequence", "N": C.N, "clubs": [sorted(c) for c in C.clubs]}


def encode_family(fam: CoherentFamily) -> dict:
    return {
        "kind": "coherent_family",
        "L": fam.L, "M": fam.M, "n": fam.n,
        "phi": [[[list(p) for p in key], [[i, j, enc_int(v)] for (i, j), v in sorted(cells.items())]]
                for key, cells in sorted(fam.phi.items())],
        "exceptional": sorted([list(c) for c in fam.exceptional]),
    }


# decoders -------------------------------------------------------------------

def decode_order(doc: dict) -> FiniteQuasiOrder:
    if "leq" in doc:
        rows = _need(doc, "leq")
        n = len(rows)
        if any(not isinstance(r, list) or len(r) != n for r in rows):
            raise InstanceError("order: leq must be a square 0/1 matrix")
        leq = tuple(tuple(bool(dec_int(b)) for b in r) for r in rows)
    elif "pairs" in doc:
        n = dec_int(_need(doc, "size"))
        pairs = [_tuple(p) for p in doc["pairs"]]
        if any(len(p) != 2 or not all(0 <= v < n for v in p) for p in pairs):
            raise InstanceError("order: pairs must be [x, y] with 0 <= x, y < size")
        leq = FiniteQuasiOrder.from_relation(n, pairs, close=doc.get("close", True)).leq
    else:
        raise InstanceError("order: needs 'leq' or 'pairs'")
    labels = tuple(doc.get("labels") or ())
    ext = tuple(doc.get("linear_extension") or ())
    meet = tuple(tuple(r) for r in doc["meet"]) if doc.get("meet") is not None else None
    join = tuple(tuple(r) for r in doc["join"]) if doc.get("join") is not None else None
    try:
        return FiniteQuasiOrder(leq, labels, meet, join, ext)
    except OrderError as exc:
        raise InstanceError(f"order: {exc}") from None


def decode_coloring(doc: dict) -> Coloring:
    table = {}
    for row in _need(doc, "table"):
        if not isinstance(row, list) or len(row) != 2:
            raise InstanceError("coloring: table rows are [tuple, color]")
        table[_tuple(row[0])] = dec_color(row[1])
    return Coloring(dec_int(_need(doc, "arity")), table, tuple(dec_color(c) for c in doc.get("palette", [])))


def decode_cofinal(doc: dict) -> CofinalFunction:
    table = {}
    for row in _need(doc, "table"):
        if not isinstance(row, list) or len(row) != 2:
            raise InstanceError("cofinal_function: table rows are [tuple, value]")
        table[_tuple(row[0])] = dec_int(row[1])
    r = doc.get("restriction")
    return CofinalFunction(dec_int(_need(doc, "arity")), table,
                           None if r is None else frozenset(_tuple(r)), doc.get("space", "weak"))


def decode_ph_instance(doc: dict) -> PHInstance:
    P = decode_order(_need(doc, "order"))
    c = decode_coloring(_need(doc, "coloring"))
    dom = doc.get("domain")
    try:
        return PHInstance(P, c, dec_int(_need(doc, "n")), doc.get("mode", "total"),
                          None if dom is None else _tuple(dom))
    except OrderError as exc:
        raise InstanceError(f"ph_instance: {exc}") from None


def decode_group(doc: dict) -> FGAbelianGroup:
    try:
        return FGAbelianGroup(dec_int(_need(doc, "ngens")), dec_matrix(doc.get("relations", [])))
    except StructureError as exc:
        raise InstanceError(f"group: {exc}") from None


def decode_inverse_system(doc: dict) -> InverseSystem:
    P = decode_order(_need(doc, "index"))
    terms = tuple(decode_group(g) for g in _need(doc, "terms"))
    bonds = {}
    for row in _need(doc, "bonds"):
        if not isinstance(row, list) or len(row) != 3:
            raise InstanceError("inverse_system: bonds rows are [x, y, matrix]")
        bonds[(dec_int(row[0]), dec_int(row[1]))] = dec_matrix(row[2])
    try:
        return InverseSystem(P, terms, bonds)
    except StructureError as exc:
        raise InstanceError(f"inverse_system: {exc}") from None


def decode_omega(doc: dict) -> TruncatedOmegaSystem:
    groups = tuple(tuple(decode_group(g) for g in tower) for tower in _need(doc, "groups"))
    steps = tuple(tuple(dec_matrix(M) for M in tower) for tower in _need(doc, "steps"))
    return TruncatedOmegaSystem(dec_int(_need(doc, "width")), dec_int(_need(doc, "height")), groups, steps)


def decode_cochain(doc: dict) -> AlternatingCochain:
    vals = {}
    for row in _need(doc, "values"):
        if not isinstance(row, list) or len(row) != 2:
            raise InstanceError("cochain: values rows are [tuple, vector]")
        vals[_tuple(row[0])] = [dec_int(x) for x in row[1]]
    return AlternatingCochain(dec_int(_need(doc, "degree")), vals)


def decode_complex(doc: dict) -> SimplicialComplex:
    faces = _need(doc, "faces")
    if not isinstance(faces, list):
        raise InstanceError("complex: faces must be a list")
    return SimplicialComplex.generated_by([dec_color(f) if isinstance(f, list) else f for f in faces])


def decode_lis(doc: dict) -> LayeredInjectionSystem:
    return LayeredInjectionSystem(_tuple(_need(doc, "sizes")),
                                  tuple(tuple(_tuple(h) for h in lvl) for lvl in _need(doc, "injections")))


def decode_c_sequence(doc: dict) -> CSequence:
    try:
        return CSequence(dec_int(_need(doc, "N")), tuple(frozenset(_tuple(c)) for c in _need(doc, "clubs")))
    except OrderError as exc:
        raise InstanceError(f"c_sequence: {exc}") from None


def decode_family(doc: dict) -> CoherentFamily:
    phi = {}
    for key, cells in _need(doc, "phi"):
        phi[tuple(_tuple(p) for p in key)] = {(dec_int(i), dec_int(j)): dec_int(v) for i, j, v in cells}
    exc = frozenset((dec_int(i), dec_int(j)) for i, j in doc.get("exceptional", []))
    return CoherentFamily(dec_int(_need(doc, "L")), dec_int(_need(doc, "M")), dec_int(_need(doc, "n")), phi, exc)


def decode_cutoff(doc: dict) -> dict:
    kind = doc.get("F", "constant-top")
    if kind not in ("constant-top", "tail-top"):
        raise InstanceError(f"cutoff: unknown F rule {kind!r}")
    return {"k": dec_int(_need(doc, "k")), "F": kind}


DECODERS: dict[str, Callable[[dict], Any]] = {
    "cutoff": decode_cutoff,
    "order": decode_order,
    "coloring": decode_coloring,
    "cofinal_function": decode_cofinal,
    "ph_instance": decode_ph_instance,
    "group": decode_group,
    "inverse_system": decode_inverse_system,
    "omega_system": decode_omega,
    "cochain": decode_cochain,
    "complex": decode_complex,
    "layered_injection_system": decode_lis,
    "c_sequence": decode_c_sequence,
    "coherent_family": decode_family,
}


def decode(doc: Any) -> Any:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InstanceError("document must be a JSON object with a 'kind' field")
    kind = doc["kind"]
    if kind == "bundle":
        return {name: decode(item) for name, item in _need(doc, "items").items()}
    if kind not in DECODERS:
        raise InstanceError(f"unknown kind {kind!r}")
    try:
        return DECODERS[kind](doc)
    except InstanceError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InstanceError(f"{kind}: malformed ({exc.__class__.__name__}: {exc})") from None


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load(path: str | Path) -> tuple[dict, Any]:
    doc = read_json(path)
    return doc, decode(doc)


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# validation -----------------------------------------------------------------

def validate_document(doc: Any, where: str = "") -> list[str]:
    """Decode and run every invariant check for the document's types."""
    pre = f"{where}: " if where else ""
    try:
        obj = decode(doc)
    except InstanceError as exc:
        return [pre + d for d in exc.diagnostics]
    kind = doc["kind"]
    if kind == "bundle":
        out = []
        for name, item in sorted(doc["items"].items()):
            out += validate_document(item, f"{where}/{name}" if where else name)
        # cross-document checks for a (order, cofinal_function) pair
        objs = {name: decode(item) for name, item in doc["items"].items()}
        orders = [o for o in objs.values() if isinstance(o, FiniteQuasiOrder)]
        for name, o in sorted(objs.items()):
            if isinstance(o, CofinalFunction) and orders:
                out += [f"{pre}{name}: {line}" for line in _cofinal_lines(orders[0], o)]
        return out
    out = [pre + p for p in problems_of(obj)]
    if kind == "cofinal_function" and "order" in doc:
        try:
            P = decode_order(doc["order"])
        except InstanceError as exc:
            return out + [pre + d for d in exc.diagnostics]
        out += [pre + line for line in _cofinal_lines(P, obj)]
    return out


def _cofinal_lines(P: FiniteQuasiOrder, F: CofinalFunction) -> list[str]:
    try:
        return check_n_cofinal(P, F).lines()
    except OrderError as exc:
        return [str(exc)]


def problems_of(obj: Any) -> list[str]:
    if isinstance(obj, FiniteQuasiOrder):
        return obj.validate()
    if isinstance(obj, PHInstance):
        return obj.problems()
    if isinstance(obj, (InverseSystem, TruncatedOmegaSystem, LayeredInjectionSystem, CSequence, CoherentFamily)):
        return obj.problems()
    if isinstance(obj, FGAbelianGroup):
        return []
    return []

"""Batch front end.

Exit codes: 0 no invariant violations, 1 violations found, 2 malformed input or
configuration, 3 budget exhausted.  Reports are JSON with sorted keys; all
wall-clock data goes into a separate "timing" block.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from . import io
from .colorings import CSequence, LayeredInjectionSystem, all_c_sequences, rho2, triangle_violations, walk_metric
from .generators import (
    random_index,
    random_inverse_system,
    random_omega_system,
    trivialization_instance,
)
from .homalg import InverseSystem, TruncatedOmegaSystem, additivity_comparison, lim_n
from .order import Coloring, iter_orders
from .search import INCONCLUSIVE, PHInstance, find_witness, refute_injective_coloring, verify_witness
from .simplicial import SimplicialComplex, is_n_cycle, z2_betti
from .sset import simplicial_ph_check
from .trivialize import (
    EvaluationContext,
    compare_beyond,
    constant_top_F,
    tail_top_F,
    trivialize_cocycle,
    validated_seed_sign,
)

log = logging.getLogger("limlab")

EXIT_OK, EXIT_VIOLATION, EXIT_MALFORMED, EXIT_BUDGET = 0, 1, 2, 3
COMMANDS = ("gen", "validate", "search", "refute", "homology", "limn", "trivialize", "walks",
            "sset-check", "report")


@dataclass
class ExperimentConfig:
    command: str
    paths: list[str] = field(default_factory=list)
    seed: int = 0
    budget: int = 200_000
    workers: int = 1
    out: str | None = None
    format: str = "json"
    options: dict = field(default_factory=dict)

    def problems(self) -> list[str]:
        out = []
        if self.command not in COMMANDS:
            out.append(f"unknown command {self.command!r}")
        if self.seed < 0:
            out.append("seed must be nonnegative")
        if self.budget < 0:
            out.append("budget must be nonnegative")
        if self.workers < 1:
            out.append("workers must be positive")
        if self.format not in ("json", "csv", "text"):
            out.append(f"unknown format {self.format!r}")
        for p in self.paths:
            if not p.startswith("fixture:") and not Path(p).exists():
                out.append(f"no such file: {p}")
        return out


class Malformed(Exception):
    def __init__(self, diagnostics: list[str]) -> None:
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Report:
    command: str
    config: dict
    result: Any = None
    violations: list[str] = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def as_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "result": self.result,
                "violations": self.violations, "exit_code": self.exit_code, "timing": self.timing}


# fixtures and loading --------------------------------------------------------------

def fixture_path(name: str) -> Path:
    return Path(str(resources.files("limlab") / "fixtures" / f"{name}.json"))


def load_doc(path: str) -> tuple[dict, Any]:
    p = fixture_path(path[len("fixture:"):]) if path.startswith("fixture:") else Path(path)
    try:
        return io.load(p)
    except io.InstanceError as exc:
        raise Malformed(exc.diagnostics) from None


def expect(obj: Any, types: tuple, what: str) -> Any:
    if not isinstance(obj, types):
        raise Malformed([f"expected {what}, got {type(obj).__name__}"])
    return obj


def _strip_timing(cert: dict, timing: dict, prefix: str = "") -> dict:
    cert = dict(cert)
    if "elapsed_s" in cert:
        timing[prefix + "elapsed_s"] = cert.pop("elapsed_s")
    return cert


def _table(F) -> list:
    return [[list(t), v] for t, v in sorted(F.table.items())]


# commands ----------------------------------------------------------------------

def cmd_gen(cfg: ExperimentConfig, rep: Report) -> None:
    what = cfg.options.get("what") or "ph"
    rng = random.Random(cfg.seed)
    if what == "ph":
        size = int(cfg.options.get("size") or 4)
        orders = list(iter_orders(size))
        P = orders[rng.randrange(len(orders))]
        n = int(cfg.options.get("n") or 1)
        palette = int(cfg.options.get("palette") or 2)
        c = Coloring.from_rule(P, n + 1, lambda t: rng.randrange(palette), tuple(range(palette)))
        doc = io.encode_ph_instance(PHInstance(P, c, n, cfg.options.get("mode") or "total"))
    elif what == "lis":
        N = int(cfg.options.get("size") or 6)
        doc = io.encode_lis(LayeredInjectionSystem.random([N, N], cfg.seed))
    elif what == "omega":
        doc = io.encode_omega(random_omega_system(rng, int(cfg.options.get("width") or 2),
                                                  int(cfg.options.get("height") or 2)))
    elif what == "system":
        P = random_index(rng)
        doc = io.encode_inverse_system(random_inverse_system(rng, P))
    elif what == "c-sequence":
        doc = io.encode_c_sequence(CSequence.random(int(cfg.options.get("size") or 6), rng))
    elif what == "trivialization":
        T, _, phi, k, kind = trivialization_instance(cfg.seed)
        doc = {"kind": "bundle", "items": {"system": io.encode_omega(T), "cocycle": io.encode_cochain(phi),
                                           "cutoff": {"kind": "cutoff", "k": k, "F": kind}}}
    else:
        raise Malformed([f"gen: unknown instance type {what!r}"])
    rep.result = doc


def cmd_validate(cfg: ExperimentConfig, rep: Report) -> None:
    out = {}
    for p in cfg.paths:
        path = fixture_path(p[8:]) if p.startswith("fixture:") else Path(p)
        try:
            doc = io.read_json(path)
        except io.InstanceError as exc:
            raise Malformed(exc.diagnostics) from None
        diags = io.validate_document(doc)
        try:
            io.decode(doc)
        except io.InstanceError:
            raise Malformed(diags) from None
        out[p] = diags
        rep.violations += [f"{p}: {d}" for d in diags]
    rep.result = {"diagnostics": out}


def cmd_search(cfg: ExperimentConfig, rep: Report) -> None:
    results = []
    for p in cfg.paths:
        _, inst = load_doc(p)
        expect(inst, (PHInstance,), "a ph_instance")
        probs = inst.problems()
        if probs:
            raise Malformed([f"{p}: {d}" for d in probs])
        out = find_witness(inst, budget=cfg.budget, workers=cfg.workers)
        cert = _strip_timing(out.certificate, rep.timing, f"{p}:")
        entry: dict = {"path": p, "status": out.status, "certificate": cert}
        if out.witness is not None:
            vr = verify_witness(inst, out.partial or out.witness)
            entry.update(color=io.enc_color(out.color), witness=_table(out.witness),
                         verification={"ok": vr.ok, "chains_checked": vr.chains_checked, "problems": vr.lines()})
            rep.violations += [f"{p}: {line}" for line in vr.lines()]
        if out.status == INCONCLUSIVE:
            rep.exit_code = EXIT_BUDGET
        results.append(entry)
    rep.result = results


def cmd_refute(cfg: ExperimentConfig, rep: Report) -> None:
    if cfg.paths:
        _, lis = load_doc(cfg.paths[0])
        expect(lis, (LayeredInjectionSystem,), "a layered_injection_system")
        probs = lis.problems()
        if probs:
            raise Malformed(probs)
        Ns = [int(cfg.options.get("size") or lis.sizes[1])]
        systems = [lis]
    else:
        Ns = list(range(2, int(cfg.options.get("size") or 8) + 1))
        systems = None
    rows = []
    for N in Ns:
        for s in (systems or [LayeredInjectionSystem.random([N, N], cfg.seed)]):
            cert = refute_injective_coloring(N, s)
            rows.append({"N": N, "scanned": cert.scanned, "monochromatic": cert.monochromatic,
                         "examples": [list(e) for e in cert.examples]})
            if not cert.ok:
                rep.violations.append(f"N={N}: {cert.monochromatic} monochromatic configurations")
    rep.result = rows


def cmd_homology(cfg: ExperimentConfig, rep: Report) -> None:
    rows = []
    for p in cfg.paths:
        _, Y = load_doc(p)
        expect(Y, (SimplicialComplex,), "a complex")
        verdicts = {}
        for n in range(max(Y.dim, 0) + 1):
            v = is_n_cycle(Y, n)
            verdicts[str(n)] = {"ok": v.ok, "reason": v.reason}
        rows.append({"path": p, "f_vector": Y.f_vector(), "z2_betti": z2_betti(Y), "is_n_cycle": verdicts})
    rep.result = rows


def _system_of(obj: Any) -> tuple[InverseSystem, TruncatedOmegaSystem | None]:
    if isinstance(obj, TruncatedOmegaSystem):
        probs = obj.problems()
        if probs:
            raise Malformed(probs)
        return obj.to_inverse_system(), obj
    expect(obj, (InverseSystem,), "an inverse_system or omega_system")
    return obj, None


def cmd_limn(cfg: ExperimentConfig, rep: Report) -> None:
    degrees = [int(x) for x in str(cfg.options.get("degrees") or "0,1,2").split(",")]
    rows = []
    for p in cfg.paths:
        _, obj = load_doc(p)
        X, T = _system_of(obj)
        probs = X.problems()
        if probs:
            raise Malformed([f"{p}: {d}" for d in probs])
        row: dict = {"path": p, "lim": {}}
        for n in degrees:
            t0 = time.perf_counter()
            L = lim_n(X, n)
            rep.timing[f"{p}:lim{n}_s"] = round(time.perf_counter() - t0, 6)
            row["lim"][str(n)] = {"torsion": sorted(L.torsion), "free_rank": L.free_rank,
                                  "invariant_factors": L.invariant_factors}
        if T is not None:
            row["additivity"] = {}
            for n in degrees:
                a = additivity_comparison(T.towers(), n)
                row["additivity"][str(n)] = {"is_isomorphism": a.is_isomorphism, "map": a.describe()}
                if not a.is_isomorphism:
                    rep.violations.append(f"{p}: additivity map in degree {n} is not an isomorphism")
        top = X.index.maximum()
        if top is not None:
            for n in degrees:
                if n >= 1 and not (row["lim"][str(n)]["free_rank"] == 0 and not row["lim"][str(n)]["torsion"]):
                    rep.violations.append(f"{p}: lim^{n} nonzero although the index has a top element")
        rows.append(row)
    rep.result = rows


def cmd_trivialize(cfg: ExperimentConfig, rep: Report) -> None:
    if cfg.paths:
        _, bundle = load_doc(cfg.paths[0])
        if not isinstance(bundle, dict) or "system" not in bundle or "cocycle" not in bundle:
            raise Malformed(["trivialize expects a bundle with 'system' and 'cocycle' items"])
        cut = bundle.get("cutoff", {"k": 0, "F": "constant-top"})
        T, phi = bundle["system"], bundle["cocycle"]
        k, kind = cut["k"], cut["F"]
    else:
        T, _, phi, k, kind = trivialization_instance(cfg.seed)
    expect(T, (TruncatedOmegaSystem,), "an omega_system")
    try:
        ctx = EvaluationContext(T, phi, k)
    except Exception as exc:
        raise Malformed([str(exc)]) from None
    F = constant_top_F(T) if kind == "constant-top" else tail_top_F(T, k)
    psi = trivialize_cocycle(ctx, F)
    cmp = compare_beyond(ctx, psi)
    rep.result = {"degree": phi.degree, "k": k, "F": kind, "seed_sign": validated_seed_sign(),
                  "psi": io.encode_cochain(psi), "ok": cmp.ok}
    rep.violations += cmp.lines() if not cmp.ok else []


def cmd_walks(cfg: ExperimentConfig, rep: Report) -> None:
    if cfg.paths:
        _, C = load_doc(cfg.paths[0])
        expect(C, (CSequence,), "a c_sequence")
        probs = C.problems()
        if probs:
            raise Malformed(probs)
        seqs = [C]
    else:
        N = int(cfg.options.get("size") or 5)
        samples = int(cfg.options.get("samples") or 0)
        rng = random.Random(cfg.seed)
        seqs = list(all_c_sequences(N)) if not samples else [CSequence.random(N, rng) for _ in range(samples)]
    bad = 0
    for C in seqs:
        v = triangle_violations(C)
        if v:
            bad += 1
            rep.violations.append(f"triangle inequality fails on {[sorted(c) for c in C.clubs]}: {v[:3]}")
    first = seqs[0]
    rep.result = {
        "sequences": len(seqs),
        "violating": bad,
        "rho2": [[rho2(first, a, b) for a in range(b + 1)] for b in range(first.N)],
        "metric": [[walk_metric(first, a, b) for a in range(b)] for b in range(first.N)],
    }


def cmd_sset_check(cfg: ExperimentConfig, rep: Report) -> None:
    rows = []
    for p in cfg.paths:
        _, inst = load_doc(p)
        expect(inst, (PHInstance,), "a ph_instance")
        t0 = time.perf_counter()
        a = simplicial_ph_check(inst.order, inst.coloring, inst.n, budget=cfg.budget)
        b = find_witness(PHInstance(inst.order, inst.coloring, inst.n, "partial-on-cofinal"), budget=cfg.budget)
        rep.timing[f"{p}:elapsed_s"] = round(time.perf_counter() - t0, 6)
        agree = a.found == b.found
        rows.append({"path": p, "simplicial": a.status, "table": b.status, "agree": agree})
        if INCONCLUSIVE in (a.status, b.status):
            rep.exit_code = EXIT_BUDGET
        elif not agree:
            rep.violations.append(f"{p}: engines disagree ({a.status} vs {b.status})")
    rep.result = rows


def cmd_report(cfg: ExperimentConfig, rep: Report) -> None:
    """A quick deterministic battery over seeded instances."""
    rng = random.Random(cfg.seed)
    summary: dict = {}
    # dual engines on a few random small orders
    agree = total = 0
    for size in (2, 3):
        for P in iter_orders(size):
            c = Coloring.from_rule(P, 2, lambda t: rng.randrange(2), (0, 1))
            a = simplicial_ph_check(P, c, 1, budget=cfg.budget)
            b = find_witness(PHInstance(P, c, 1, "partial-on-cofinal"), budget=cfg.budget)
            total += 1
            agree += a.found == b.found
    summary["dual_engine"] = {"instances": total, "agree": agree}
    if agree != total:
        rep.violations.append("dual-engine disagreement")
    # lim^n on a random system
    X = random_inverse_system(rng, random_index(rng, 5))
    summary["lim"] = {str(n): lim_n(X, n).invariant_factors for n in range(3)}
    # trivialization round trip
    T, _, phi, k, kind = trivialization_instance(cfg.seed)
    ctx = EvaluationContext(T, phi, k)
    psi = trivialize_cocycle(ctx, constant_top_F(T) if kind == "constant-top" else tail_top_F(T, k))
    ok = compare_beyond(ctx, psi).ok
    summary["trivialization"] = {"k": k, "F": kind, "ok": ok}
    if not ok:
        rep.violations.append("trivialization round trip failed")
    # walks
    viol = sum(1 for C in all_c_sequences(5) if triangle_violations(C))
    summary["walks_N5_violations"] = viol
    rep.result = summary


HANDLERS: dict[str, Callable[[ExperimentConfig, Report], None]] = {
    "gen": cmd_gen, "validate": cmd_validate, "search": cmd_search, "refute": cmd_refute,
    "homology": cmd_homology, "limn": cmd_limn, "trivialize": cmd_trivialize, "walks": cmd_walks,
    "sset-check": cmd_sset_check, "report": cmd_report,
}


# output -------------------------------------------------------------------------

def render(rep: Report, fmt: str) -> str:
    if fmt == "json":
        return io.dumps(rep.as_dict())
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for key, val in _flatten(rep.result):
            w.writerow([key, val])
        for v in rep.violations:
            w.writerow(["violation", v])
        return buf.getvalue()
    lines = [f"{rep.command}: exit {rep.exit_code}"]
    lines += [f"  {k} = {v}" for k, v in _flatten(rep.result)]
    lines += [f"  VIOLATION {v}" for v in rep.violations]
    return "\n".join(lines) + "\n"


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj, key=str):
            out += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        out = []
        for i, x in enumerate(obj):
            out += _flatten(x, f"{prefix}[{i}]")
        return out
    return [(prefix or "value", obj)]


def run(cfg: ExperimentConfig) -> tuple[int, Report]:
    rep = Report(cfg.command, {k: v for k, v in asdict(cfg).items() if k != "out"})
    probs = cfg.problems()
    if probs:
        rep.violations = probs
        rep.exit_code = EXIT_MALFORMED
        return EXIT_MALFORMED, rep
    t0 = time.perf_counter()
    try:
        HANDLERS[cfg.command](cfg, rep)
    except Malformed as exc:
        rep.violations = list(exc.diagnostics)
        rep.exit_code = EXIT_MALFORMED
    rep.timing["total_s"] = round(time.perf_counter() - t0, 6)
    if rep.exit_code == EXIT_OK and rep.violations:
        rep.exit_code = EXIT_VIOLATION
    return rep.exit_code, rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="limlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("paths", nargs="*", help="instance files (or fixture:NAME)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=200_000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    ap.add_argument("--format", default="json", choices=["json", "csv", "text"])
    ap.add_argument("--what", help="gen: ph, lis, omega, system, c-sequence, trivialization")
    ap.add_argument("--size", help="gen/refute/walks: size parameter")
    ap.add_argument("--samples", help="walks: number of sampled C-sequences")
    ap.add_argument("--n", help="gen: level n of the PH instance")
    ap.add_argument("--palette", help="gen: number of colors")
    ap.add_argument("--mode", help="gen: search mode")
    ap.add_argument("--width")
    ap.add_argument("--height")
    ap.add_argument("--degrees", help="limn: comma-separated degrees (default 0,1,2)")
    return ap


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("LIMLAB_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    opts = {k: getattr(args, k) for k in ("what", "size", "samples", "n", "palette", "mode", "width",
                                           "height", "degrees") if getattr(args, k) is not None}
    cfg = ExperimentConfig(args.command, list(args.paths), args.seed, args.budget, args.workers,
                           args.out, args.format, opts)
    code, rep = run(cfg)
    if cfg.command == "gen" and code == EXIT_OK and cfg.format == "json":
        # generated instances are written bare so they can be fed back in
        text = io.dumps(rep.result)
    else:
        text = render(rep, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for v in rep.violations[:20]:
        log.warning(v)
    return code


if __name__ == "__main__":
    sys.exit(main())

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from strategies import posets
from limlab.colorings import LayeredInjectionSystem
from limlab.order import (
    CofinalFunction,
    Coloring,
    FiniteQuasiOrder,
    OrderError,
    check_n_cofinal,
    enumerate_increasing_tuples,
    is_strictly_increasing,
    iter_orders,
    product_order,
)
from limlab.search import (
    INCONCLUSIVE,
    REFUTED,
    WITNESS,
    PHInstance,
    brute_force_satisfiable,
    cofinal_subsets,
    find_witness,
    project_color,
    refute_injective_coloring,
    strictify,
    verify_witness,
)


def _random_coloring(P, arity, rng, palette=2):
    return Coloring.from_rule(P, arity, lambda t: rng.randrange(palette), tuple(range(palette)))


def _c_tilde_one(P, sys):
    # c(α,β) = f_β(α) for α < β; the diagonal gets its own color
    return Coloring.from_rule(P, 2, lambda t: -1 if t[0] == t[1] else sys.h(1, t[1], t[0]))


# strictify -------------------------------------------------------------------

def test_strictify_constant_on_three_chain():
    P = FiniteQuasiOrder.chain(3)
    d = strictify(Coloring.constant(P, 2), P)
    assert len(set(d.table.values())) <= 2
    assert d((0, 0)) == (0, 0) and d((0, 1)) == (0, 1)


@given(posets(max_size=4), st.integers(0, 2**32))
def test_strictify_projects_to_the_original(P, seed):
    c = _random_coloring(P, 2, random.Random(seed))
    d = strictify(c, P)
    for t in c.table:
        assert project_color(d(t)) == c(t)
        assert d(t)[1] == int(is_strictly_increasing(P, t))


def test_strictify_witness_on_five_chain_is_strictly_increasing():
    P = FiniteQuasiOrder.chain(5)
    c = _random_coloring(P, 2, random.Random(1))
    out = find_witness(PHInstance(P, strictify(c, P), 1, "strictly-increasing", (0, 1)))
    assert out.found
    F = out.witness
    assert all(is_strictly_increasing(P, F.star(ch)) for ch in _chains(P, F))
    proj = verify_witness(PHInstance(P, c, 1, "strictly-increasing", (0, 1)), F)
    assert proj.ok and proj.color == project_color(out.color)


def _chains(P, F):
    from limlab.order import enumerate_chains
    return enumerate_chains(P, F.arity, sorted(F.restriction) if F.restriction else None, F.space)


@settings(max_examples=40)
@given(posets(max_size=5), st.integers(0, 2), st.integers(1, 3), st.integers(0, 2**32))
def test_strictify_witnesses_project(P, n, palette, seed):
    c = _random_coloring(P, n + 1, random.Random(seed), palette)
    out = find_witness(PHInstance(P, strictify(c, P), n, "strictly-increasing"), budget=5_000)
    if not out.found:
        return
    rep = verify_witness(PHInstance(P, c, n, "strictly-increasing"), out.witness)
    assert rep.ok and rep.color == project_color(out.color)


# find_witness ----------------------------------------------------------------

def test_lattice_with_top_gets_the_constant_top():
    P = product_order([2, 3])
    c = _random_coloring(P, 2, random.Random(0))
    out = find_witness(PHInstance(P, c, 1))
    assert out.status == WITNESS
    assert set(out.witness.table.values()) == {P.maximum()}
    assert out.certificate["shortcut"] == "constant maximum"


def test_c_tilde_on_five_chain_is_refuted():
    P = FiniteQuasiOrder.chain(5)
    sys = LayeredInjectionSystem.random((5, 5), 2)
    inst = PHInstance(P, _c_tilde_one(P, sys), 1, "strictly-increasing", (1, 3))
    out = find_witness(inst)
    assert out.status == REFUTED
    assert out.certificate["nodes"] > 0
    assert not brute_force_satisfiable(inst)


@pytest.mark.parametrize("mode", ["total", "partial-on-cofinal"])
def test_constant_coloring_always_has_a_witness(mode):
    for P in itertools.chain(*(iter_orders(k) for k in range(1, 5)), [FiniteQuasiOrder.antichain(3)]):
        out = find_witness(PHInstance(P, Coloring.constant(P, 2, "x"), 1, mode))
        assert out.status == WITNESS and out.color == "x"


@pytest.mark.parametrize("N", [4, 5, 6])
def test_constant_coloring_strict_mode_with_room(N):
    P = FiniteQuasiOrder.chain(N)
    out = find_witness(PHInstance(P, Coloring.constant(P, 2, "x"), 1, "strictly-increasing", (0, 1)))
    assert out.status == WITNESS and out.color == "x"


def test_strict_mode_on_a_whole_finite_chain_has_no_room():
    # F(N-1) = N-1 leaves nothing strictly above it for F(0, N-1)
    P = FiniteQuasiOrder.chain(4)
    out = find_witness(PHInstance(P, Coloring.constant(P, 2), 1, "strictly-increasing"))
    assert out.status == REFUTED


def test_budget_exhaustion_is_inconclusive():
    P = FiniteQuasiOrder.antichain(3)
    c = _random_coloring(P, 2, random.Random(3))
    out = find_witness(PHInstance(P, c, 1, "strictly-increasing"), budget=1)
    assert out.status in (INCONCLUSIVE, REFUTED)
    P = FiniteQuasiOrder.from_relation(5, [(0, 2), (1, 2), (0, 3), (1, 3)])
    c = _random_coloring(P, 3, random.Random(5))
    out = find_witness(PHInstance(P, c, 2, "partial-on-cofinal"), budget=3)
    assert out.status == INCONCLUSIVE and out.certificate["budget"] == 3


def test_bad_instances_are_rejected():
    P = FiniteQuasiOrder.chain(3)
    with pytest.raises(OrderError):
        PHInstance(P, Coloring.constant(P, 3), 1)
    with pytest.raises(OrderError):
        PHInstance(P, Coloring.constant(P, 2), 1, "sideways")


def test_require_color():
    P = FiniteQuasiOrder.chain(4)
    c = Coloring.from_rule(P, 2, lambda t: int(t[1] == 3), (0, 1))
    # F(3) = 3 forces the chain ((3,), (3, 3)) to color 1
    assert find_witness(PHInstance(P, c, 1), require_color=0).status == REFUTED
    out = find_witness(PHInstance(P, c, 1), require_color=1)
    assert out.found and out.color == 1


@settings(max_examples=30)
@given(posets(max_size=5), st.integers(1, 2), st.integers(0, 2**32))
def test_workers_do_not_change_the_witness(P, n, seed):
    c = _random_coloring(P, n + 1, random.Random(seed))
    for mode in ("total", "partial-on-cofinal"):
        inst = PHInstance(P, c, n, mode)
        a = find_witness(inst, budget=20_000, workers=1)
        b = find_witness(inst, budget=20_000, workers=3)
        assert a.status == b.status and a.color == b.color
        if a.found:
            assert dict(a.witness.table) == dict(b.witness.table)


@settings(max_examples=60)
@given(posets(max_size=5), st.integers(0, 2), st.integers(1, 3), st.integers(0, 2**32),
       st.sampled_from(["total", "partial-on-cofinal", "strictly-increasing"]))
def test_every_witness_verifies(P, n, palette, seed, mode):
    c = _random_coloring(P, n + 1, random.Random(seed), palette)
    inst = PHInstance(P, c, n, mode)
    out = find_witness(inst, budget=5_000)
    if out.found:
        assert verify_witness(inst, out.partial or out.witness).ok
        assert check_n_cofinal(P, out.witness, strict=(mode == "strictly-increasing")).ok
        if mode == "partial-on-cofinal" and out.certificate.get("extended"):
            full = PHInstance(P, c, n, "total")
            assert verify_witness(full, out.witness).ok


def _small_instances(max_size=4):
    for k in range(1, max_size + 1):
        for idx, P in enumerate(iter_orders(k)):
            rng = random.Random(1000 * k + idx)
            yield P, _random_coloring(P, 2, rng)


@pytest.mark.parametrize("mode", ["total", "partial-on-cofinal"])
def test_refutations_agree_with_the_oracle(mode):
    seen = {WITNESS: 0, REFUTED: 0}
    for P, c in _small_instances():
        out = find_witness(PHInstance(P, c, 1, mode))
        assert out.status != INCONCLUSIVE
        want = oracles.brute_ph1(P.leq, P.elements, dict(c.table),
                                 "total" if mode == "total" else "partial")
        assert out.found == want
        seen[out.status] += 1
    assert seen[WITNESS] and seen[REFUTED]


def test_brute_force_satisfiable_agrees_with_oracle_on_tiny_orders():
    for P, c in _small_instances(3):
        for mode in ("total", "partial-on-cofinal"):
            want = oracles.brute_ph1(P.leq, P.elements, dict(c.table),
                                     "total" if mode == "total" else "partial")
            assert brute_force_satisfiable(PHInstance(P, c, 1, mode)) == want


# verify_witness --------------------------------------------------------------

def test_verify_lists_monotonicity_violation():
    P = FiniteQuasiOrder.chain(3)
    c = Coloring.constant(P, 2)
    F = CofinalFunction.from_rule(P, 2, lambda t: 2)
    table = dict(F.table)
    table[(0,)] = 1
    table[(0, 0)] = 0
    rep = verify_witness(PHInstance(P, c, 1), CofinalFunction(2, table))
    assert not rep.ok and any("(0,)" in line and "(0, 0)" in line for line in rep.cofinality)


def test_verify_lists_the_single_bad_chain():
    P = FiniteQuasiOrder.chain(3)
    c = Coloring.from_rule(P, 2, lambda t: int(t == (1, 2)), (0, 1))
    # F = max is cofinal and only the chain ((1,), (1, 2)) lands on (1, 2)
    F = CofinalFunction.from_rule(P, 2, max)
    rep = verify_witness(PHInstance(P, c, 1), F)
    assert rep.cofinality == []
    assert rep.color == 0
    assert [ch for ch, _ in rep.color_violations] == [((1,), (1, 2))]
    assert rep.chains_checked == 9


def test_cofinal_subsets_of_v_shape():
    P = FiniteQuasiOrder.from_relation(3, [(0, 1), (0, 2)])
    subs = cofinal_subsets(P)
    assert subs[0] == tuple(P.linear_extension)
    assert all(set(s) >= {1, 2} for s in subs)
    assert len(subs) == 2


# refutation of c~_1 ----------------------------------------------------------

@pytest.mark.parametrize("N", [3, 4])
def test_refutation_certificates(N):
    sys = LayeredInjectionSystem.random((N, N), 7)
    cert = refute_injective_coloring(N, sys)
    assert cert.ok and cert.monochromatic == 0 and cert.scanned > 0


def test_refutation_is_vacuous_at_two():
    cert = refute_injective_coloring(2, LayeredInjectionSystem.random((2, 2), 0))
    assert cert.scanned == 0 and cert.ok


def test_refutation_scan_size_matches_count():
    N = 6
    cert = refute_injective_coloring(N, LayeredInjectionSystem.random((N, N), 3))
    want = sum(1 for a, b in itertools.combinations(range(N), 2)
               for fa, fb, fab in itertools.product(range(N), repeat=3)
               if a <= fa < fb < fab and b <= fb)
    assert cert.scanned == want


def test_refutation_detects_a_non_injective_system():
    sys = LayeredInjectionSystem((4, 4), ((), ((), (0,), (0, 0), (0, 0, 0))))
    cert = refute_injective_coloring(4, sys)
    assert not cert.ok and cert.examples


def test_strict_instances_cover_the_whole_tuple_space():
    P = FiniteQuasiOrder.chain(4)
    inst = PHInstance(P, Coloring.constant(P, 2), 1, "strictly-increasing", (0, 1))
    out = find_witness(inst)
    assert set(out.witness.table) == {t for k in (1, 2)
                                      for t in enumerate_increasing_tuples(P, k, [0, 1], strict=True)}

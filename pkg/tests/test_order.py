from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from strategies import posets, quasi_orders, random_cofinal_table
from limlab.order import (
    CofinalFunction,
    Coloring,
    DomainError,
    FiniteQuasiOrder,
    GradedOrderFamily,
    OrderError,
    PreconditionError,
    apply_F_star,
    check_n_cofinal,
    dominating_retraction,
    enumerate_chains,
    enumerate_increasing_tuples,
    extend_partial_witness,
    is_increasing,
    iter_orders,
    product_order,
    transfer_witness,
)
from limlab.search import PHInstance, find_witness, verify_witness

C3 = FiniteQuasiOrder.chain(3)


# enumeration -----------------------------------------------------------------

def test_increasing_tuples_examples():
    assert len(enumerate_increasing_tuples(C3, 2)) == 6
    assert enumerate_increasing_tuples(C3, 1) == [(0,), (1,), (2,)]
    assert enumerate_increasing_tuples(FiniteQuasiOrder.antichain(2), 2) == [(0, 0), (1, 1)]


def test_increasing_tuples_reject_zero_length():
    with pytest.raises(OrderError):
        enumerate_increasing_tuples(C3, 0)


def test_chain_examples():
    assert len(enumerate_chains(C3, 2)) == 9
    assert enumerate_chains(C3, 1) == [((0,),), ((1,),), ((2,),)]
    assert len(enumerate_chains(FiniteQuasiOrder.chain(2), 2)) == 4


@given(quasi_orders(max_size=4), st.integers(1, 3))
def test_increasing_tuples_match_filtered_product(P, n):
    got = enumerate_increasing_tuples(P, n)
    want = oracles.weak_tuples(P.leq, n, P.linear_extension)
    assert got == want  # same set and the same lexicographic order


@given(quasi_orders(max_size=4), st.integers(1, 3))
def test_chain_count_matches_brute_force(P, n):
    assert len(enumerate_chains(P, n)) == oracles.chain_count(P.leq, n, P.linear_extension)


@given(quasi_orders(max_size=5))
def test_quasi_orders_validate_and_extension_refines(P):
    assert P.validate() == []
    for x, y in itertools.product(P.elements, repeat=2):
        if P.lt(x, y):
            assert P.rank(x) < P.rank(y)


def test_validate_flags_non_transitive_relation():
    bad = FiniteQuasiOrder(((True, True, False), (False, True, True), (False, False, True)))
    assert any("transitive" in p for p in bad.validate())


def test_meet_axioms_on_product_lattice():
    P = product_order([2, 3])
    assert P.validate() == []
    assert P.maximum() is not None


def test_iter_orders_counts():
    assert [sum(1 for _ in iter_orders(k)) for k in range(1, 5)] == [1, 2, 7, 40]


def test_graded_family_leq_k():
    G = GradedOrderFamily(length=3, height=3)
    for x, y in itertools.product(G.points(), repeat=2):
        for k in range(3):
            assert G.leq_k(x, y, k) == all(x[i] <= y[i] for i in range(k, 3))
            if G.leq_k(x, y, 0):
                assert G.leq_k(x, y, k)


# cofinality ------------------------------------------------------------------

def test_constant_top_is_cofinal():
    F = CofinalFunction.from_rule(C3, 2, lambda t: 2)
    assert check_n_cofinal(C3, F).ok


def test_deletion_law_violation_is_reported():
    table = {t: 2 for t in CofinalFunction.from_rule(C3, 2, lambda t: 2).table}
    table[(1,)] = 1
    table[(0, 1)] = 0
    rep = check_n_cofinal(C3, CofinalFunction(2, table))
    assert ((1,), (0, 1)) in rep.monotonicity_violations


def test_identity_and_join_is_cofinal_on_a_lattice():
    P = product_order([2, 2])
    F = CofinalFunction.from_rule(P, 2, lambda t: t[0] if len(t) == 1 else P.join[t[0]][t[1]])
    assert check_n_cofinal(P, F).ok


def test_tuple_outside_domain_is_a_domain_error():
    F = CofinalFunction(1, {(0,): 0, (5,): 0})
    with pytest.raises(DomainError):
        check_n_cofinal(C3, F)


@given(quasi_orders(max_size=4), st.integers(1, 2), st.integers(0, 2**32))
def test_check_n_cofinal_matches_oracle(P, arity, seed):
    rng = random.Random(seed)
    F = CofinalFunction.from_rule(P, arity, lambda t: rng.choice(list(P.elements)))
    bad = oracles.cofinality_violations(P.leq, dict(F.table))
    assert check_n_cofinal(P, F).ok == (bad == 0)


# F* --------------------------------------------------------------------------

def test_F_star_examples():
    top = CofinalFunction.from_rule(C3, 2, lambda t: 2)
    assert all(apply_F_star(top, s) == (2, 2) for s in enumerate_chains(C3, 2))
    F = CofinalFunction.from_rule(C3, 2, lambda t: max(t))
    assert apply_F_star(F, ((0,), (0, 1))) == (0, 1)
    one = CofinalFunction.from_rule(C3, 1, lambda t: t[0])
    assert apply_F_star(one, ((1,),)) == (1,)


def test_F_star_outside_domain():
    F = CofinalFunction.from_rule(C3, 1, lambda t: t[0], restriction=[1, 2])
    with pytest.raises(DomainError):
        apply_F_star(F, ((0,),))


@given(quasi_orders(max_size=4), st.integers(1, 3), st.integers(0, 2**32))
def test_F_star_is_weakly_increasing(P, n, seed):
    table = random_cofinal_table(P, n, random.Random(seed))
    assume(table is not None)
    F = CofinalFunction(n, table)
    assert check_n_cofinal(P, F).ok
    for sigma in enumerate_chains(P, n):
        assert is_increasing(P, apply_F_star(F, sigma))


# witness extension -------------------------------------------------------------

def test_extend_from_top_singleton():
    c = Coloring.constant(C3, 2)
    F = CofinalFunction.from_rule(C3, 2, lambda t: 2, restriction=[2])
    out = extend_partial_witness(C3, c, F)
    assert set(out.table.values()) == {2}
    assert check_n_cofinal(C3, out).ok


def test_extend_precomposes_with_retraction():
    c = Coloring.constant(C3, 2)
    F = CofinalFunction.from_rule(C3, 2, lambda t: max(t), restriction=[1, 2])
    assert dominating_retraction(C3, [1, 2]) == {0: 1, 1: 1, 2: 2}
    out = extend_partial_witness(C3, c, F)
    assert out((0,)) == F((1,)) and out((0, 2)) == F((1, 2)) and out((0, 0)) == F((1, 1))


def test_extend_with_full_domain_is_identity():
    c = Coloring.constant(C3, 2)
    F = CofinalFunction.from_rule(C3, 2, lambda t: 2)
    assert extend_partial_witness(C3, c, F) is F


def test_extend_rejects_non_cofinal_upsilon():
    c = Coloring.constant(C3, 2)
    F = CofinalFunction.from_rule(C3, 2, lambda t: max(t), restriction=[0, 1])
    with pytest.raises(PreconditionError):
        extend_partial_witness(C3, c, F)


def _orders_upto(k):
    for size in range(1, k + 1):
        yield from iter_orders(size)


@pytest.mark.parametrize("n", [0, 1])
def test_extend_partial_witness_exhaustive(n):
    """Every order with <= 5 elements: extend the partial witness found on a cofinal Υ."""
    checked = 0
    for idx, P in enumerate(_orders_upto(5)):
        rng = random.Random(idx)
        c = Coloring.from_rule(P, n + 1, lambda t: rng.randrange(2), palette=(0, 1))
        out = find_witness(PHInstance(P, c, n, "partial-on-cofinal"), budget=20_000)
        if out.partial is None:
            continue
        try:
            ext = extend_partial_witness(P, c, out.partial)
        except PreconditionError:
            # no monotone retraction onto this Υ; ledgered
            continue
        assert check_n_cofinal(P, ext).ok
        colors = {c(ext.star(s)) for s in enumerate_chains(P, n + 1)}
        assert colors == {out.color}
        checked += 1
    assert checked >= 100


def test_extend_partial_witness_exhaustive_n2():
    """n = 2 over every order with <= 5 elements; Υ = maximal elements plus random extras."""
    checked = 0
    for idx, P in enumerate(_orders_upto(5)):
        rng = random.Random(idx)
        c = Coloring.constant(P, 3)
        ups = sorted(set(P.maximal_elements()) | {x for x in P.elements if rng.random() < 0.4},
                     key=P.rank)
        sub = P.restrict(ups)
        table = random_cofinal_table(sub, 3, rng)
        if table is None:
            continue
        F = CofinalFunction(3, {tuple(ups[i] for i in t): ups[v] for t, v in table.items()}
                            | {(u,): u for u in ups}, frozenset(ups))
        assert check_n_cofinal(P, F).ok
        try:
            ext = extend_partial_witness(P, c, F)
        except PreconditionError:
            # no monotone retraction onto Υ; ledgered
            continue
        assert check_n_cofinal(P, ext).ok
        assert {c(ext.star(s)) for s in enumerate_chains(P, 3)} == {0}
        checked += 1
    assert checked > 100


# transfer ------------------------------------------------------------------

def test_transfer_identity():
    F = CofinalFunction.from_rule(C3, 2, lambda t: max(t))
    out = transfer_witness(C3, C3, [0, 1, 2], F)
    assert dict(out.table) == dict(F.table)


def test_transfer_to_two_chain():
    P, Q = FiniteQuasiOrder.chain(4), FiniteQuasiOrder.chain(2)
    f = [int(x >= 2) for x in P.elements]
    F = CofinalFunction.from_rule(P, 2, lambda t: min(3, max(t) + 1))
    out = transfer_witness(P, Q, f, F)
    assert check_n_cofinal(Q, out).ok


def test_transfer_preserves_monochromaticity_from_antichain():
    P = FiniteQuasiOrder.from_relation(4, [(0, 2), (1, 2), (0, 3), (1, 3)])
    Q = FiniteQuasiOrder.chain(2)
    f = [0, 0, 1, 1]
    for bits in itertools.product((0, 1), repeat=3):
        cq = Coloring(2, dict(zip(enumerate_increasing_tuples(Q, 2), bits)), (0, 1))
        cp = Coloring.from_rule(P, 2, lambda t: cq((f[t[0]], f[t[1]])), palette=(0, 1))
        out = find_witness(PHInstance(P, cp, 1))
        if not out.found:
            continue
        moved = transfer_witness(P, Q, f, out.witness)
        rep = verify_witness(PHInstance(Q, cq, 1), moved)
        assert rep.ok and rep.color == out.color


def test_transfer_rejects_non_monotone_and_non_cofinal():
    P, Q = FiniteQuasiOrder.chain(3), FiniteQuasiOrder.chain(2)
    F = CofinalFunction.from_rule(P, 1, lambda t: 2)
    with pytest.raises(PreconditionError):
        transfer_witness(P, Q, [1, 0, 0], F)
    with pytest.raises(PreconditionError):
        transfer_witness(P, Q, [0, 0, 0], F)


@given(posets(max_size=5), st.integers(2, 3), st.integers(1, 2), st.integers(0, 2**32))
def test_transfer_output_is_cofinal(P, h, arity, seed):
    rng = random.Random(seed)
    Q = FiniteQuasiOrder.chain(h)
    f = [min(h - 1, sum(1 for y in P.elements if P.lt(y, x))) for x in P.elements]
    assume(h - 1 in f)
    table = random_cofinal_table(P, arity, rng)
    assume(table is not None)
    out = transfer_witness(P, Q, f, CofinalFunction(arity, table))
    assert check_n_cofinal(Q, out).ok

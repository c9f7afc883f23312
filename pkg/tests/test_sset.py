from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from strategies import posets, quasi_orders
from limlab.order import Coloring, FiniteQuasiOrder, OrderError, iter_orders, product_order
from limlab.search import REFUTED, WITNESS, PHInstance, find_witness, verify_witness
from limlab.sset import (
    F_to_S,
    S_to_F,
    ex_nerve_level,
    is_monotone_face,
    maximal_chain_values,
    nerve_level,
    restrict_face,
    simplicial_ph_check,
    spans_neatly,
    subset_index,
    vertex_set,
)

C2 = FiniteQuasiOrder.chain(2)
C3 = FiniteQuasiOrder.chain(3)
A2 = FiniteQuasiOrder.antichain(2)


# levels ---------------------------------------------------------------------

def test_nerve_examples():
    L = nerve_level(C3, 1)
    assert len(L.faces) == 6 and len(L.nondegenerate()) == 3
    assert nerve_level(C3, 0).faces == ((0,), (1,), (2,))
    L = nerve_level(A2, 1)
    assert L.faces == ((0, 0), (1, 1)) and L.nondegenerate() == []
    with pytest.raises(OrderError):
        nerve_level(C3, -1)


def test_ex_examples():
    assert len(ex_nerve_level(C2, 1).faces) == 5
    assert len(ex_nerve_level(C3, 0).faces) == 3
    assert ex_nerve_level(A2, 1).faces == ((0, 0, 0), (1, 1, 1))
    assert subset_index(1) == ((0,), (1,), (0, 1))
    with pytest.raises(OrderError):
        ex_nerve_level(C3, -1)


def test_vertex_set_examples():
    assert vertex_set((0, 1, 1)) == {0, 1}
    assert vertex_set((0, 2, 3), 1) == {0, 2}
    assert vertex_set((4, 4, 4), 1) == {4}


@given(quasi_orders(max_size=4), st.integers(0, 2))
def test_nerve_count_matches_filtered_product(P, n):
    want = oracles.weak_tuples(P.leq, n + 1, P.linear_extension)
    assert set(nerve_level(P, n).faces) == set(want)


@settings(max_examples=30)
@given(posets(max_size=3), st.integers(0, 2))
def test_ex_count_matches_filtered_product(P, n):
    subsets = subset_index(n)
    pos = {s: i for i, s in enumerate(subsets)}
    want = 0
    for vals in itertools.product(P.elements, repeat=len(subsets)):
        if all(P.le(vals[pos[s[:i] + s[i + 1:]]], vals[pos[s]])
               for s in subsets if len(s) > 1 for i in range(len(s))):
            want += 1
    assert len(ex_nerve_level(P, n).faces) == want


@given(posets(max_size=4), st.integers(1, 2))
def test_ex_faces_are_monotone_and_closed_under_faces(P, n):
    lower = set(ex_nerve_level(P, n - 1).faces)
    for f in ex_nerve_level(P, n).faces:
        assert is_monotone_face(P, f, n)
        for J in itertools.combinations(range(n + 1), n):
            assert restrict_face(f, n, J) in lower
        for chain in maximal_chain_values(f, n):
            assert all(P.le(a, b) for a, b in zip(chain, chain[1:]))


# spanning --------------------------------------------------------------------

def test_empty_family_does_not_span():
    rep = spans_neatly([], [0, 1], 1, C2)
    assert not rep.ok and (0, 1) in rep.missing


def test_collision_is_a_neatness_defect():
    P = FiniteQuasiOrder.chain(3)
    # two faces with vertex tuple (0, 1) but different tops
    rep = spans_neatly([(0, 1, 1), (0, 1, 2)], [0, 1], 1, P)
    assert rep.neatness and not rep.ok
    # a shared edge inside two 2-faces
    f = (0, 1, 2, 1, 2, 2, 2)
    g = (0, 1, 2, 2, 2, 2, 2)
    assert is_monotone_face(P, f, 2) and is_monotone_face(P, g, 2)
    assert spans_neatly([f, g], [0, 1, 2], 2, P).neatness


def test_set_reading_ignores_repeats():
    P = C3
    S = [(0, 1, 2), (0, 2, 2), (1, 2, 2)]
    assert spans_neatly(S, [0, 1, 2], 1, P, reading="sets").ok
    assert not spans_neatly(S, [0, 1, 2], 1, P).ok
    with pytest.raises(OrderError):
        spans_neatly(S, [0], 1, P, reading="bags")


@settings(max_examples=40)
@given(posets(max_size=5), st.integers(0, 2), st.integers(0, 2**32))
def test_witness_round_trip(P, n, seed):
    rng = random.Random(seed)
    c = Coloring.from_rule(P, n + 1, lambda t: rng.randrange(2), (0, 1))
    out = find_witness(PHInstance(P, c, n, "partial-on-cofinal"), budget=5_000)
    if not out.found:
        return
    F = out.partial or out.witness
    T = sorted(F.restriction) if F.restriction else list(P.elements)
    S = F_to_S(F, P, n, T)
    assert spans_neatly(S, T, n, P).ok
    G = S_to_F(S, P, n, T)
    assert all(G.table[t] == F.table[t] for t in G.table)
    assert verify_witness(PHInstance(P, c, n, "partial-on-cofinal"), G).ok


# the simplicial engine --------------------------------------------------------

def test_lattice_with_top_is_satisfiable():
    P = product_order([2, 2])
    c = Coloring.from_rule(P, 2, lambda t: sum(t) % 2, (0, 1))
    a = simplicial_ph_check(P, c, 1)
    assert a.status == WITNESS
    assert find_witness(PHInstance(P, c, 1, "partial-on-cofinal")).status == WITNESS
    assert verify_witness(PHInstance(P, c, 1, "partial-on-cofinal"), a.witness).ok


@pytest.mark.parametrize("n", [0, 1, 2])
def test_constant_coloring_is_satisfiable(n):
    for P in itertools.chain(iter_orders(3), [A2]):
        out = simplicial_ph_check(P, Coloring.constant(P, n + 1, "k"), n)
        assert out.status == WITNESS and out.color == "k"


def test_arity_mismatch():
    with pytest.raises(OrderError):
        simplicial_ph_check(C3, Coloring.constant(C3, 3), 1)


def test_engines_agree_on_all_orders_of_size_three():
    seen = {WITNESS: 0, REFUTED: 0}
    for P in itertools.chain(*(iter_orders(k) for k in range(1, 4))):
        tuples = sorted(Coloring.constant(P, 2).table)
        for bits in itertools.product((0, 1), repeat=len(tuples)):
            c = Coloring(2, dict(zip(tuples, bits)), (0, 1))
            a = simplicial_ph_check(P, c, 1)
            b = find_witness(PHInstance(P, c, 1, "partial-on-cofinal"))
            assert a.status == b.status, (P, bits)
            seen[a.status] += 1
            if a.found:
                assert verify_witness(PHInstance(P, c, 1, "partial-on-cofinal"), a.witness).ok
    assert seen[WITNESS] and seen[REFUTED]


@settings(max_examples=25)
@given(posets(max_size=4), st.integers(0, 2**32))
def test_engines_agree_at_n_two(P, seed):
    rng = random.Random(seed)
    c = Coloring.from_rule(P, 3, lambda t: rng.randrange(2), (0, 1))
    a = simplicial_ph_check(P, c, 2, budget=50_000)
    b = find_witness(PHInstance(P, c, 2, "partial-on-cofinal"), budget=50_000)
    if a.status in (WITNESS, REFUTED) and b.status in (WITNESS, REFUTED):
        assert a.status == b.status

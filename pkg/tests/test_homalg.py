from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from limlab.generators import (
    downset_system,
    meet_orders,
    random_cochain,
    random_index,
    random_inverse_system,
    random_omega_system,
    upset_system,
    v_shape,
)
from limlab.homalg import (
    AlternatingCochain,
    FGAbelianGroup,
    InverseSystem,
    StructureError,
    additivity_comparison,
    coboundary,
    coboundary_matrix,
    cochain_is_zero,
    direct_sum_system,
    lim_n,
)
from limlab.order import FiniteQuasiOrder, product_order
from limlab.snf import matmul, matvec


def _tower_two_chain():
    P = FiniteQuasiOrder.chain(2)
    return InverseSystem.constant(P, FGAbelianGroup.free(1))


def _lattices_with_top():
    out = [P for P in meet_orders(4) if P.maximum() is not None]
    out += [product_order([2, 2]), product_order([2, 3]), product_order([3, 3])]
    return out


# coboundary ----------------------------------------------------------------

def test_degree_zero_difference():
    X = _tower_two_chain()
    d = coboundary(X, AlternatingCochain(0, {(0,): [5], (1,): [8]}))
    assert d.values == {(0, 1): [8 - 5]}


def test_zero_cochain():
    X = InverseSystem.constant(product_order([2, 2]), FGAbelianGroup.diagonal([0, 3]))
    phi = AlternatingCochain(1, {t: [0, 0] for t in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))})
    assert cochain_is_zero(X, coboundary(X, phi))


def _system(seed, max_size=6, max_rank=3):
    rng = random.Random(seed)
    P = random_index(rng, max_size)
    return rng, random_inverse_system(rng, P, rng.randint(1, 2), max_rank)


@settings(max_examples=40)
@given(st.integers(0, 2**32), st.integers(0, 3))
def test_d_squared_is_zero(seed, n):
    rng, X = _system(seed)
    assert X.problems() == []
    phi = random_cochain(rng, X, n)
    assert cochain_is_zero(X, coboundary(X, coboundary(X, phi)))
    A, B = coboundary_matrix(X, n + 1), coboundary_matrix(X, n)
    if A and B and A[0] and B[0]:
        assert all(v == 0 for row in matmul(A, B) for v in row)


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.integers(0, 2))
def test_sparse_and_matrix_coboundaries_agree(seed, n):
    from limlab.homalg import CochainLayout
    rng, X = _system(seed)
    phi = random_cochain(rng, X, n)
    src, dst = CochainLayout(X, n), CochainLayout(X, n + 1)
    if dst.size == 0:
        return
    assert matvec(coboundary_matrix(X, n), phi.vector(src)) == coboundary(X, phi).vector(dst)
    assert coboundary_matrix(X, n) == [list(map(int, r)) for r in oracles.dense_coboundary(X, n).tolist()]


# lim^n --------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_higher_lims_vanish_with_a_top(n):
    rng = random.Random(n)
    for P in _lattices_with_top():
        X = random_inverse_system(rng, P, 2, 2)
        assert lim_n(X, n).is_trivial(), (P, n)


def test_lim0_is_the_top_term():
    rng = random.Random(0)
    for P in _lattices_with_top():
        X = random_inverse_system(rng, P, 2, 2)
        L = lim_n(X, 0)
        assert (L.torsion, L.free_rank) == X.terms[P.maximum()].invariants()


def test_grid_mixed_terms_matches_oracle():
    P = product_order([2, 2])
    X = random_inverse_system(random.Random(11), P, 2, 2, orders=(0, 3, 9))
    for n in range(3):
        L = lim_n(X, n)
        assert (sorted(L.torsion), L.free_rank) == oracles.dense_lim(X, n)


def test_v_shape_has_nonzero_lim0_sum():
    # two free arms over a free bottom: lim^0 = Z (pairs agreeing at the bottom), lim^1 = 0
    P = v_shape(2)
    X = InverseSystem.constant(P, FGAbelianGroup.free(1))
    assert (lim_n(X, 0).torsion, lim_n(X, 0).free_rank) == ([], 1)
    assert lim_n(X, 1).is_trivial()


def test_upset_system_on_antichain_like_v():
    # lim^1 of the up-set system on a V is computed by both routes
    X = upset_system(v_shape(3), 3)
    for n in range(3):
        L = lim_n(X, n)
        assert (sorted(L.torsion), L.free_rank) == oracles.dense_lim(X, n)


@pytest.mark.parametrize("seed", range(20))
def test_lim_matches_dense_oracle(seed):
    rng = random.Random(seed)
    P = random_index(rng, 5)
    X = random_inverse_system(rng, P, 2, 2)
    for n in range(3):
        L = lim_n(X, n)
        assert (sorted(L.torsion), L.free_rank) == oracles.dense_lim(X, n), (seed, n)


def test_lim0_count_matches_enumeration():
    for P in [FiniteQuasiOrder.chain(2), v_shape(2), product_order([2, 2])]:
        X = downset_system(P, 3)
        L = lim_n(X, 0)
        assert L.free_rank == 0
        size = 1
        for d in L.torsion:
            size *= d
        assert size == oracles.brute_lim0_order(X)


def test_generators_are_cocycles():
    rng = random.Random(3)
    X = random_inverse_system(rng, v_shape(3), 2, 2)
    for n in range(3):
        L = lim_n(X, n)
        for g, d in L.generators:
            img = coboundary(X, AlternatingCochain.from_vector(L.layout, g))
            assert cochain_is_zero(X, img)
            coords = L.coordinates(g)
            assert any(coords)


def test_negative_degree_rejected():
    with pytest.raises(StructureError):
        lim_n(_tower_two_chain(), -1)


# direct sums and additivity ------------------------------------------------

def test_direct_sum_of_one_and_zero_systems():
    X = _tower_two_chain()
    S = direct_sum_system([X])
    assert S.terms == X.terms and dict(S.bonds) == dict(X.bonds)
    Z = direct_sum_system([], index=X.index)
    assert all(g.ngens == 0 for g in Z.terms)
    with pytest.raises(StructureError):
        direct_sum_system([])


@pytest.mark.parametrize("seed", range(6))
def test_omega_system_is_the_sum_of_its_towers(seed):
    T = random_omega_system(random.Random(seed), 2, 2)
    X = T.to_inverse_system()
    S = direct_sum_system(T.towers())
    assert X.terms == S.terms
    assert dict(X.bonds) == dict(S.bonds)
    assert X.problems() == []


def test_additivity_top_cases():
    rng = random.Random(5)
    P = product_order([2, 3])
    parts = [random_inverse_system(rng, P, 1, 2) for _ in range(2)]
    for n in range(3):
        rep = additivity_comparison(parts, n)
        assert rep.is_isomorphism
        if n:
            assert rep.source_orders == [] and rep.target_orders == []


@pytest.mark.parametrize("seed", range(8))
def test_additivity_on_random_truncated_systems(seed):
    T = random_omega_system(random.Random(seed), 2, 2)
    for n in range(3):
        assert additivity_comparison(T.towers(), n).is_isomorphism


@pytest.mark.parametrize("seed", range(8))
def test_additivity_without_a_top(seed):
    rng = random.Random(100 + seed)
    P = v_shape(rng.randint(2, 3))
    parts = [random_inverse_system(rng, P, 1, 2), upset_system(P, rng.choice([0, 3]))]
    for n in range(3):
        rep = additivity_comparison(parts, n)
        assert rep.is_isomorphism, rep.describe()


def test_bad_system_problems():
    P = FiniteQuasiOrder.chain(2)
    G = FGAbelianGroup.cyclic(3)
    X = InverseSystem(P, (G, G), {(0, 0): ((1,),), (1, 1): ((1,),)})
    assert any("missing bond" in p for p in X.problems())
    H = FGAbelianGroup.free(1)
    bad = InverseSystem(P, (H, G), {(0, 0): ((1,),), (1, 1): ((1,),), (0, 1): ((1,),)})
    assert any("bond(0,1)" in p for p in bad.problems())

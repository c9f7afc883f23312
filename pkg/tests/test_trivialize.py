from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from limlab.generators import random_cochain, trivialization_instance
from limlab.homalg import AlternatingCochain, coboundary, cochain_is_zero
from limlab.order import PreconditionError
from limlab.trivialize import (
    ACSRecursion,
    CoherentFamily,
    EvaluationContext,
    FormalExpression,
    SymbolicF,
    acs_recursion,
    audit_sign_convention,
    check_coherence,
    check_F_precondition,
    check_triviality_witness,
    coherent_system,
    compare_beyond,
    constant_top_F,
    family_from_cochain,
    formal_boundary,
    formal_cone,
    lim1_formula,
    sorted_tuples,
    star_identity_residual,
    tail_top_F,
    tower_cells,
    trivialize_cocycle,
    validated_seed_sign,
    verify_lemma13,
)

e = FormalExpression.e
F_ = SymbolicF()


# formal calculus -----------------------------------------------------------

def test_boundary_examples():
    assert formal_boundary(e("x", "y")) == e("y") - e("x")
    assert formal_boundary(formal_boundary(e("x", "y", "z"))) == FormalExpression.zero()
    assert formal_boundary(FormalExpression.zero()) == FormalExpression.zero()
    assert formal_boundary(e("x")) == e()


def test_cone_examples():
    assert formal_cone(e("x"), "y") == e("x", "y")
    assert formal_cone(e("a") - e("b"), "y") == e("a", "y") - e("b", "y")
    assert formal_cone(e(), "y") == e("y")
    # d(e(x)*y) = d(e(x))*y - e(x) = e(y) - e(x)
    lhs = formal_boundary(formal_cone(e("x"), "y"))
    assert lhs == formal_cone(formal_boundary(e("x")), "y") - e("x") == e("y") - e("x")


@pytest.mark.parametrize("s", range(1, 7))
def test_star_identity_all_lengths(s):
    assert not star_identity_residual(tuple(f"x{i}" for i in range(s)), "y")


@given(st.lists(st.integers(0, 4), min_size=1, max_size=6), st.integers(0, 4))
def test_star_identity_with_repeated_symbols(gen, y):
    assert not star_identity_residual(tuple(gen), y)


@given(st.dictionaries(st.lists(st.integers(0, 3), min_size=1, max_size=5).map(tuple),
                       st.integers(-3, 3), max_size=6))
def test_boundary_squares_to_zero(terms):
    x = FormalExpression(terms)
    assert not formal_boundary(formal_boundary(x))


# the recursion --------------------------------------------------------------

def test_A1_seed():
    R = ACSRecursion(F_, seed_sign=1)
    assert R.A(1, ("x",)) == e("x", ("F", ("x",)))
    assert ACSRecursion(F_).A(1, ("x",)) == e("x", ("F", ("x",))).scale(-1)


def test_C1_one_step_expansion():
    # the displayed one-step expansion corresponds to seed sign +1
    Fx, Fy = ("F", ("x",)), ("F", ("y",))
    _, C1, _, _ = acs_recursion(("x", "y"), F_, 1, seed_sign=1)
    assert C1 == e("x", "y") - e("y", Fy) + e("x", Fx)
    _, C1_frozen, _, _ = acs_recursion(("x", "y"), F_, 1)
    assert C1_frozen == e("x", "y") + e("y", Fy) - e("x", Fx)


def test_S1_is_a_boundary():
    R = ACSRecursion(F_)
    S1 = R.S(1, ("x", "y"))
    assert not formal_boundary(S1)
    Fxy = ("F", ("x", "y"))
    assert S1 == formal_boundary(formal_cone(R.C(1, ("x", "y")), Fxy))


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_cone_decomposition_under_frozen_sign(s):
    rep = verify_lemma13(tuple(f"x{i}" for i in range(s + 1)), F_, s)
    assert rep.ok, rep.lines()
    assert not rep.unexplained and not rep.double_sum
    if s >= 2:
        assert not rep.double_sum_concrete
    assert rep.multiplicities
    assert all(abs(v) >= 1 for v in rep.multiplicities.values())


def test_sign_audit_picks_exactly_one_sign():
    audit = audit_sign_convention(4)
    good = [sign for sign, reps in audit.items() if all(r.ok for r in reps)]
    assert good == [-1]
    assert validated_seed_sign() == -1
    # the other orientation already fails at s = 1
    assert not audit[1][0].ok


@given(st.integers(1, 3), st.integers(0, 2**32))
def test_cone_decomposition_with_concrete_collapsing_F(s, seed):
    # F with values in a small symbol pool: coincidences must not break the decomposition
    rng = random.Random(seed)
    table: dict = {}

    def F(t):
        if t not in table:
            table[t] = rng.choice(["p", "q", "r"])
        return table[t]

    rep = verify_lemma13(tuple(range(s + 1)), F, s)
    assert not rep.unexplained


def test_recursion_rejects_wrong_lengths():
    R = ACSRecursion(F_)
    with pytest.raises(ValueError):
        R.A(2, ("x",))
    with pytest.raises(ValueError):
        R.C(1, ("x",))


# trivialization on truncated systems ------------------------------------------------

def _F_for(T, k, kind):
    return constant_top_F(T) if kind == "constant-top" else tail_top_F(T, k)


def test_zero_cocycle_gives_zero():
    T, _, phi, k, kind = trivialization_instance(0)
    zero = AlternatingCochain(phi.degree, {t: [0] * len(v) for t, v in phi.values.items()})
    ctx = EvaluationContext(T, zero, k)
    psi = trivialize_cocycle(ctx, _F_for(T, k, kind))
    assert all(not any(v) for v in psi.values.values())


def test_width_two_height_three_constant_top_is_exact():
    for seed in range(0, 12, 2):
        T, psi0, phi, k, kind = trivialization_instance(seed, width=2, height=3, n=1)
        assert kind == "constant-top" and k == 0
        ctx = EvaluationContext(T, phi, k)
        psi = trivialize_cocycle(ctx, constant_top_F(T))
        dpsi = coboundary(ctx.inverse_system, psi)
        P = ctx.inverse_system.index
        for t in sorted_tuples(ctx, 2):
            g = ctx.inverse_system.terms[P.meet_of(t)]
            diff = [a - b for a, b in zip(dpsi.values[t], phi.values[t])]
            # exact on towers > k; tower 0 is the finite exceptional part
            offs = T.offsets(T.points[P.meet_of(t)])
            tail = diff[offs[1]:]
            assert g.contains_relation([0] * offs[1] + tail)


@pytest.mark.parametrize("seed", range(20))
def test_round_trip_corpus(seed):
    T, _, phi, k, kind = trivialization_instance(seed)
    ctx = EvaluationContext(T, phi, k)
    F = _F_for(T, k, kind)
    assert check_F_precondition(ctx, F).ok
    psi = trivialize_cocycle(ctx, F)
    assert psi.degree == phi.degree - 1
    assert compare_beyond(ctx, psi).ok


def test_lim1_formula_agrees_with_the_recursion():
    count = 0
    for seed in range(30):
        T, _, phi, k, kind = trivialization_instance(seed, n=1)
        ctx = EvaluationContext(T, phi, k)
        F = _F_for(T, k, kind)
        direct = lim1_formula(ctx, F)
        assert direct.values == trivialize_cocycle(ctx, F).values
        assert compare_beyond(ctx, direct).ok
        count += 1
    assert count == 30


@pytest.mark.parametrize("seed", range(10))
def test_evaluation_kills_S_n(seed):
    T, _, phi, k, kind = trivialization_instance(seed)
    ctx = EvaluationContext(T, phi, k)
    F = _F_for(T, k, kind)
    R = ACSRecursion(F)
    n = ctx.n
    for tau in sorted_tuples(ctx, n + 1):
        val = ctx.evaluate(tau, R.S(n, tau))
        x = T.points[ctx.inverse_system.index.meet_of(tau)]
        offs = T.offsets(x)
        for i in range(k, T.width):
            assert T.groups[i][x[i]].contains_relation(val[offs[i]:offs[i + 1]])


def test_non_cocycle_is_rejected():
    T, _, phi, k, _ = trivialization_instance(0, width=2, height=3, n=1)
    X = T.to_inverse_system()
    rng = random.Random(1)
    for _ in range(20):
        bad = random_cochain(rng, X, phi.degree, bound=5)
        if not cochain_is_zero(X, coboundary(X, bad)):
            break
    else:
        pytest.fail("no non-cocycle drawn")
    with pytest.raises(PreconditionError):
        EvaluationContext(T, bad, k)
    with pytest.raises(PreconditionError):
        EvaluationContext(T, phi, T.width)


def test_precondition_failure_is_reported():
    # a tail-top instance with the constant-top F at a cutoff it cannot meet
    for seed in range(1, 40, 2):
        T, _, phi, k, kind = trivialization_instance(seed)
        if kind != "tail-top":
            continue
        ctx = EvaluationContext(T, phi, k)
        F = lambda t: t[0]  # noqa: E731
        rep = check_F_precondition(ctx, F)
        if not rep.ok:
            with pytest.raises(PreconditionError):
                trivialize_cocycle(ctx, F)
            return
    pytest.fail("no instance rejected the identity-on-first-coordinate F")


# coherent families ---------------------------------------------------------------

def _telescoping(L=2, M=3, seed=0):
    rng = random.Random(seed)
    psi = {(i, j): rng.randint(-3, 3) for i in range(L) for j in range(M)}
    pts = list(itertools.product(range(M), repeat=L))
    from limlab.trivialize import I_region
    phi = {(p,): {c: psi[c] for c in I_region(p, M) if psi[c]} for p in pts}
    return CoherentFamily(L, M, 1, phi), psi


def test_telescoping_family_is_coherent_and_trivial():
    fam, psi = _telescoping()
    assert fam.problems() == []
    assert check_coherence(fam).ok
    assert check_triviality_witness(fam, psi).ok


def test_perturbed_cell_is_flagged():
    fam, psi = _telescoping(seed=3)
    key = ((2, 1),)
    fam.phi[key] = dict(fam.phi[key])
    fam.phi[key][(1, 1)] = fam.phi[key].get((1, 1), 0) + 1
    rep = check_coherence(fam)
    assert not rep.ok
    assert rep.minimal_exceptional == {(1, 1)}
    assert check_coherence(fam, exceptional={(1, 1)}).ok


def test_coboundary_family_is_coherent():
    T = coherent_system(2, 3)
    X = T.to_inverse_system()
    psi0 = random_cochain(random.Random(4), X, 0)
    fam = family_from_cochain(T, X, coboundary(X, psi0))
    assert fam.n == 2
    assert check_coherence(fam).ok


def test_zero_witness_fails_against_nonzero_family():
    fam, _ = _telescoping(seed=5)
    rep = check_triviality_witness(fam, {})
    assert not rep.ok and rep.violations


@pytest.mark.parametrize("seed", range(6))
def test_pipeline_trivializes_coherent_family(seed):
    L, M = 2, 3
    T = coherent_system(L, M)
    X = T.to_inverse_system()
    rng = random.Random(seed)
    psi0 = random_cochain(rng, X, 0)
    phi = coboundary(X, psi0)
    k = 0
    ctx = EvaluationContext(T, phi, k)
    psi = trivialize_cocycle(ctx, constant_top_F(T))
    fam = family_from_cochain(T, X, phi)
    wit = family_from_cochain(T, X, psi)
    rep = check_triviality_witness(fam, wit.phi, n=2, exceptional=tower_cells(k, L, M))
    assert rep.ok, rep.lines()[:3]

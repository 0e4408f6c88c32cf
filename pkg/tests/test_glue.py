from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ainf import glue, witt
from ainf.errors import ApproximantNotFound, NonConvergent, NotAUnit
from ainf.fpring import PrecisionBudget, RingPresentation

from conftest import line_ring

LP = glue.LaurentPoly
Mat = glue.MatrixOverRing


def glue_ring(D=Fraction(3), n=2, N=1):
    top = max(2**k * (D - k) for k in range(n))
    return witt.WittRing(line_ring(2, n, max(top, Fraction(1)), N), n, "weighted", D)


@pytest.fixture(scope="module")
def C():
    return glue_ring()


def test_split_examples(C):
    one = C.one()
    e = LP(C, {1: one, -1: one})
    e1, e2 = glue.split_overlap(e)
    assert e1 == LP.monomial(one, 1) and e2 == LP.monomial(one, -1)
    c = LP.constant(C.teichmuller(C.ring.var("x")))
    e1, e2 = glue.split_overlap(c)
    assert e1 == c and e2.is_zero()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_split_is_exact_and_norm_bounded(seed):
    C = glue_ring()
    rng = np.random.default_rng(seed)
    e = LP(C, {j: C.random_element(rng) for j in range(-2, 3)})
    e1, e2 = glue.split_overlap(e)
    assert e1 + e2 == e
    assert e1.in_piece(1) and e2.in_piece(2) and not e2.coeffs.get(0)
    assert e1.alpha() >= e.alpha() and e2.alpha() >= e.alpha()


def test_laurent_arithmetic(C):
    x = C.teichmuller(C.ring.var("x"))
    a = LP(C, {0: C.one(), 1: x})
    b = LP(C, {-1: C.one()})
    assert a * b == LP(C, {-1: C.one(), 0: x})
    assert (a - a).is_zero()
    assert a.shift(2).degrees() == (2, 3)
    assert LP(C, {}).alpha().is_inf
    assert a.alpha().alpha == 0


def test_factor_trivial_and_one_by_one(C):
    I1 = Mat.identity(C, 1)
    U1, U2, rep = glue.factor_near_identity(I1)
    assert U1 == I1 and U2 == I1 and rep["iterations"] == 0
    U = Mat(C, [[LP(C, {0: C.one(), 1: C.p_elt()})]])
    U1, U2, rep = glue.factor_near_identity(U)
    assert U1 @ U2 == U
    assert rep["residual_alphas"][-1] == "inf"


def test_factor_random_rank_two():
    C = glue_ring(Fraction(6))
    rng = np.random.default_rng(11)
    I = Mat.identity(C, 2)
    for _ in range(5):
        U = glue.random_near_identity(C, 2, rng, alpha=2)
        U1, U2, rep = glue.factor_near_identity(U)
        assert U1 @ U2 == U
        assert U1.in_piece(1) and U2.in_piece(2)
        finite = [Fraction(a) for a in rep["residual_alphas"] if a != "inf"]
        assert finite == sorted(set(finite))
        assert ((U - I).norm().is_inf) or (U - I).norm().alpha >= 2


def test_factor_rejects_zero_exponent(C):
    U = Mat(C, [[LP(C, {0: C.one(), 1: C.one()})]])
    with pytest.raises(NonConvergent):
        glue.factor_near_identity(U)


def test_near_identity_inverse(C):
    rng = np.random.default_rng(2)
    V = glue.random_near_identity(C, 2, rng, alpha=1)
    assert glue.near_identity_inverse(V) @ V == Mat.identity(C, 2)
    L = RingPresentation(2, ["x"], inverted=["x"], budget=PrecisionBudget(n=1, D=None, N=0))
    WL = witt.WittRing(L, 1)
    with pytest.raises(NotAUnit):
        glue.near_identity_inverse(Mat(WL, [[LP(WL, {0: WL.one(), 1: WL.one()})]]), max_terms=8)


def test_rank_one_trivial_glue(C):
    M = glue.glue_modules(glue.trivial_datum(C, 1))
    assert M.ngens == 1 and M.m == 0
    assert M.G1 == Mat.identity(C, 1) and M.G2 == Mat.identity(C, 1)
    assert glue.verify_base_change(M, K=2)["verdict"] == "pass"


def test_rank_two_glue_and_base_change(C):
    V = glue.random_near_identity(C, 2, np.random.default_rng(7), alpha=1)
    M = glue.glue_modules(glue.PatchingDatum(C, V, glue.near_identity_inverse(V)))
    assert M.relations_hold()
    assert M.G1.in_piece(1) and M.G2.in_piece(2)
    rep = glue.verify_base_change(M, K=2)
    assert rep["verdict"] == "pass"
    assert glue.restrict(M).V.is_identity()
    bad = glue.verify_base_change(M.drop_generator(0), K=2)
    assert bad["verdict"] == "fail"
    assert all(not mp["surjective"] for mp in bad["maps"])


def test_singular_transition_has_no_approximant(C):
    V = Mat.identity(C, 2)
    V.rows[1][1] = LP.constant(C.teichmuller(C.ring.var("x")))
    with pytest.raises(ApproximantNotFound):
        glue.glue_modules(glue.PatchingDatum(C, V, Mat.identity(C, 2)))


def test_kernel_matches_bruteforce():
    R0 = RingPresentation(2, ["x"], budget=PrecisionBudget(n=1, D=Fraction(2), N=0))
    C0 = witt.WittRing(R0, 1, "weighted", 2)
    x = C0.teichmuller(R0.var("x"))
    V0 = Mat(C0, [[LP(C0, {0: C0.one(), -1: x}), LP(C0, {1: x})],
                  [LP(C0, {}), LP(C0, {0: C0.one(), -1: x})]])
    M0 = glue.glue_modules(glue.PatchingDatum(C0, V0, glue.near_identity_inverse(V0)))
    brute = glue.brute_force_kernel(M0.datum, DT=1)
    assert brute == glue.kernel_from_generators(M0, DT=1)
    assert len(brute) == 16


def test_datum_to_json(C):
    V = glue.random_near_identity(C, 2, np.random.default_rng(0), alpha=1)
    js = glue.PatchingDatum(C, V).to_json()
    assert js["rank"] == 2 and js["W"] is None
    assert js["V"]["shape"] == [2, 2]

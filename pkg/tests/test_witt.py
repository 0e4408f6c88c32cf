from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ainf import witt
from ainf.errors import BadWitness, NormTooLarge, PrecisionExhausted, ResourceBound
from ainf.fpring import PrecisionBudget, RingPresentation

from conftest import line_ring, witt_ring


# oracle: W_n(F_p) is Z/p^n, and classical digits a_k over F_p give sum p^k teich(a_k)

def teich(c, p, n):
    return pow(c, p ** (n - 1), p**n) if c % p else 0


def to_int(v):
    p, n = v.W.p, v.W.n
    total = 0
    for k, d in enumerate(v.digits):
        c = d.terms.get(v.W.ring.unit_exp, 0)
        total += p**k * teich(c, p, n)
    return total % p**n


def from_int(W, value):
    """Classical digits of an integer, by peeling Teichmueller lifts."""
    p, n = W.p, W.n
    digits = []
    r = value % p**n
    for k in range(n):
        c = r % p
        digits.append(W.ring.scalar(c))
        r = ((r - teich(c, p, n)) // p) % p**n
    return W.vec(digits)


def constant_ring(p, n):
    R = RingPresentation(p, [], budget=PrecisionBudget(n=n, D=Fraction(1), N=1))
    return witt.WittRing(R, n)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3), (5, 2)]), st.integers(0, 10**6), st.integers(0, 10**6))
def test_arithmetic_matches_integers_mod_pn(pn, a, b):
    p, n = pn
    W = constant_ring(p, n)
    x, y = from_int(W, a), from_int(W, b)
    assert to_int(x) == a % p**n
    assert to_int(x + y) == (a + b) % p**n
    assert to_int(x * y) == (a * b) % p**n
    assert to_int(-x) == (-a) % p**n
    assert to_int(W.scalar(a)) == a % p**n


def test_structure_polynomials_low_length():
    c = witt.build_structure_cache(2, 2)
    X0, X1 = c.X
    Y0, Y1 = c.Y
    assert c.add[0] == X0 + Y0
    assert c.add[1] == X1 + Y1 - X0 * Y0
    c3 = witt.build_structure_cache(3, 1)
    assert c3.add[0] == c3.X[0] + c3.Y[0]
    assert c.carry[1] == {(Fraction(1, 2), Fraction(1, 2)): 1}


def test_structure_polynomial_term_cap():
    with pytest.raises(ResourceBound):
        witt.StructurePolyCache(3, 4, max_terms=50)


def test_teichmuller_sums_and_products():
    W = witt_ring(2, 2, Fraction(4), 2)
    R = W.ring
    x, y = R.var("x"), R.var("x", Fraction(1, 2))
    tx = W.teichmuller(x)
    assert tx + tx == W.vec([R.zero(), x * x])
    assert tx + tx == W.p_elt() * tx
    assert W.teichmuller(x) * W.teichmuller(y) == W.teichmuller(x * y)
    assert (-tx).digits[0] == x
    assert (-tx) + tx == W.zero()


def test_carry_digit_matches_formula():
    # [x] + [y] has digit 1 equal to the p = 2 carry x y (classical coordinates)
    R = RingPresentation(2, ["x", "y"], budget=PrecisionBudget(n=2, D=Fraction(4), N=2))
    W = witt.WittRing(R, 2)
    s = W.teichmuller(R.var("x")) + W.teichmuller(R.var("y"))
    assert s.digits[0] == R.parse("x + y")
    assert s.digits[1] == R.parse("x*y")


def test_p_frobenius_verschiebung():
    W = witt_ring(2, 3, Fraction(4), 3)
    x = W.teichmuller(W.ring.var("x"))
    p = W.p_elt()
    assert p.to_json() == ["0", "1", "0"]
    assert x.verschiebung().to_json() == ["0", "x", "0"]
    assert x.verschiebung().frobenius() == p * x
    assert W.zero().verschiebung().is_zero()
    assert x.frobenius() == W.teichmuller(W.ring.var("x", 2))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32))
def test_ring_axioms_random(seed):
    import numpy as np

    rng = np.random.default_rng(seed)
    W = witt_ring(2, 2, Fraction(3), 2)
    a, b, c = (W.random_element(rng) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == W.zero()
    assert a.frobenius().verschiebung() == W.p_elt() * a


def test_delta_examples():
    W = witt_ring(2, 3, Fraction(4), 3)
    x = W.teichmuller(W.ring.var("x"))
    assert x.delta().is_zero()
    assert W.one().delta().is_zero()
    dp = W.p_elt().delta()
    W2 = witt_ring(2, 2, Fraction(4), 3)
    assert dp.to_json() == W2.scalar(-1).to_json()
    with pytest.raises(PrecisionExhausted):
        x.truncate(1).delta()


def test_delta_sum_rule_p2():
    import numpy as np

    rng = np.random.default_rng(5)
    W = witt_ring(2, 3, Fraction(3), 3)
    for _ in range(10):
        a, b = W.random_element(rng), W.random_element(rng)
        lhs = (a + b).delta() - a.delta() - b.delta()
        # for p = 2 the correction is -x y
        assert lhs == -(a * b).truncate(2)


def test_norms():
    W = witt_ring(2, 2, Fraction(4), 2)
    R = W.ring
    v = W.teichmuller(R.var("x")) + W.p_elt() * W.teichmuller(R.var("x", Fraction(1, 2)))
    assert v.gauss_norm().alpha == Fraction(1, 2)
    assert v.weighted_gauss_norm().alpha == 1
    assert W.p_elt().weighted_gauss_norm().alpha == 1
    assert W.zero().gauss_norm().is_inf
    a, _ = witt.spectral_seminorm_estimate(W.teichmuller(R.var("x", Fraction(1, 2))), 2)
    assert a.alpha == Fraction(1, 2)
    a, _ = witt.spectral_seminorm_estimate(W.p_elt(), 1)
    assert a.alpha == 1


def test_weighted_mode_caps():
    R = line_ring(2, 3, Fraction(8), 2)
    W = witt.WittRing(R, 3, "weighted", Fraction(3))
    assert W.caps == (3, 4, 4)
    with pytest.raises(ValueError):
        witt.WittRing(R, 3, "weighted", Fraction(5))
    with pytest.raises(ValueError):
        witt.WittRing(R, 3, "sideways")


def test_primitive_examples():
    W = witt_ring(2, 2, Fraction(4), 2)
    x = W.teichmuller(W.ring.var("x"))
    z = x - W.p_elt()
    assert z.to_json() == ["x", "1"]
    assert witt.is_primitive(z)
    assert not witt.is_primitive(W.p_elt() * x)
    assert not witt.is_primitive(W.one() - W.p_elt())
    assert witt.is_distinguished(W.p_elt())
    assert not witt.is_distinguished(x)


def test_small_norm_examples():
    L = RingPresentation(2, ["x"], inverted=["x"], budget=PrecisionBudget(n=2, D=Fraction(4), N=2, L=4))
    W = witt.WittRing(L, 2)
    b = [W.teichmuller(L.var("x", -1))]
    xs = [L.var("x")]
    (a0,) = witt.small_norm_decompose(W.teichmuller(L.var("x", 2)), b, xs)
    assert a0 == W.teichmuller(L.var("x"))
    (a0,) = witt.small_norm_decompose(W.p_elt() * W.teichmuller(L.var("x")), b, xs)
    assert a0 == W.p_elt()
    with pytest.raises(NormTooLarge):
        witt.small_norm_decompose(W.teichmuller(L.var("x", Fraction(1, 2))), b, xs)
    with pytest.raises(BadWitness):
        witt.small_norm_decompose(W.one(), [W.one()], xs)


def test_unit_combination_laurent_and_bad_witness():
    L = RingPresentation(2, ["x"], inverted=["x"], budget=PrecisionBudget(n=2, D=Fraction(4), N=2, L=4))
    W = witt.WittRing(L, 2)
    coeffs, rep = witt.unit_witt_combination([L.var("x", -1)], [L.var("x")], W)
    assert list(coeffs) == [(1,)]
    assert coeffs[(1,)] == W.teichmuller(L.var("x", -1))
    assert rep["verified"]
    with pytest.raises(BadWitness):
        witt.unit_witt_combination([L.one()], [L.var("x")], W)


def test_perturb_parameters():
    W = witt_ring(2, 2, Fraction(4), 2)
    x = W.teichmuller(W.ring.var("x"))
    new_f, rep = witt.perturb_parameters([x], W.one(), 1, [W.zero(), x], W.ring.var("x"))
    assert new_f[0] == x + x and new_f[1] == x
    assert rep["f1_recovered"] and not rep["degenerate"]
    with pytest.raises(BadWitness):
        witt.perturb_parameters([x], W.one(), 1, [W.zero(), W.one()], W.ring.var("x"))
    _, rep = witt.perturb_parameters([x], W.one(), 5, [W.zero(), x ** 5], W.ring.var("x"))
    assert rep["degenerate"]

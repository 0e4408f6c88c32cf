from fractions import Fraction

import numpy as np
import pytest

from ainf import lens, witt
from ainf.errors import NotPrimitive, ResourceBound, ZeroDivisor
from ainf.fpring import PrecisionBudget, RingPresentation

from conftest import line_ring


def lens_T(p=2, n=2, D=Fraction(2), N=2, variables=("x",)):
    top = max(p**k * (D - k) for k in range(n))
    Rp = RingPresentation(p, list(variables), budget=PrecisionBudget(n=n, D=2 * top, N=N))
    return lens.LensRing(Rp, n, D, t="T")


@pytest.fixture(scope="module")
def S():
    return lens_T()


def test_uniformizer_relation(S):
    assert S.pi() ** S.q == S.scalar(2)
    assert S.pi(S.q) == S.scalar(2)
    assert S.p_power(Fraction(1, 2)) * S.p_power(Fraction(1, 2)) == S.p_power(1)
    with pytest.raises(ValueError):
        S.p_power(Fraction(1, 8))


def test_norm_examples(S):
    assert S.p_power(Fraction(1, 2)).norm().alpha == Fraction(1, 2)
    assert S.zero().norm().is_inf
    a = S.base.var("x", Fraction(3, 4))
    assert S.teichmuller(a).norm().alpha == a.gauss_norm().alpha


def test_theta_examples(S):
    Wd = S.domain
    T = Wd.teichmuller(Wd.ring.var("T"))
    assert S.theta(T) == S.scalar(2)
    assert S.theta(S.z_element()).is_zero()
    a = Wd.ring.var("x", Fraction(1, 2))
    assert S.theta(Wd.teichmuller(a)) == S.teichmuller(S.base.var("x", Fraction(1, 2)))
    quarter = Wd.teichmuller(Wd.ring.var("T", Fraction(1, 4)))
    assert S.theta(quarter) == S.pi()


def test_theta_is_ring_map_with_section(S):
    rng = np.random.default_rng(3)
    Wd = S.domain
    for _ in range(20):
        a, b = Wd.random_element(rng, depth=1), Wd.random_element(rng, depth=1)
        assert S.theta(a + b) == S.theta(a) + S.theta(b)
        assert S.theta(a * b) == S.theta(a) * S.theta(b)
        y = S.theta(a)
        assert S.theta(S.section(y)) == y


def test_power_multiplicative_norm(S):
    rng = np.random.default_rng(4)
    for _ in range(30):
        y = S.random_element(rng)
        assert (y * y).norm().capped(S.D) == (y.norm() * 2).capped(S.D)


@pytest.mark.parametrize("variables", [(), ("x",)])
def test_norm_matches_bruteforce(variables):
    Rp = RingPresentation(2, list(variables), budget=PrecisionBudget(n=2, D=Fraction(4), N=1))
    Sb = lens.LensRing(Rp, 2, Fraction(3, 2), t="T")
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = Sb.theta(Sb.domain.random_element(rng, depth=0))
        assert x.norm().capped(Sb.D) == lens.quotient_norm_bruteforce(Sb, x)


def test_enumeration_cap():
    W = witt.WittRing(line_ring(2, 2, Fraction(2), 1), 2)
    with pytest.raises(ResourceBound):
        list(lens.enumerate_witt(W, cap=16))
    assert len(list(lens.enumerate_witt(witt.WittRing(line_ring(2, 1, Fraction(1), 1), 1)))) == 4


def test_quotient_by_primitive():
    W = witt.WittRing(line_ring(2, 2, Fraction(4), 2), 2)
    x = W.teichmuller(W.ring.var("x"))
    S = lens.quotient_by_primitive(x - W.p_elt())
    assert isinstance(S, lens.LensRing) and S.base.variables == ()
    assert S.theta(S.z_element()).is_zero()
    with pytest.raises(NotPrimitive):
        lens.quotient_by_primitive(W.one() - W.p_elt())


def test_general_primitive_uses_enumeration():
    R = RingPresentation(2, ["x"], budget=PrecisionBudget(n=2, D=Fraction(1), N=1))
    W = witt.WittRing(R, 2)
    x = W.teichmuller(R.var("x", Fraction(1, 2)))
    z = x + W.p_elt() * W.teichmuller(R.one() + R.var("x", Fraction(1, 2)))
    Q = lens.quotient_by_primitive(z)
    assert isinstance(Q, lens.EnumeratedQuotient)
    assert Q.equal(z, W.zero())
    assert Q.reduce(z * x).is_zero()
    assert not Q.equal(W.one(), W.zero())


def test_lens_criteria_and_uniformizer_control(S):
    rep = lens.check_lens_criteria(S, np.random.default_rng(0), samples=20)
    assert rep["verdict"] == "pass"
    assert rep["p_normal_detail"]["status"] == "no counterexample found"
    S0 = lens.LensRing(S.base, 3, Fraction(3), pi_depth=0)
    assert lens.check_lens_criteria(S0, np.random.default_rng(0), samples=5)["uniformizer"] == "fail"
    zero = lens.LensRing(S.base, 2, Fraction(0))
    assert lens.check_lens_criteria(zero)["degenerate"]


@pytest.mark.parametrize("name,rels,sat,expected", [
    ("trivial", (), True, "pass"),
    ("laurent", ("T - x",), True, "pass"),
    ("broken", ("T - x",), False, "fail"),
])
def test_frobenius_iso(name, rels, sat, expected):
    variables = ("x",) if not rels else ("x", "T")
    d = lens.LocalizationDatum(name, 2, variables, rels, N=2, D=Fraction(2), saturate=sat)
    rep = lens.check_frobenius_iso(d)
    assert rep["verdict"] == expected
    if expected == "pass":
        t = rep["rank_table"]
        assert t["source_dim"] == t["target_dim"] == t["rank"]


def test_tilt_examples():
    R = line_ring(2, 2, Fraction(4), 2)
    _, rep = lens.tilt(R, R.var("x"), 1)
    assert rep["verdict"] == "pass"
    R2 = line_ring(2, 2, Fraction(4), 2, variables=("x", "T"))
    _, rep = lens.tilt(R2, R2.var("T"), 1)
    assert rep["injective"] and rep["compatible"]
    with pytest.raises(ZeroDivisor):
        lens.tilt(R, R.zero())


def test_canonical_iso_and_control(S):
    rep = lens.lens_canonical_iso_check(S, np.random.default_rng(1), samples=10)
    assert rep["bijective"] and rep["norm_compatible"] == 10
    flag = lens.lens_canonical_iso_check(S, samples=0, f0=S.domain.ring.var("T"))
    assert flag["verdict"] == "fail" and flag["flag"] == "f0 is divisible by T"

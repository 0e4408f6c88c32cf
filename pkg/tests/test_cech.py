from fractions import Fraction

import numpy as np
import pytest

from ainf import cech, lens, witt
from ainf.errors import BadWitness, ResourceBound, UnsupportedCovering
from ainf.fpring import PrecisionBudget, RingPresentation

from conftest import line_ring, witt_ring


@pytest.mark.parametrize("n,dim", [(1, 4), (2, 8)])
def test_linearization_dimensions(n, dim):
    W = witt_ring(2, n, Fraction(2), 1)
    C = cech.linearize(W)
    assert C.dim == dim
    # oracle: the group has p^dim elements
    assert len(list(lens.enumerate_witt(W))) == 2**dim


def test_degenerate_linearization_is_constants():
    C = cech.linearize(witt_ring(2, 2, Fraction(1, 2), 1))
    assert C.dim == 2 and C.size == 1


def test_coordinates_round_trip():
    C = cech.linearize(witt_ring(2, 2, Fraction(4), 2))
    assert C.dim == 32
    assert C.cross_check(np.random.default_rng(0), samples=20) == 0
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = C.W.random_element(rng)
        assert C.from_coords(C.to_coords(x)) == x


def test_dimension_cap():
    with pytest.raises(ResourceBound):
        cech.LinearizedRing(witt_ring(2, 2, Fraction(4), 2), max_dim=10)


def test_teich_int():
    assert cech.teich_int(1, 3, 2) == 1
    assert cech.teich_int(2, 3, 2) == 8  # the root of unity -1 mod 9
    assert cech.teich_int(0, 3, 2) == 0


@pytest.fixture(scope="module")
def C():
    return cech.linearize(witt_ring(2, 2, Fraction(4), 2))


def test_localization_pieces(C):
    W = C.W
    f = W.teichmuller(W.ring.var("x"))
    A1 = cech.localization_ring(C, f, W.one(), "T", 4)
    assert A1.log_order == C.dim  # T identified with [x]
    A2 = cech.localization_ring(C, f, W.one(), "Tinv", 4)
    # [x] is nilpotent, so [x] T^-1 = 1 forces the zero ring
    assert A2.log_order == 0
    with pytest.raises(UnsupportedCovering):
        cech.localization_ring(C, f, f, "T", 4)


@pytest.mark.parametrize("g", ["1", "1-f"])
def test_exact_complexes(C, g):
    W = C.W
    f = W.teichmuller(W.ring.var("x"))
    gg = W.one() if g == "1" else W.one() - f
    datum = cech.cech_complex(C, f, gg, 4)
    assert datum.kind == ("laurent" if g == "1" else "balanced")
    assert datum.A12.contains(datum.composite())
    rep = cech.check_exactness(datum)
    assert rep["verdict"] == "exact"
    assert rep["euler"] == 0
    assert rep["H0_inverse"]["verified"]


@pytest.mark.parametrize("corrupt,node", [("map1", "C"), ("map2", "middle")])
def test_corruption_is_localized(C, corrupt, node):
    W = C.W
    f = W.teichmuller(W.ring.var("x"))
    rep = cech.check_exactness(cech.cech_complex(C, f, W.one() - f, 4, corrupt=corrupt))
    assert rep["verdict"] == "not exact"
    failing = [nd["node"] for nd in rep["nodes"] if nd["verdict"] == "fail"]
    assert node in failing
    if corrupt == "map2":
        assert not rep["map2_well_defined"]
    with pytest.raises(ValueError):
        cech.cech_complex(C, f, W.one(), 4, corrupt="map3")


def test_strict_multiplication_examples():
    R = line_ring(2, 2, Fraction(4), 1)
    W = witt.WittRing(R, 2, "weighted", Fraction(2))
    rep = cech.check_strict_multiplication(W, [W.one()], 2)
    assert rep["constant"] == "0/1" and rep["bound_holds"]
    L = RingPresentation(2, ["x"], inverted=["x"], budget=PrecisionBudget(n=2, D=None, N=1))
    WL = witt.WittRing(L, 2, "weighted", Fraction(2))
    rep = cech.check_strict_multiplication(WL, [WL.teichmuller(L.var("x")), WL.one()], 2)
    assert rep["verdict"] == "pass"
    with pytest.raises(BadWitness):
        cech.check_strict_multiplication(W, [W.teichmuller(R.var("x"))], 2)


def test_unipotent_inverse():
    W = witt_ring(2, 2, Fraction(4), 2)
    g = W.one() - W.teichmuller(W.ring.var("x"))
    assert cech.unipotent_inverse(g) * g == W.one()


def test_dump_triplets(tmp_path):
    text = cech.dump_triplets(np.array([[0, 2], [1, 0]]), tmp_path / "m.txt")
    assert text == "2 2\n0 1 2\n1 0 1\n"
    assert (tmp_path / "m.txt").read_text() == text

"""One test per acceptance criterion, at the stated sizes and tolerances.

Each test runs the catalog check (the same code the CLI runs) and then
re-derives the key facts from the returned objects where that is cheap.
"""
import json
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from ainf import glue, witt
from ainf.checks import run_check
from ainf.cli import dumps, strip_timing
from ainf.errors import NonConvergent
from ainf.fpring import PrecisionBudget, RingPresentation

from conftest import line_ring

ROOT = Path(__file__).resolve().parents[1]


def rng_for(i):
    return np.random.default_rng([777, i])


def _eval_ghost(p, k, vals):
    return sum(p**i * vals[i] ** (p ** (k - i)) for i in range(k + 1))


# 1 ---------------------------------------------------------------------------
def test_01_structure_polynomials_certified():
    t0 = time.perf_counter()
    rng = rng_for(1)
    for p in (2, 3):
        for n in range(1, 5):
            cache = witt.StructurePolyCache(p, n)
            cert = cache.certify()
            assert cert["ok"]
            assert all(r["ghost_identity"] and r["integral"] for r in cert["rows"])
            # numeric oracle: ghost components at random integer points
            for _ in range(5):
                xs = [int(v) for v in rng.integers(-5, 6, size=n)]
                ys = [int(v) for v in rng.integers(-5, 6, size=n)]
                s = [cache.add[k](*xs, *ys) for k in range(n)]
                m = [cache.mul[k](*xs, *ys) for k in range(n)]
                ng = [cache.neg[k](*xs) for k in range(n)]
                for k in range(n):
                    gx, gy = _eval_ghost(p, k, xs), _eval_ghost(p, k, ys)
                    assert _eval_ghost(p, k, s) == gx + gy
                    assert _eval_ghost(p, k, m) == gx * gy
                    assert _eval_ghost(p, k, ng) == -gx
    assert time.perf_counter() - t0 < 30


# 2 ---------------------------------------------------------------------------
def test_02_witt_ring_axioms():
    e = run_check("witt-axioms", {"p": 2, "n": 3, "D": "4", "N": 3,
                                  "triples": 200, "pairs": 100, "samples": 100}, rng_for(2))
    assert e["status"] == "pass", e
    d = e["details"]
    assert d["triples"] == 200 and d["pairs"] == 100 and d["samples"] == 100
    assert all(v == 0 for v in d["failures"].values())


# 3 ---------------------------------------------------------------------------
def test_03_delta_structure():
    e = run_check("delta-axioms", {"p": 2, "n": 3, "D": "4", "N": 3, "samples": 100}, rng_for(3))
    assert e["status"] == "pass", e
    d = e["details"]
    assert d["samples"] == 100 and d["effective_length"] == 2
    assert set(d["failures"]) == {"unit_and_zero", "additivity", "multiplicativity", "frobenius_lift"}
    assert all(v == 0 for v in d["failures"].values())


# 4 ---------------------------------------------------------------------------
def test_04_norm_power_multiplicativity():
    w = run_check("norm-power-mult", {"samples": 100}, rng_for(4))
    assert w["status"] == "pass", w
    assert w["details"]["samples"] == 100 and w["details"]["mismatches"] == 0
    ln = run_check("lens-norm", {"samples": 100}, rng_for(5))
    assert ln["status"] == "pass", ln
    d = ln["details"]
    assert d["power_samples"] == 100 and d["power_mismatches"] == 0
    assert len(d["bruteforce"]) >= 2
    assert all(b["mismatches"] == 0 and b["verdict"] == "pass" for b in d["bruteforce"])


# 5 ---------------------------------------------------------------------------
def test_05_primitive_and_distinguished():
    e = run_check("distinguished-primitive", {}, rng_for(6))
    assert e["status"] == "pass", e
    seen = {(c["element"], c["predicate"]): c["certified"] for c in e["details"]["cases"]}
    assert seen[("[x] - p", "distinguished")] and seen[("[x] - p", "primitive")]
    assert seen[("p", "distinguished")]
    assert not seen[("[x]", "distinguished")]
    assert not any(v for (el, _), v in seen.items() if el == "[1] - p")

    # re-verify the certificates from the objects themselves
    W = witt.WittRing(line_ring(2, 2, Fraction(4), 2), 2)
    x = W.teichmuller(W.ring.var("x"))
    one = W.ring.one()
    for d in (x - W.p_elt(), W.p_elt()):
        cert = witt.is_distinguished(d)
        assert cert
        gens = [d.digits[0], d.delta().digits[0]]
        roots, mult = cert.witness["roots"], cert.witness["multipliers"]
        assert mult[0] * roots[0] + mult[1] * roots[1] == one
        for r, g in zip(roots, gens):
            assert any(_frob(r, k) == g for k in range(W.ring.N + 1))
    z = x - W.p_elt()
    cert = witt.is_primitive(z)
    assert cert and cert.witness["z0_alpha"] > 0
    assert cert.witness["z1_inverse"] * z.digits[1] == one
    assert not witt.is_distinguished(x)
    assert not witt.is_primitive(W.one() - W.p_elt())


def _frob(a, k):
    for _ in range(k):
        a = a.frobenius()
    return a


# 6 ---------------------------------------------------------------------------
def test_06_unit_combination():
    t0 = time.perf_counter()
    e = run_check("unit-combination", {"n": 2, "D": "4"}, rng_for(7))
    assert e["status"] == "pass", e
    # independent re-evaluation of sum c_j [x]^j for the presented instance
    P = RingPresentation(2, list("uvxy"), ungraded=list("uvxy"), relations=["u*x+v*y-1"],
                         budget=PrecisionBudget(n=2, D=None, N=1))
    W = witt.WittRing(P, 2)
    xs = [P.var("x"), P.var("y")]
    coeffs, rep = witt.unit_witt_combination([P.var("u"), P.var("v")], xs, W)
    total = W.zero()
    for j, c in coeffs.items():
        term = c
        for xv, jj in zip(xs, j):
            for _ in range(jj):
                term = term * W.teichmuller(xv)
        total = total + term
    assert total == W.one()
    assert rep["min_exponent_sum"] >= 1  # m = 1: every term uses the x_i
    L = RingPresentation(2, ["x"], inverted=["x"], budget=PrecisionBudget(n=2, D=Fraction(4), N=2, L=4))
    WL = witt.WittRing(L, 2)
    coeffs, _ = witt.unit_witt_combination([L.var("x", -1)], [L.var("x")], WL)
    total = WL.zero()
    for (j,), c in coeffs.items():
        total = total + c * WL.teichmuller(L.var("x")) ** j
    assert total == WL.one()
    assert time.perf_counter() - t0 < 60


# 7 ---------------------------------------------------------------------------
def test_07_small_norm_decomposition():
    e = run_check("small-norm-decompose", {"samples": 50}, rng_for(8))
    assert e["status"] == "pass", e
    d = e["details"]
    assert d["samples"] == 50 and d["failures"] == 0 and d["below_threshold"] == 0
    assert d["norm_too_large_detected"]


# 8 ---------------------------------------------------------------------------
@pytest.mark.parametrize("g", ["1", "1-f"])
def test_08_cech_exactness(g):
    t0 = time.perf_counter()
    e = run_check("cech-exactness", {"n": 2, "D": "4", "N": 2, "g": g}, rng_for(9))
    assert e["status"] == "pass", e
    d = e["details"]
    assert d["verdict"] == "exact" and d["composite_zero"] and d["map2_well_defined"]
    assert d["H0_inverse"]["verified"]
    assert d["linearization_dim"] <= 2000
    assert all(node["verdict"] == "pass" for node in d["nodes"])
    assert time.perf_counter() - t0 < 120
    # negative controls: one corrupted map per covering
    corrupt = "map1" if g == "1" else "map2"
    t0 = time.perf_counter()
    bad = run_check("cech-exactness", {"g": g, "corrupt": corrupt}, rng_for(10))
    assert bad["status"] == "fail"
    assert bad["details"]["verdict"] == "not exact"
    assert time.perf_counter() - t0 < 120


# 9 ---------------------------------------------------------------------------
def test_09_frobenius_bijective():
    for inst in ("trivial", "laurent"):
        e = run_check("frobenius-iso", {"instance": inst, "N": 2, "D": "2"}, rng_for(11))
        assert e["status"] == "pass", e
        t = e["details"]["rank_table"]
        assert t["source_dim"] == t["target_dim"] == t["rank"]
    broken = run_check("frobenius-iso", {"instance": "broken"}, rng_for(12))
    assert broken["status"] == "fail"


# 10 --------------------------------------------------------------------------
def test_10_canonical_iso():
    e = run_check("lens-canonical-iso", {"samples": 50}, rng_for(13))
    assert e["status"] == "pass", e
    rep = e["details"]["report"]
    assert rep["bijective"]
    assert all(lv["source_dim"] == lv["target_dim"] == lv["rank"] for lv in rep["levels"])
    assert rep["norm_samples"] == 50 and rep["norm_compatible"] == 50


# 11 --------------------------------------------------------------------------
def test_11_factor_near_identity():
    from ainf.checks import _glue_ring

    C = _glue_ring(2, 2, Fraction(6), 1)
    rng = rng_for(14)
    I = glue.MatrixOverRing.identity(C, 2)
    for _ in range(20):
        U = glue.random_near_identity(C, 2, rng, alpha=2)
        a = (U - I).norm()
        assert a.is_inf or a.alpha >= 2
        U1, U2, rep = glue.factor_near_identity(U)
        assert U1 @ U2 == U
        assert U1.in_piece(1) and U2.in_piece(2)
        assert rep["product_exact"] and rep["U1_in_piece1"] and rep["U2_in_piece2"]
    T = glue.LaurentPoly.monomial(C.one(), 1)
    E = glue.MatrixOverRing(C, [[T, glue.LaurentPoly(C, {})], [glue.LaurentPoly(C, {}), T]])
    assert E.norm().alpha == 0
    with pytest.raises(NonConvergent):
        glue.factor_near_identity(I + E)
    e = run_check("factor-near-identity", {"samples": 20, "alpha": "2"}, rng_for(15))
    assert e["status"] == "pass" and e["details"]["nonconvergent_detected"]


# 12 --------------------------------------------------------------------------
def test_12_glue_rank_two():
    from ainf.checks import _glue_ring

    C = _glue_ring(2, 2, Fraction(3), 1)
    V = glue.random_near_identity(C, 2, rng_for(16), alpha=1)
    datum = glue.PatchingDatum(C, V, glue.near_identity_inverse(V))
    assert datum.compatible()
    M = glue.glue_modules(datum)
    assert M.ngens == 2 and M.relations_hold()
    rep = glue.verify_base_change(M, K=3)
    assert rep["verdict"] == "pass"
    assert len(rep["maps"]) == 2
    for m in rep["maps"]:
        assert m["injective"] and m["surjective"]
        assert m["source_dim"] == m["target_dim"] == m["image_dim"]
    assert rep["round_trip"]["restricted_transition_is_identity"]
    assert rep["round_trip"]["change_of_basis_recovers_V"]
    triv = glue.glue_restrict_identity(C, 2)
    assert triv["G1_identity"] and triv["G2_identity"]
    e = run_check("glue-base-change", {"rank": 2}, rng_for(17))
    assert e["status"] == "pass", e


# 13 --------------------------------------------------------------------------
def test_13_cli_determinism(tmp_path):
    cfg = ROOT / "configs" / "all-checks.json"
    outs = []
    for i, extra in enumerate(([], ["--jobs", "4"])):
        out = tmp_path / f"report{i}.json"
        proc = subprocess.run([sys.executable, "-m", "ainf", "run", str(cfg), "--seed", "2024",
                               "--out", str(out), *extra], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(json.loads(out.read_text()))
    a, b = (dumps(strip_timing(r)) for r in outs)
    assert a == b
    assert outs[0]["summary"]["status"] == "pass"

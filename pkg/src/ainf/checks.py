"""Registered instance checks.

Each check builds its rings from a few integer/rational parameters, runs
one family of exact verifications and returns ``(status, details)`` with
``status`` one of ``pass``, ``fail`` or ``uncertified``.  Negative controls
that a check runs on its own are part of its verdict: a control that is
not detected makes the check fail.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from . import cech, glue, lens, witt
from .errors import (
    AinfError,
    ApproximantNotFound,
    BadWitness,
    ConfigInvalid,
    NonConvergent,
    NormTooLarge,
    NotPrimitive,
    ResourceBound,
    ZeroDivisor,
)
from .fpring import PrecisionBudget, RingPresentation, frac_str

STATUSES = ("pass", "fail", "uncertified", "error")


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    summary: str
    params: dict = field(default_factory=dict)
    fn: object = None

    def describe(self):
        return {"name": self.name, "anchor": self.anchor, "summary": self.summary,
                "params": {k: _jsonable(v) for k, v in self.params.items()}}


CATALOG = {}


def register(name, anchor, summary, **params):
    def deco(fn):
        CATALOG[name] = Check(name, anchor, summary, dict(params), fn)
        return fn
    return deco


def list_checks():
    return [CATALOG[k].describe() for k in sorted(CATALOG)]


def _jsonable(v):
    if isinstance(v, Fraction):
        return frac_str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


def resolve_params(name, given):
    """Defaults merged with ``given``; unknown keys and bad types raise ConfigInvalid."""
    if name not in CATALOG:
        raise ConfigInvalid(f"unknown check {name!r}")
    spec = CATALOG[name].params
    out = dict(spec)
    for k, v in (given or {}).items():
        if k == "expect":
            if v not in ("pass", "fail"):
                raise ConfigInvalid(f"{name}: expect must be 'pass' or 'fail'")
            out[k] = v
            continue
        if k not in spec:
            raise ConfigInvalid(f"{name}: unknown parameter {k!r}")
        default = spec[k]
        try:
            if isinstance(default, bool):
                if not isinstance(v, bool):
                    raise TypeError
                out[k] = v
            elif isinstance(default, int):
                if isinstance(v, bool) or int(v) != v:
                    raise TypeError
                out[k] = int(v)
            elif isinstance(default, Fraction):
                out[k] = Fraction(str(v))
            elif default is None or isinstance(default, str):
                if v is not None and not isinstance(v, str):
                    raise TypeError
                out[k] = v
            else:
                out[k] = v
        except (TypeError, ValueError, ZeroDivisionError):
            raise ConfigInvalid(f"{name}: bad value {v!r} for {k}") from None
    return out


def run_check(name, params=None, rng=None):
    """Run one check; errors are captured as status ``error``."""
    p = resolve_params(name, params)
    expect = p.pop("expect", "pass")
    rng = rng if rng is not None else np.random.default_rng(0)
    start = time.perf_counter()
    try:
        status, details = CATALOG[name].fn(rng=rng, **p)
    except AinfError as exc:
        status, details = "error", {"error": type(exc).__name__, "message": str(exc)}
    observed = status
    if expect == "fail" and status in ("pass", "fail"):
        status = "pass" if observed == "fail" else "fail"
    entry = {
        "name": name,
        "anchor": CATALOG[name].anchor,
        "params": _jsonable(p),
        "status": status,
        "details": _jsonable(details),
        "wall_time": round(time.perf_counter() - start, 3),
    }
    if expect == "fail":
        entry["expected"] = "fail"
        entry["observed"] = observed
    return entry


def _status(ok):
    return "pass" if ok else "fail"


def _line_ring(p, n, D, N, variables=("x",), **kw):
    return RingPresentation(p, list(variables), budget=PrecisionBudget(n=n, D=D, N=N), **kw)


# ---------------------------------------------------------------------------
# structure polynomials and Witt arithmetic
# ---------------------------------------------------------------------------

@register("ghost-identity", "w_k = Σ pⁱ Zᵢ^{p^{k−i}}",
          "Certify Witt structure polynomials by exact ghost-component identities.",
          p=2, n=3, corrupt=False)
def ghost_identity(p, n, corrupt, rng):
    if corrupt:
        cache = witt.StructurePolyCache(p, n)
        # test fixture: perturb the top addition polynomial by X_0
        cache.add[n - 1] = cache.add[n - 1] + cache.X[0]
    else:
        cache = witt.build_structure_cache(p, n)
    cert = cache.certify()
    violated = [f"{r['kind']}[{r['k']}]: ghost_{r['k']}({r['kind']}) differs"
                for r in cert["rows"] if not r["ghost_identity"]]
    details = {
        "identities": len(cert["rows"]),
        "violated": violated,
        "terms": {kind: [len(f) for f in getattr(cache, kind)] for kind in ("add", "mul", "neg")},
    }
    return _status(cert["ok"]), details


@register("witt-axioms", "the series Σ pⁿ[x̄ₙ]",
          "Ring axioms, multiplicativity of Teichmueller lifts and p = VF on random samples.",
          p=2, n=3, D=Fraction(4), N=3, triples=200, pairs=100, samples=100)
def witt_axioms(p, n, D, N, triples, pairs, samples, rng):
    R = _line_ring(p, n, D, N)
    W = witt.WittRing(R, n)
    fails = {"add_assoc": 0, "mul_assoc": 0, "distributive": 0, "commutative": 0,
             "teichmuller": 0, "p_is_VF": 0}
    for _ in range(triples):
        a, b, c = (W.random_element(rng) for _ in range(3))
        fails["add_assoc"] += not ((a + b) + c == a + (b + c))
        fails["mul_assoc"] += not ((a * b) * c == a * (b * c))
        fails["distributive"] += not (a * (b + c) == a * b + a * c)
        fails["commutative"] += not (a * b == b * a and a + b == b + a)
    for _ in range(pairs):
        a, b = R.random_element(rng), R.random_element(rng)
        fails["teichmuller"] += not (W.teichmuller(a) * W.teichmuller(b) == W.teichmuller(a * b))
    pw = W.p_elt()
    for _ in range(samples):
        x = W.random_element(rng)
        fails["p_is_VF"] += not (pw * x == x.frobenius().verschiebung())
    details = {"ring": repr(W), "triples": triples, "pairs": pairs, "samples": samples,
               "failures": fails}
    return _status(not any(fails.values())), details


@register("delta-axioms", "δ(1) = 0",
          "The p-derivation axioms and phi(x) = x^p + p delta(x) at effective length n-1.",
          p=2, n=3, D=Fraction(4), N=3, samples=100)
def delta_axioms(p, n, D, N, samples, rng):
    if n < 2 or N < 1:
        return "uncertified", {"reason": "needs n >= 2 and N >= 1"}
    R = _line_ring(p, n, D, N)
    W = witt.WittRing(R, n)
    L = n - 1
    fails = {"unit_and_zero": 0, "additivity": 0, "multiplicativity": 0, "frobenius_lift": 0}
    fails["unit_and_zero"] += not (W.one().delta().is_zero() and W.zero().delta().is_zero())
    for _ in range(samples):
        x = W.random_element(rng, depth=N - 1)
        y = W.random_element(rng, depth=N - 1)
        dx, dy = x.delta(), y.delta()
        xs, ys = x.truncate(L), y.truncate(L)
        cross = W.zero().truncate(L)
        for i in range(1, p):
            cross = cross + W.scalar(comb(p, i) // p) * (xs ** i) * (ys ** (p - i))
        fails["additivity"] += not ((x + y).delta() == dx + dy - cross)
        rhs = (xs ** p) * dy + (ys ** p) * dx + W.scalar(p) * dx * dy
        fails["multiplicativity"] += not ((x * y).delta() == rhs)
        fails["frobenius_lift"] += not (x.frobenius() == x ** p + dx.frobenius().verschiebung())
    details = {"ring": repr(W), "effective_length": L, "samples": samples, "failures": fails}
    return _status(not any(fails.values())), details


@register("distinguished-primitive", "(p,d,δ(d)) is the unit ideal",
          "Distinguished and primitive certificates on [x]-p, p, [x], 1-p and p[x].",
          p=2, n=2, D=Fraction(4), N=2)
def distinguished_primitive(p, n, D, N, rng):
    R = _line_ring(p, n, D, N)
    W = witt.WittRing(R, n)
    x = W.teichmuller(R.var("x"))
    pw = W.p_elt()
    cases = [
        ("[x] - p", x - pw, {"distinguished": True, "primitive": True}),
        ("p", pw, {"distinguished": True}),
        ("[x]", x, {"distinguished": False, "primitive": False}),
        ("[1] - p", W.one() - pw, {"primitive": False}),
        ("p[x]", pw * x, {"primitive": False}),
    ]
    rows = []
    ok = True
    for label, elt, expect in cases:
        for pred, want in expect.items():
            cert = (witt.is_distinguished if pred == "distinguished" else witt.is_primitive)(elt)
            good = bool(cert) == want
            ok &= good
            rows.append({"element": label, "predicate": pred, "expected": want,
                         "certified": bool(cert), "certificate": cert.to_json(),
                         "verdict": _status(good)})
    return _status(ok), {"ring": repr(W), "cases": rows}


@register("norm-power-mult", "|x|_sp = lim_{n→∞}|xⁿ|^{1/n}",
          "Weighted Gauss norm exponent satisfies alpha(x^p) = p alpha(x) on Witt samples.",
          p=2, n=3, D=Fraction(3), N=3, samples=100)
def norm_power_mult(p, n, D, N, samples, rng):
    top = max(p**k * (D - k) for k in range(n))
    R = _line_ring(p, n, max(top, Fraction(1)), N)
    W = witt.WittRing(R, n, "weighted", D)
    bad = exact = at_cap = 0
    for _ in range(samples):
        u = W.random_element(rng, depth=max(0, N - 1))
        a = u.weighted_gauss_norm()
        up = u ** p
        cap = up.norm_precision()
        a_p = up.weighted_gauss_norm()
        if (a * p).capped(cap) != a_p.capped(cap):
            bad += 1
        elif not a.is_inf and cap is not None and a.alpha * p < cap:
            exact += 1
        else:
            at_cap += 1
    est, known = witt.spectral_seminorm_estimate(W.teichmuller(R.var("x")), 1)
    details = {"ring": repr(W), "samples": samples, "mismatches": bad,
               "below_truncation": exact, "at_truncation": at_cap,
               "spectral_estimate_[x]": {"alpha": est.to_json(), "known_to": frac_str(known)}}
    return _status(bad == 0), details


@register("unit-combination", "writes 1 as a finite linear combination",
          "Express 1 through Teichmueller lifts of unit-ideal generators; verified in W_2.",
          p=2, n=2, D=Fraction(4), N=2)
def unit_combination(p, n, D, N, rng):
    out = []
    ok = True
    L = RingPresentation(p, ["x"], inverted=["x"],
                         budget=PrecisionBudget(n=n, D=D, N=N, L=Fraction(4)))
    WL = witt.WittRing(L, n)
    coeffs, rep = witt.unit_witt_combination([L.var("x", -1)], [L.var("x")], WL)
    ok &= rep["verified"]
    out.append({"instance": "laurent x x^-1 = 1 (m = 0)", "report": rep,
                "coefficients": {str(list(j)): c.to_json() for j, c in sorted(coeffs.items())}})
    # every variable ungraded: a total-degree cap would collapse ux + vy = 1
    P = RingPresentation(p, list("uvxy"), ungraded=list("uvxy"), relations=["u*x+v*y-1"],
                         budget=PrecisionBudget(n=n, D=None, N=max(1, N - 1)))
    WP = witt.WittRing(P, n)
    coeffs, rep = witt.unit_witt_combination([P.var("u"), P.var("v")], [P.var("x"), P.var("y")], WP)
    ok &= rep["verified"]
    out.append({"instance": "ux + vy = 1 (m = 1)", "report": rep,
                "coefficients": {str(list(j)): c.to_json() for j, c in sorted(coeffs.items())}})
    try:
        witt.unit_witt_combination([P.var("u"), P.var("u")], [P.var("x"), P.var("y")], WP)
        control = False
    except BadWitness:
        control = True
    ok &= control
    return _status(ok), {"instances": out, "bad_witness_detected": control}


@register("small-norm-decompose", "f = fb₀[x̄₀] + … + fb_m[x̄_m]",
          "Decompose sampled f above the norm threshold and re-verify integrality.",
          p=2, n=2, N=2, samples=50)
def small_norm(p, n, N, samples, rng):
    L = RingPresentation(p, ["x"], inverted=["x"],
                         budget=PrecisionBudget(n=n, D=Fraction(4), N=N, L=Fraction(4)))
    W = witt.WittRing(L, n)
    b = [W.teichmuller(L.var("x", -1))]
    xbar = [L.var("x")]
    thr = witt.small_norm_threshold(b)
    tx = W.teichmuller(L.var("x"))
    bad = below = 0
    for _ in range(samples):
        f = W.random_element(rng, depth=max(0, N - 1)) * tx
        if f.is_zero():
            f = tx
        a = f.gauss_norm()
        if not a.is_inf and a.alpha < thr:
            below += 1
            continue
        try:
            parts = witt.small_norm_decompose(f, b, xbar)
        except (NormTooLarge, AssertionError):
            bad += 1
            continue
        recon = W.zero()
        for ai, xi in zip(parts, xbar):
            recon = recon + ai * W.teichmuller(xi)
        bad += not (recon == f)
    try:
        witt.small_norm_decompose(W.teichmuller(L.var("x", Fraction(1, 2))), b, xbar)
        control = False
    except NormTooLarge:
        control = True
    ok = bad == 0 and below == 0 and control
    return _status(ok), {"ring": repr(W), "threshold": frac_str(thr), "samples": samples,
                         "failures": bad, "below_threshold": below,
                         "norm_too_large_detected": control}


@register("perturb-parameters", "defines the same rational open subset",
          "Perturbation of rational-subset parameters by a power of [x0], with witness.",
          p=2, n=2, D=Fraction(4), N=1, k=1)
def perturb(p, n, D, N, k, rng):
    R = _line_ring(p, n, D, N, variables=("x", "y"))
    W = witt.WittRing(R, n)
    x0 = R.var("x")
    f = [W.teichmuller(R.var("y"))]
    g = W.one()
    witness = [W.zero(), W.teichmuller(x0) ** k]
    new_f, rep = witt.perturb_parameters(f, g, k, witness, x0)
    try:
        witt.perturb_parameters(f, g, k, [W.zero(), W.zero()], x0)
        control = False
    except BadWitness:
        control = True
    ok = rep["witness_identity"] and rep["f1_recovered"] and control
    return _status(ok), {"report": rep, "new_f": [v.to_json() for v in new_f],
                         "bad_witness_detected": control}


# ---------------------------------------------------------------------------
# lenses
# ---------------------------------------------------------------------------

def _lens_T(p, n, D, N, variables=("x",)):
    top = max(p**k * (D - k) for k in range(n))
    Rp = RingPresentation(p, list(variables),
                          budget=PrecisionBudget(n=n, D=max(Fraction(2) * top, Fraction(1)), N=N))
    return lens.LensRing(Rp, n, D, t="T")


@register("lens-theta", "the map θ_S: W(S^♭) → S",
          "theta is a ring homomorphism killing [T] - p, and the section is a right inverse.",
          p=2, n=2, D=Fraction(2), N=2, samples=100)
def lens_theta(p, n, D, N, samples, rng):
    S = _lens_T(p, n, D, N)
    Wd = S.domain
    bad = {"additive": 0, "multiplicative": 0, "section": 0}
    for _ in range(samples):
        a, b = Wd.random_element(rng, depth=1), Wd.random_element(rng, depth=1)
        ta, tb = S.theta(a), S.theta(b)
        bad["additive"] += not (S.theta(a + b) == ta + tb)
        bad["multiplicative"] += not (S.theta(a * b) == ta * tb)
        bad["section"] += not (S.theta(S.section(ta)) == ta)
    kills_z = S.theta(S.z_element()).is_zero()
    return _status(kills_z and not any(bad.values())), {
        "ring": repr(S), "samples": samples, "failures": bad, "theta_z_zero": kills_z}


@register("lens-norm", "the quotient norm of the Gauss norm on W^b(S)/(z) is power-multiplicative",
          "Lens norm power-multiplicativity and agreement with a brute-force quotient norm.",
          p=2, n=2, D=Fraction(2), N=2, samples=100, bruteforce_D=Fraction(3, 2), bruteforce_samples=10)
def lens_norm_check(p, n, D, N, samples, bruteforce_D, bruteforce_samples, rng):
    S = _lens_T(p, n, D, N)
    bad = 0
    for _ in range(samples):
        y = S.random_element(rng)
        if (y ** p).norm().capped(S.D) != (y.norm() * p).capped(S.D):
            bad += 1
    brute = []
    ok = bad == 0
    for variables in ((), ("x",)):
        Rp = RingPresentation(p, list(variables), budget=PrecisionBudget(n=n, D=Fraction(4), N=1))
        Sb = lens.LensRing(Rp, n, bruteforce_D, t="T")
        mism = 0
        try:
            for _ in range(bruteforce_samples):
                x = Sb.theta(Sb.domain.random_element(rng, depth=0))
                if x.norm().capped(Sb.D) != lens.quotient_norm_bruteforce(Sb, x):
                    mism += 1
            verdict = _status(mism == 0)
        except ResourceBound as exc:
            verdict = "uncertified"
            mism = str(exc)
        ok &= verdict != "fail"
        brute.append({"ring": repr(Sb), "samples": bruteforce_samples, "mismatches": mism,
                      "verdict": verdict})
    return _status(ok), {"ring": repr(S), "power_samples": samples, "power_mismatches": bad,
                         "bruteforce": brute}


@register("lens-criteria", "every x ∈ S[p^{-1}] with x^p ∈ S belongs to S",
          "Semiperfectness, sampled p-normality and a p-th root of p up to a unit.",
          p=2, n=2, D=Fraction(2), N=2, samples=50)
def lens_criteria(p, n, D, N, samples, rng):
    S = _lens_T(p, n, D, N)
    rep = lens.check_lens_criteria(S, rng, samples)
    # control: without fractional powers of p there is no uniformizer
    S0 = lens.LensRing(S.base, n + 1, D + 1, pi_depth=0)
    rep0 = lens.check_lens_criteria(S0, rng, samples)
    control = rep0["uniformizer"] == "fail"
    return _status(rep["verdict"] == "pass" and control), {
        "lens": rep, "control_W_without_pi": {"uniformizer": rep0["uniformizer"], "detected": control}}


@register("quotient-by-primitive", "a ring of the form S = A/J for some perfect prism (A, J)",
          "Quotient by [x] - p has the digit-expansion form; non-primitive z is rejected.",
          p=2, n=2, D=Fraction(4), N=2)
def quotient_check(p, n, D, N, rng):
    R = _line_ring(p, n, D, N)
    W = witt.WittRing(R, n)
    z = W.teichmuller(R.var("x")) - W.p_elt()
    S = lens.quotient_by_primitive(z)
    theta_z = S.theta(S.z_element()).is_zero()
    half = S.p_power(Fraction(1, S.q)).norm()
    try:
        lens.quotient_by_primitive(W.one() - W.p_elt())
        control = False
    except NotPrimitive:
        control = True
    ok = theta_z and control and half.alpha == Fraction(1, S.q)
    return _status(ok), {"ring": repr(S), "theta_z_zero": theta_z,
                         "alpha_p^(1/q)": half.to_json(), "not_primitive_detected": control}


@register("frobenius-iso", "φ: … /(p^{1/p}) → … /(p)",
          "Frobenius between the two quotients is bijective by rank.",
          instance="trivial", N=2, D=Fraction(2))
def frobenius_iso(instance, N, D, rng):
    data = {
        "trivial": lens.LocalizationDatum("trivial", 2, ("x",), N=N, D=D),
        "laurent": lens.LocalizationDatum("laurent", 2, ("x", "T"), ("T - x",), N=N, D=D),
        "broken": lens.LocalizationDatum("broken", 2, ("x", "T"), ("T - x",), N=N, D=D, saturate=False),
    }
    if instance not in data:
        raise ConfigInvalid(f"frobenius-iso: unknown instance {instance!r}")
    rep = lens.check_frobenius_iso(data[instance])
    return rep["verdict"], rep


@register("tilt", "(S/f)^♭ is the f-adic completion",
          "Inverse limit along Frobenius compared with the f-adic truncation.",
          p=2, n=2, D=Fraction(4), N=2, stage=1)
def tilt_check(p, n, D, N, stage, rng):
    R = _line_ring(p, n, D, N)
    _, rep_x = lens.tilt(R, R.var("x"), stage)
    R2 = _line_ring(p, n, D, N, variables=("x", "T"))
    _, rep_T = lens.tilt(R2, R2.var("T"), stage)
    try:
        lens.tilt(R, R.zero())
        control = False
    except ZeroDivisor:
        control = True
    ok = rep_x["verdict"] == "pass" and rep_T["verdict"] == "pass" and control
    return _status(ok), {"f=x": rep_x, "f=T": rep_T, "zero_divisor_detected": control}


@register("lens-canonical-iso", "We have a canonical topological isomorphism",
          "theta is a bijection on graded linearizations and norm compatible on samples.",
          p=2, n=2, D=Fraction(2), N=2, samples=50)
def lens_iso(p, n, D, N, samples, rng):
    S = _lens_T(p, n, D, N)
    rep = lens.lens_canonical_iso_check(S, rng, samples)
    T = S.domain.ring.var("T")
    ctrl = lens.lens_canonical_iso_check(S, rng, 0, f0=T)
    control = ctrl.get("flag") == "f0 is divisible by T"
    return _status(rep["verdict"] == "pass" and control), {
        "report": rep, "T_divisible_f0_flagged": control}


# ---------------------------------------------------------------------------
# Cech complexes
# ---------------------------------------------------------------------------

@register("cech-exactness", "(††) is exact",
          "Rank/group-order exactness of the two-term Cech complex with an explicit H^0 inverse.",
          p=2, n=2, D=Fraction(4), N=2, DT=4, g="1", corrupt=None, cross_samples=50)
def cech_exactness(p, n, D, N, DT, g, corrupt, cross_samples, rng):
    R = _line_ring(p, n, D, N)
    W = witt.WittRing(R, n)
    C = cech.linearize(W)
    cross_bad = C.cross_check(rng, cross_samples)
    f = W.teichmuller(R.var("x"))
    gs = {"1": W.one(), "1-f": W.one() - f, "f": f}
    if g not in gs:
        raise ConfigInvalid(f"cech-exactness: unknown g {g!r}")
    datum = cech.cech_complex(C, f, gs[g], DT, corrupt=corrupt)
    rep = cech.check_exactness(datum)
    rep["linearization_dim"] = C.dim
    rep["cross_check_failures"] = cross_bad
    ok = rep["verdict"] == "exact" and cross_bad == 0
    return _status(ok), rep


@register("strict-multiplication", "multiplication by x defines a strict inclusion",
          "Norm drop of multiplication by x over a finite basis, with the unit-ideal precondition.",
          p=2, n=2, D=Fraction(2), N=1, DT=2)
def strict_mult(p, n, D, N, DT, rng):
    R = _line_ring(p, n, Fraction(4), N)
    W = witt.WittRing(R, n, "weighted", D)
    one = cech.check_strict_multiplication(W, [W.one()], DT)
    L = RingPresentation(p, ["x"], inverted=["x"], budget=PrecisionBudget(n=n, D=None, N=N))
    WL = witt.WittRing(L, n, "weighted", D)
    lin = cech.check_strict_multiplication(WL, [WL.teichmuller(L.var("x")), WL.one()], DT)
    try:
        cech.check_strict_multiplication(W, [W.teichmuller(R.var("x"))], DT)
        control = False
    except BadWitness:
        control = True
    ok = one["verdict"] == "pass" and one["constant"] == "0/1" and lin["verdict"] == "pass" and control
    return _status(ok), {"x=1": one, "x=[x]+T": lin, "bad_witness_detected": control}


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------

def _glue_ring(p, n, D, N):
    top = max(p**k * (D - k) for k in range(n))
    R = _line_ring(p, n, max(top, Fraction(1)), N)
    return witt.WittRing(R, n, "weighted", D)


@register("factor-near-identity", "|U − 1| < c",
          "Factor near-identity matrices over the overlap into piece-1 times piece-2 factors.",
          p=2, n=2, D=Fraction(6), N=1, rank=2, alpha=Fraction(2), samples=20)
def factor_check(p, n, D, N, rank, alpha, samples, rng):
    C = _glue_ring(p, n, D, N)
    rows = []
    ok = True
    for _ in range(samples):
        U = glue.random_near_identity(C, rank, rng, alpha=alpha)
        U1, U2, rep = glue.factor_near_identity(U)
        good = rep["product_exact"] and rep["U1_in_piece1"] and rep["U2_in_piece2"]
        ok &= good
        rows.append({"alpha": (U - glue.MatrixOverRing.identity(C, rank)).norm().to_json(),
                     "iterations": rep["iterations"], "residual_alphas": rep["residual_alphas"],
                     "verdict": _status(good)})
    bad = glue.MatrixOverRing.identity(C, rank) + glue.MatrixOverRing(
        C, [[glue.LaurentPoly(C, {1: C.one()} if i == j else {}) for j in range(rank)]
            for i in range(rank)])
    try:
        glue.factor_near_identity(bad)
        control = False
    except NonConvergent:
        control = True
    ok &= control
    return _status(ok), {"ring": repr(C), "samples": rows, "nonconvergent_detected": control}


@register("glue-base-change", "M := ker(ψ)",
          "Glue free rank-r data, check both base changes by rank and the round trip.",
          p=2, n=2, D=Fraction(3), N=1, rank=2, alpha=Fraction(1), K=3, oracle=True)
def glue_check(p, n, D, N, rank, alpha, K, oracle, rng):
    C = _glue_ring(p, n, D, N)
    V = glue.random_near_identity(C, rank, rng, alpha=alpha)
    datum = glue.PatchingDatum(C, V, glue.near_identity_inverse(V))
    M = glue.glue_modules(datum)
    rep = glue.verify_base_change(M, K)
    trivial = glue.glue_restrict_identity(C, rank)
    dropped = glue.verify_base_change(M.drop_generator(rank - 1), K)
    dropped_detected = dropped["verdict"] == "fail"
    singular = glue.MatrixOverRing.identity(C, rank)
    singular.rows[rank - 1][rank - 1] = glue.LaurentPoly.constant(C.teichmuller(C.ring.var("x")))
    try:
        glue.glue_modules(glue.PatchingDatum(C, singular, glue.MatrixOverRing.identity(C, rank)))
        anf = False
    except ApproximantNotFound:
        anf = True
    details = {"ring": repr(C), "m": M.m, "base_change": rep, "glue_restrict_identity": trivial,
               "dropped_generator_detected": dropped_detected,
               "dropped_generator_maps": dropped["maps"],
               "approximant_not_found_detected": anf}
    ok = (rep["verdict"] == "pass" and all(trivial[k] for k in ("G1_identity", "G2_identity"))
          and dropped_detected and anf)
    if oracle:
        ok &= _glue_oracle(p, rng, details)
    return _status(ok), details


def _glue_oracle(p, rng, details):
    R0 = RingPresentation(p, ["x"], budget=PrecisionBudget(n=1, D=Fraction(2), N=0))
    C0 = witt.WittRing(R0, 1, "weighted", 2)
    x = C0.teichmuller(R0.var("x"))
    LP = glue.LaurentPoly
    V0 = glue.MatrixOverRing(C0, [
        [LP(C0, {0: C0.one(), -1: x}), LP(C0, {1: x})],
        [LP(C0, {}), LP(C0, {0: C0.one(), -1: x})],
    ])
    M0 = glue.glue_modules(glue.PatchingDatum(C0, V0, glue.near_identity_inverse(V0)))
    brute = glue.brute_force_kernel(M0.datum, DT=1)
    gens = glue.kernel_from_generators(M0, DT=1)
    agree = brute == gens
    details["kernel_oracle"] = {"ring": repr(C0), "bruteforce_size": len(brute),
                                "generated_size": len(gens), "agree": agree}
    return agree


__all__ = ["CATALOG", "Check", "list_checks", "resolve_params", "run_check", "STATUSES"]

"""Quotients of Witt rings by primitive elements.

For ``z = [t] - p`` the quotient ``W(R'[t^(1/p^inf)]) / (z)`` is the ring
``W(R')[pi]`` with ``pi = p^(1/q)`` and ``pi^q = p``; an element is stored as
``q`` Witt vectors over ``R'`` (the coefficients of ``1, pi, ..., pi^(q-1)``),
which is the fractional-p-power digit expansion ``sum_e p^e [b_e]`` written
component by component.  The truncation keeps everything of norm exponent
below ``D``: component ``i`` is a Witt vector modulo weighted exponent
``D - i/q``.

Other primitive elements are handled on tiny rings by enumerating the ideal
``z W`` and picking the smallest coset representative.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import NotPrimitive, ResourceBound, RingMismatch, ZeroDivisor
from .fpring import NormExponent, PerfPoly, PrecisionBudget, RingPresentation, frac_str
from .witt import WittRing, WittVec, is_primitive, monomial_expansion

ENUMERATION_CAP = 1 << 16


# ---------------------------------------------------------------------------
# ring plumbing
# ---------------------------------------------------------------------------

def _rebudget(R, **changes):
    return R.with_budget(replace(R.budget, **changes))


def adjoin_variable(Rp, t, D=None):
    """``Rp`` with one more graded variable ``t`` (same depth, optional new cap)."""
    if t in Rp.variables:
        raise ValueError(f"{t} already a variable")
    budget = Rp.budget if D is None else replace(Rp.budget, D=D)
    return RingPresentation(
        Rp.p, Rp.variables + (t,),
        inverted=[v for v, i in zip(Rp.variables, Rp.inverted) if i],
        ungraded=[v for v, g in zip(Rp.variables, Rp.graded) if not g],
        relations=[str(r) for r in Rp.relations_source],
        budget=budget, saturate=Rp.saturate,
    )


def remove_variable(R, t):
    """``R`` without the variable ``t``; relations must not mention it."""
    idx = R.variables.index(t)
    for r in R.relations_source:
        if any(m[idx] for m in r.terms):
            raise ValueError(f"relation {r} involves {t}")
    keep = [v for v in R.variables if v != t]
    return RingPresentation(
        R.p, keep,
        inverted=[v for v, i in zip(R.variables, R.inverted) if i and v != t],
        ungraded=[v for v, g in zip(R.variables, R.graded) if not g and v != t],
        relations=[str(r) for r in R.relations_source],
        budget=R.budget, saturate=R.saturate,
    )


def _embed(a, R, extra=0):
    """Copy a ``Rp`` element into ``R = adjoin_variable(Rp, t)`` times ``t^(extra units)``."""
    terms = {m + (extra,): c for m, c in a.terms.items()}
    return PerfPoly(R, terms, None if a.prec is None else a.prec + Fraction(extra, R.q))


def enumerate_witt(W, cap=None):
    """Every element of a finite weighted/uniform ``W`` (standard-digit product)."""
    cap = ENUMERATION_CAP if cap is None else cap
    ring = W.ring
    bases = [ring.basis(c) if c else [] for c in W.caps]
    size = W.p ** sum(len(b) for b in bases)
    if size > cap:
        raise ResourceBound(f"enumeration of {size} Witt vectors exceeds cap {cap}")
    digit_sets = []
    for k, b in enumerate(bases):
        opts = []
        for coeffs in itertools.product(range(W.p), repeat=len(b)):
            opts.append(PerfPoly(ring, {m: c for m, c in zip(b, coeffs) if c}, W.caps[k]))
        digit_sets.append(opts)
    for digits in itertools.product(*digit_sets):
        yield W.vec(list(digits))


# ---------------------------------------------------------------------------
# lens rings
# ---------------------------------------------------------------------------

class LensRing:
    """``W(R')[p^(1/q)]`` truncated at norm exponent ``D``.

    ``pi_depth`` fixes ``q = p^pi_depth``; ``pi_depth = 0`` models ``W(R')``
    without fractional powers of p.  When ``t`` is given the ring is also the
    quotient of ``W(R'[t])`` by ``[t] - p`` and :meth:`theta` is available.
    """

    def __init__(self, base, n, D, pi_depth=None, t=None, z=None):
        self.p = base.p
        self.n = n
        self.D = Fraction(D)
        self.pi_depth = base.N if pi_depth is None else pi_depth
        self.q = self.p ** self.pi_depth
        top = max([Fraction(0)] + [self.p**k * (self.D - k) for k in range(n)])
        if base.D is not None and base.D < top:
            base = _rebudget(base, D=top)
        self.base = base
        self.W = WittRing(base, n, "weighted", self.D)
        self.caps = [
            [max(Fraction(0), self.p**k * (self.D - Fraction(i, self.q) - k)) for k in range(n)]
            for i in range(self.q)
        ]
        self.t = t
        self.domain = None
        if t is not None:
            if self.q != base.q:
                raise ValueError("theta needs pi_depth equal to the digit-ring depth")
            R = adjoin_variable(base, t, D=top if base.D is not None else None)
            self.domain = WittRing(R, n, "weighted", self.D)
        self.z = z
        self.special = True

    def __repr__(self):
        return f"LensRing(W_{self.n}({self.base.name})[p^(1/{self.q})], D={self.D})"

    def __eq__(self, other):
        return (isinstance(other, LensRing) and self.base == other.base and self.n == other.n
                and self.D == other.D and self.q == other.q)

    def __hash__(self):
        return hash((self.n, self.D, self.q))

    # constructors -----------------------------------------------------------
    def element(self, comps):
        return LensElement(self, comps)

    def zero(self):
        return LensElement(self, [self.W.zero() for _ in range(self.q)])

    def one(self):
        return self.from_witt(self.W.one())

    def scalar(self, k):
        return self.from_witt(self.W.scalar(k))

    def from_witt(self, w, i=0):
        comps = [self.W.zero() for _ in range(self.q)]
        comps[i] = w
        return LensElement(self, comps)

    def pi(self, e=1):
        """``p^(e/q)`` for an integer ``e >= 0``."""
        k, i = divmod(e, self.q)
        w = self.W.p_elt() ** k if k else self.W.one()
        return self.from_witt(w, i)

    def p_power(self, e):
        e = Fraction(e)
        a = e * self.q
        if a.denominator != 1 or a < 0:
            raise ValueError(f"p^{e} is not in the ring")
        return self.pi(int(a))

    def teichmuller(self, b):
        return self.from_witt(self.W.teichmuller(b))

    def from_digits(self, digits):
        """``sum_e p^e [b_e]`` from a map ``e -> b_e``."""
        x = self.zero()
        for e, b in digits.items():
            x = x + self.p_power(e) * self.teichmuller(b)
        return x

    def random_element(self, rng, depth=None, max_terms=2):
        comps = [self.W.random_element(rng, depth=depth, max_terms=max_terms) for _ in range(self.q)]
        return LensElement(self, comps)

    # theta and its section ----------------------------------------------------
    def theta(self, x):
        """Image of ``x`` in ``W(R'[t])`` under ``[t] -> p``."""
        if self.domain is None:
            raise ValueError("this lens has no presentation as a quotient")
        if not isinstance(x, WittVec) or x.W != self.domain:
            raise RingMismatch("theta expects a Witt vector over the tilt")
        tidx = len(self.base.variables)
        comps = [self.W.zero() for _ in range(self.q)]
        for level, mono in monomial_expansion(x):
            (m, c), = mono.terms.items()
            k, i = divmod(m[tidx], self.q)
            L = level + k
            if L >= self.n:
                continue
            rest = tuple(e * self.p**L for e in m[:tidx])
            digits = [self.base.zero() for _ in range(self.n)]
            digits[L] = PerfPoly(self.base, {rest: c}, None)
            comps[i] = comps[i] + self.W.vec(digits)
        return LensElement(self, comps)

    def section(self, x):
        """Canonical lift ``sum_e p^e [b_e t^frac(e)]`` of a lens element."""
        Wd = self.domain
        out = Wd.zero()
        for i, comp in enumerate(x.comps):
            for k, d in enumerate(comp.digits):
                if d.is_zero():
                    continue
                digits = [Wd.ring.zero() for _ in range(self.n)]
                digits[k] = _embed(d, Wd.ring, i * self.p**k)
                out = out + Wd.vec(digits)
        return out

    def z_element(self):
        Wd = self.domain
        return Wd.teichmuller(Wd.ring.var(self.t)) - Wd.p_elt()


class LensElement:
    """Element of a :class:`LensRing` in component form."""

    __slots__ = ("S", "comps")

    def __init__(self, S, comps):
        self.S = S
        out = []
        for i, w in enumerate(comps):
            caps = S.caps[i]
            out.append(WittVec(S.W, [d.with_prec(caps[k]) for k, d in enumerate(w.digits)], w.length))
        self.comps = tuple(out)

    def _coerce(self, other):
        if isinstance(other, int):
            return self.S.scalar(other)
        if not isinstance(other, LensElement):
            return NotImplemented
        if other.S is not self.S and other.S != self.S:
            raise RingMismatch("lens rings differ")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return LensElement(self.S, [a + b for a, b in zip(self.comps, other.comps)])

    __radd__ = __add__

    def __neg__(self):
        return LensElement(self.S, [-a for a in self.comps])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        q = self.S.q
        out = [self.S.W.zero() for _ in range(q)]
        for i, a in enumerate(self.comps):
            if a.is_zero():
                continue
            for j, b in enumerate(other.comps):
                if b.is_zero():
                    continue
                prod = a * b
                s = i + j
                if s >= q:
                    # pi^q = p acts as V F on the coefficient
                    prod = prod.frobenius().verschiebung()
                    s -= q
                out[s] = out[s] + prod
        return LensElement(self.S, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = self.S.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("LensElement is not hashable")

    def is_zero(self):
        return all(c.is_zero() for c in self.comps)

    def divide_by_p(self):
        return LensElement(self.S, [c.divide_by_p() if not c.is_zero() else c.truncate(c.length - 1)
                                    for c in self.comps])

    def is_unit(self):
        return self.comps[0].digits[0].is_unit()

    def digit_map(self):
        """``{e: standard digit}`` with ``e = k + i/q``; the Teichmueller digit is its ``p^k``-th root."""
        out = {}
        for i, comp in enumerate(self.comps):
            for k, d in enumerate(comp.digits):
                if not d.is_zero():
                    out[k + Fraction(i, self.S.q)] = d
        return dict(sorted(out.items()))

    def norm(self):
        best = None
        for i, comp in enumerate(self.comps):
            a = comp.weighted_gauss_norm().alpha
            if a is not None:
                a += Fraction(i, self.S.q)
                best = a if best is None else min(best, a)
        return NormExponent(best)

    def __repr__(self):
        body = ", ".join(f"p^{frac_str(e)}: {d}" for e, d in self.digit_map().items())
        return f"LensElement({{{body}}})"

    def to_json(self):
        return {frac_str(e): str(d) for e, d in self.digit_map().items()}


def lens_norm(x):
    return x.norm()


def theta(S, x):
    return S.theta(x)


# ---------------------------------------------------------------------------
# quotients
# ---------------------------------------------------------------------------

class EnumeratedQuotient:
    """``W / zW`` for a general primitive ``z`` on a tiny finite ring.

    The ideal is enumerated once; ``reduce`` returns the smallest coset
    representative under a fixed total order on digit vectors.
    """

    def __init__(self, z, cap=None):
        self.z = z
        self.W = z.W
        self.ideal = [w * z for w in enumerate_witt(self.W, cap)]
        self.special = False

    @staticmethod
    def _key(x):
        return tuple(tuple(sorted(d.terms.items())) for d in x.digits)

    def reduce(self, x):
        return min((x + i for i in self.ideal), key=self._key)

    def equal(self, a, b):
        return (a - b).is_zero() or any(((a - b) - i).is_zero() for i in self.ideal)


def quotient_by_primitive(z, D=None):
    """Lens ring ``W / (z)``; special-shape ``[t] - p`` gives the digit expansion form."""
    cert = is_primitive(z)
    if not cert:
        raise NotPrimitive(cert.reason)
    W = z.W
    R = W.ring
    t = None
    shifted = z + W.p_elt()
    for v, g, inv in zip(R.variables, R.graded, R.inverted):
        if g and not inv and shifted == W.teichmuller(R.var(v)):
            t = v
            break
    if t is None:
        return EnumeratedQuotient(z)
    if D is None:
        D = W.D if W.mode == "weighted" else min(Fraction(W.n), R.D)
    base = remove_variable(R, t)
    S = LensRing(base, W.n, D, t=t, z=z)
    return S


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def quotient_norm_bruteforce(S, x, cap=None):
    """``max_w alpha(r + w z)`` over every ``w`` of the (finite) tilt Witt ring."""
    r0 = S.section(x)
    z = S.z_element()
    best = None
    for w in enumerate_witt(S.domain, cap):
        a = (r0 + w * z).weighted_gauss_norm().capped(S.D)
        best = a if best is None else max(best, a)
    return best


def _sp_basis(S):
    """Basis of ``S/p`` as pairs ``(i, monomial)`` plus index, with relation data."""
    base = S.base
    labels = []
    blocks = []
    for i in range(S.q):
        cap = S.caps[i][0]
        if cap <= 0:
            blocks.append(None)
            continue
        cols, index, eb = base.relation_basis(cap)
        free = [c for c in range(len(cols)) if c not in set(eb.pivots)]
        blocks.append((cols, index, eb, free, len(labels)))
        labels.extend((i, cols[c]) for c in free)
    return labels, blocks


def _sp_vector(S, blocks, n, i, a):
    v = np.zeros(n, dtype=np.int64)
    blk = blocks[i]
    if blk is None:
        return v
    cols, index, eb, free, off = blk
    w = np.zeros(len(cols), dtype=np.int64)
    for m, c in a.terms.items():
        if m in index:
            w[index[m]] = c
    w = eb.reduce(w)
    for k, c in enumerate(free):
        v[off + k] = w[c]
    return v


def check_lens_criteria(S, rng=None, samples=100):
    """Finite-stage versions of the three lens criteria."""
    rng = rng or np.random.default_rng(0)
    report = {"ring": repr(S), "caps": {"n": S.n, "D": frac_str(S.D), "q": S.q}}
    if S.D <= 0:
        report.update(degenerate=True, semiperfect="pass", p_normal="pass", uniformizer="pass",
                      verdict="pass")
        return report
    p, base = S.p, S.base
    # (a) Frobenius on S/p hits every element defined one level up
    labels, blocks = _sp_basis(S)
    n = len(labels)
    if base.finite or not base.variables:
        rows = []
        for i, m in labels:
            img = np.zeros(n, dtype=np.int64)
            if i * p < S.q:
                a = PerfPoly(base, {m: 1}, None).frobenius()
                img = _sp_vector(S, blocks, n, i * p, a)
            rows.append(img)
        image = linalg.EchelonBasis(np.array(rows) if rows else [], p, n)
        coarse = [k for k, (i, m) in enumerate(labels)
                  if i % p == 0 and all(e % p == 0 for e in m)]
        missing = 0
        for k in coarse:
            e = np.zeros(n, dtype=np.int64)
            e[k] = 1
            if not image.contains(e):
                missing += 1
        report["semiperfect"] = "pass" if missing == 0 else "fail"
        report["frobenius_rank"] = {"dim": n, "rank": image.dim, "coarse_dim": len(coarse),
                                    "coarse_missing": missing}
    else:
        report["semiperfect"] = "uncertified"
    # (b) p-normality: x = y / p^e with x^p integral must be integral
    e = Fraction(1, S.q)
    if p * e >= S.D:
        report["p_normal"] = "uncertified"
        report["p_normal_detail"] = "truncation too coarse for the test exponent"
    else:
        hits = bad = 0
        for _ in range(samples):
            y = S.random_element(rng)
            if rng.random() < 0.5:
                y = y * S.p_power(e)
            if (y ** p).norm().capped(S.D) >= p * e:
                hits += 1
                if y.norm().capped(S.D) < e:
                    bad += 1
        report["p_normal"] = "pass" if bad == 0 else "fail"
        report["p_normal_detail"] = {"samples": samples, "x_p_integral": hits, "counterexamples": bad,
                                     "status": "no counterexample found" if bad == 0 else "counterexample"}
    # (c) an element whose p-th power is p times a unit
    found = None
    if S.q % p == 0:
        cand = S.pi(S.q // p)
        if cand ** p == S.p_power(1):
            found = f"p^(1/{p})"
    else:
        for k in range(S.n):
            for i in range(S.q):
                for m in (base.basis(S.caps[i][0]) if S.caps[i][0] > 0 and base.finite else [base.unit_exp]):
                    b = S.p_power(k + Fraction(i, S.q)) * S.teichmuller(PerfPoly(base, {m: 1}, None))
                    c = b ** p
                    try:
                        u = c.divide_by_p()
                    except Exception:
                        continue
                    if u.norm().capped(S.D - 1) == 0 and u.is_unit():
                        found = repr(b)
                        break
    report["uniformizer"] = "pass" if found else "fail"
    report["uniformizer_witness"] = found or "not a lens at this precision"
    report["verdict"] = "pass" if all(report[k] == "pass" for k in ("semiperfect", "p_normal", "uniformizer")) else "fail"
    return report


@dataclass
class LocalizationDatum:
    """A perfect digit ring ``R'`` presented by variables and relations."""

    name: str
    p: int
    variables: tuple
    relations: tuple = ()
    N: int = 2
    D: Fraction = Fraction(2)
    saturate: bool = True

    def ring(self, N, D):
        return RingPresentation(self.p, self.variables, relations=self.relations,
                                budget=PrecisionBudget(n=1, D=D, N=N), name=self.name,
                                saturate=self.saturate)


def _quotient_cols(R, prec):
    cols, index, eb = R.relation_basis(prec)
    free = [c for c in range(len(cols)) if c not in set(eb.pivots)]
    return cols, index, eb, free


def _coords(R, qc, a):
    cols, index, eb, free = qc
    w = np.zeros(len(cols), dtype=np.int64)
    for m, c in a.terms.items():
        if m in index:
            w[index[m]] = c
    w = eb.reduce(w)
    return np.array([w[c] for c in free], dtype=np.int64)


def check_frobenius_iso(datum):
    """Frobenius ``S/p^(1/p) -> S/p`` on linearizations, by rank.

    The source lives at depth ``N`` and degree cap ``D``; Frobenius lands in
    the depth ``N - 1`` part with cap ``p D``, presented as its own ring.
    """
    p, N = datum.p, datum.N
    if N < 1:
        raise ValueError("need depth N >= 1 for p^(1/p)")
    src = datum.ring(N, datum.D)
    tgt = datum.ring(N - 1, p * datum.D)
    q_src = p**N // p  # powers of pi below p^(1/p)
    qs, qt = _quotient_cols(src, datum.D), _quotient_cols(tgt, p * datum.D)
    dim_s = q_src * len(qs[3])
    dim_t = q_src * len(qt[3])
    if dim_s * dim_t > 4_000_000:
        raise ResourceBound("Frobenius-iso matrices too large")
    rows = []
    for i in range(q_src):
        for c in qs[3]:
            m = qs[0][c]
            # (pi^i m)^p = pi'^i m^p, and m^p in depth N-1 units is m itself
            img = PerfPoly(tgt, {m: 1}, None)
            v = np.zeros(dim_t, dtype=np.int64)
            v[i * len(qt[3]):(i + 1) * len(qt[3])] = _coords(tgt, qt, img)
            rows.append(v)
    mat = np.array(rows) if rows else np.zeros((0, dim_t), dtype=np.int64)
    r = linalg.rank(mat, p) if rows else 0
    injective = r == dim_s
    surjective = r == dim_t
    return {
        "datum": datum.name, "caps": {"N": N, "D": frac_str(Fraction(datum.D))},
        "saturated": datum.saturate,
        "rank_table": {"source_dim": dim_s, "target_dim": dim_t, "rank": r},
        "injective": injective, "surjective": surjective,
        "verdict": "pass" if injective and surjective else "fail",
    }


def tilt(S, f, stage=None):
    """``lim_phi S/f`` to stage ``p^s``, compared with the ``f``-adic truncation.

    ``S`` is a finite perfect presentation.  Returns ``(ring, report)`` where
    ``ring`` is ``S/f^(p^s)`` (not root-saturated) and the report records the
    comparison map ``a -> (a^(1/p^k) mod f)_k``.
    """
    if f.is_zero():
        raise ZeroDivisor("f = 0")
    p = S.p
    s = S.N if stage is None else stage
    # nonzerodivisor test at truncation: f*a = 0 only for a of top degree
    D = S.D
    lead = f.valuation()
    low = [m for m in S.basis(D) if S.degree(m) + lead < D] if D is not None else []
    if low:
        mat = np.array([S.to_vector((f * PerfPoly(S, {m: 1}, None)), {mm: i for i, mm in enumerate(S.basis(D))})
                        for m in low])
        if linalg.rank(mat, p) < len(low):
            raise ZeroDivisor(f"{f} is a zero divisor at truncation")
    fp = f ** (p**s)
    Q = RingPresentation(p, S.variables, relations=[str(r) for r in S.relations_source] + [str(fp.with_prec(None))],
                         budget=S.budget, name=f"{S.name}/({f})^{p**s}", saturate=False)
    deep = S.with_budget(replace(S.budget, N=S.N + s))
    fdeep = PerfPoly(deep, {tuple(e * p**s for e in m): c for m, c in f.terms.items()}, None)
    Qd = RingPresentation(p, S.variables, relations=[str(r) for r in deep.relations_source] + [str(fdeep)],
                          budget=deep.budget, saturate=False)
    qQ = _quotient_cols(Q, D)
    qd = _quotient_cols(Qd, D)
    rows = []
    compatible = True
    for c in qQ[3]:
        m = qQ[0][c]
        a = PerfPoly(deep, {tuple(e * p**s for e in m): 1}, None)
        seq = []
        for k in range(s + 1):
            seq.append(_coords(Qd, qd, PerfPoly(Qd, a.terms, None)))
            if k < s:
                nxt = a.frobenius_inverse()
                back = PerfPoly(Qd, (nxt.frobenius()).terms, None)
                compatible &= bool(np.array_equal(_coords(Qd, qd, back), seq[-1]))
                a = nxt
        rows.append(np.concatenate(seq))
    r = linalg.rank(np.array(rows), p) if rows else 0
    report = {
        "stage": s, "quotient_dim": len(qQ[3]), "sequence_rank": r,
        "injective": r == len(qQ[3]), "compatible": compatible,
        "complete_at_truncation": D is not None and lead * p**s >= D,
    }
    report["verdict"] = "pass" if report["injective"] and compatible else "fail"
    return Q, report


def lens_canonical_iso_check(S, rng=None, samples=50, f0=None):
    """``theta: W(R'[t]) / ([t] - p) -> S`` on p-adic graded pieces, plus isometry samples.

    For each level ``k`` the graded piece of the source is ``R'[t]/(t)`` (the
    relation ``t`` is not root-saturated) truncated at ``D - k``; its image
    under theta is read off in the level-``k`` part of ``S``.
    """
    rng = rng or np.random.default_rng(0)
    report = {"ring": repr(S), "levels": []}
    if f0 is not None:
        tidx = S.domain.ring.variables.index(S.t)
        divisible = all(m[tidx] > 0 for m in f0.terms) and f0.terms
        if divisible:
            report.update(verdict="fail", flag="f0 is divisible by T")
            return report
    Wd = S.domain
    R = Wd.ring
    tidx = len(S.base.variables)
    ok = True
    for k in range(S.n):
        cap = S.D - k
        if cap <= 0:
            break
        src = [m for m in (R.basis(cap) if R.finite else []) if m[tidx] < S.q]
        # target coordinates: component i, level-k standard digit, monomial
        tgt_index = {}
        for i in range(S.q):
            c = S.caps[i][k]
            if c > 0 and S.base.finite:
                # only digits whose p^k-th root lies on the depth-N grid
                for m in S.base.basis(c):
                    if all(e % S.p**k == 0 for e in m):
                        tgt_index[(i, m)] = len(tgt_index)
            elif c > 0 and not S.base.variables:
                tgt_index[(i, ())] = len(tgt_index)
        rows = []
        for m in src:
            mono = PerfPoly(R, {m: 1}, None)
            digits = [R.zero() for _ in range(S.n)]
            digits[k] = mono ** (S.p**k)
            img = S.theta(Wd.vec(digits))
            v = np.zeros(len(tgt_index), dtype=np.int64)
            for i, comp in enumerate(img.comps):
                for kk in range(k):
                    ok &= comp.digits[kk].is_zero()
                for mm, c in comp.digits[k].terms.items():
                    if (i, mm) in tgt_index:
                        v[tgt_index[(i, mm)]] = c
            rows.append(v)
        r = linalg.rank(np.array(rows), S.p) if rows else 0
        report["levels"].append({"level": k, "source_dim": len(src), "target_dim": len(tgt_index), "rank": r})
        ok &= r == len(src) == len(tgt_index)
    report["bijective"] = ok
    iso = 0
    for _ in range(samples):
        x = Wd.random_element(rng, depth=max(0, R.N - S.n + 1))
        y = S.theta(x)
        lift = S.section(y)
        a_lens = y.norm().capped(S.D)
        iso += (lift.weighted_gauss_norm().capped(S.D) == a_lens
                and a_lens >= x.weighted_gauss_norm().capped(S.D)
                and S.theta(lift) == y)
    report["norm_samples"] = samples
    report["norm_compatible"] = iso
    report["verdict"] = "pass" if ok and iso == samples else "fail"
    return report
